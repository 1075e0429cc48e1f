#include "lensopt/gamma.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lensopt {

Vector threshold(const Vector& phi, Scalar level) {
  if (!(level > 0 && level < 1)) throw std::invalid_argument("threshold level must lie in (0, 1)");
  return phi.unaryExpr([level](Scalar s) { return s >= level ? Scalar(1) : Scalar(0); });
}

namespace {

// Separable Gaussian, sigma = 1 cell, truncated at 3 cells.
Vector smooth_indicator(const Grid& grid, const Vector& f) {
  constexpr int radius = 3;
  std::array<Scalar, 2 * radius + 1> kernel{};
  Scalar sum = 0;
  for (int j = -radius; j <= radius; ++j) sum += kernel[j + radius] = std::exp(-0.5 * j * j);
  for (Scalar& w : kernel) w /= sum;
  const int nx = grid.nx() + 1;
  const int ny = grid.ny() + 1;
  auto pass = [&](const Vector& in, bool along_x) {
    Vector out = Vector::Zero(in.size());
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        Scalar acc = 0;
        for (int j = -radius; j <= radius; ++j) {
          const int sx = along_x ? std::clamp(ix + j, 0, nx - 1) : ix;
          const int sy = along_x ? iy : std::clamp(iy + j, 0, ny - 1);
          acc += kernel[j + radius] * in[grid.node(sx, sy)];
        }
        out[grid.node(ix, iy)] = acc;
      }
    }
    return out;
  };
  return pass(pass(f, true), false);
}

}  // namespace

Scalar perimeter_tv(const Grid& grid, const Vector& binary) {
  if (binary.size() != grid.node_count()) throw std::invalid_argument("field does not match grid");
  for (int i = 0; i < binary.size(); ++i) {
    if (binary[i] != 0 && binary[i] != 1) throw std::invalid_argument("perimeter_tv needs a binary field");
  }
  const Vector f = smooth_indicator(grid, binary);
  const Scalar hx = grid.hx();
  const Scalar hy = grid.hy();
  Scalar total = 0;
  for (int ey = 0; ey < grid.ny(); ++ey) {
    for (int ex = 0; ex < grid.nx(); ++ex) {
      const auto n = grid.element_nodes(ex, ey);
      const Scalar gx = ((f[n[1]] - f[n[0]]) + (f[n[3]] - f[n[2]])) / (2 * hx);
      const Scalar gy = ((f[n[2]] - f[n[0]]) + (f[n[3]] - f[n[1]])) / (2 * hy);
      total += hx * hy * std::hypot(gx, gy);
    }
  }
  return total;
}

Scalar sharp_objective(const Problem& problem, const Vector& binary) {
  const Scalar perimeter = perimeter_tv(problem.grid, binary);
  auto [state, report] = solve_state(problem.grid, binary, problem.medium, problem.alpha,
                                     problem.source, problem.time, problem.solver);
  return tracking_term(problem, state) + problem.gl.gamma * kProfileConstant * perimeter;
}

Scalar l1_distance(const Grid& grid, const Vector& a, const Vector& b) {
  return lumped_mass(grid).dot((a - b).cwiseAbs());
}

Scalar profile_energy(Scalar eps, const Vector& values, Scalar length) {
  if (values.size() < 2) throw std::invalid_argument("profile needs at least two nodes");
  const Scalar h = length / (values.size() - 1);
  Scalar energy = 0;
  for (int e = 0; e + 1 < values.size(); ++e) {
    const Scalar a = values[e];
    const Scalar b = values[e + 1];
    const Scalar gradient = (b - a) / h;
    const Scalar potential = h * (0.25 * (a + b) - (a * a + a * b + b * b) / 6);
    energy += 0.5 * eps * gradient * gradient * h + potential / eps;
  }
  return energy;
}

namespace {

/// Projected SOR on one level, starting from `phi`. Each interior update
/// exactly minimizes (then over-relaxes) the convex quadratic a x^2 + b x the
/// energy restricts to, so the energy never increases. The minimizer is only
/// defined up to a slow translation of the transition, so the sweeps stop once
/// the energy stalls rather than waiting for the iterate to freeze.
int relax_profile(Scalar eps, Scalar length, Vector& phi) {
  const int nodes = static_cast<int>(phi.size());
  const Scalar h = length / (nodes - 1);
  const Scalar a = eps / h - h / (3 * eps);
  const Scalar omega = 1.9;
  const int check_every = 100;
  const int max_sweeps = 2000000;
  Scalar last_energy = profile_energy(eps, phi, length);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    Scalar change = 0;
    for (int i = 1; i + 1 < nodes; ++i) {
      const Scalar nb = phi[i - 1] + phi[i + 1];
      const Scalar b = -eps / h * nb + (h / 2 - h * nb / 6) / eps;
      const Scalar next = std::clamp(phi[i] + omega * (-b / (2 * a) - phi[i]), Scalar(0), Scalar(1));
      change = std::max(change, std::abs(next - phi[i]));
      phi[i] = next;
    }
    if (change < 1e-14) return sweep;
    if (sweep % check_every == 0) {
      const Scalar energy = profile_energy(eps, phi, length);
      if (last_energy - energy <= 1e-15 * energy) return sweep;
      last_energy = energy;
    }
  }
  throw SolverError("1D profile minimization did not settle");
}

}  // namespace

ProfileResult optimal_profile(Scalar eps, int nodes, Scalar length) {
  if (!(eps > 0) || !(length > 0)) throw std::invalid_argument("eps and length must be positive");
  if (nodes < 3 || eps * (nodes - 1) / length < 20) {
    throw std::invalid_argument("profile resolution must give at least 20 nodes per eps");
  }
  // Nested iteration: solve on halved grids first (keeping h well below eps)
  // and interpolate upward.
  std::vector<int> intervals{nodes - 1};
  while (intervals.back() / 2 >= 16 && eps * (intervals.back() / 2) / length >= 4) {
    intervals.push_back(intervals.back() / 2);
  }
  ProfileResult out;
  Vector phi = Vector::LinSpaced(intervals.back() + 1, 0, 1);
  for (auto it = intervals.rbegin(); it != intervals.rend(); ++it) {
    if (phi.size() != *it + 1) {
      const Vector coarse = phi;
      const int m = static_cast<int>(coarse.size()) - 1;
      phi.resize(*it + 1);
      for (int i = 0; i <= *it; ++i) {
        const Scalar s = Scalar(i) * m / *it;
        const int j = std::min(static_cast<int>(s), m - 1);
        phi[i] = coarse[j] + (s - j) * (coarse[j + 1] - coarse[j]);
      }
    }
    out.sweeps += relax_profile(eps, length, phi);
  }
  out.energy = profile_energy(eps, phi, length);
  out.profile = std::move(phi);
  return out;
}

std::vector<SweepRow> eps_sweep(const Problem& problem, const Vector& phi0,
                                const std::vector<Scalar>& eps_list, const OptimizerConfig& cfg,
                                bool warm_start) {
  std::vector<SweepRow> rows;
  Vector start = phi0;
  Vector previous;
  for (Scalar eps : eps_list) {
    SweepRow row;
    row.eps = eps;
    row.l1_to_previous = std::numeric_limits<Scalar>::quiet_NaN();
    try {
      Problem local = problem;
      local.gl.eps = eps;
      const OptimizeResult res = optimize(warm_start ? start : phi0, local, cfg);
      row.phi = res.phi;
      row.status = to_string(res.status);
      row.j_eps = res.history.back().objective.total;
      row.gl_energy = gl_energy(local.grid, res.phi, local.gl, local.quadrature);
      const Vector bin = threshold(res.phi);
      row.perimeter = perimeter_tv(local.grid, bin);
      row.sharp_energy = kProfileConstant * row.perimeter;
      row.j0 = sharp_objective(local, bin);
      if (previous.size() != 0) row.l1_to_previous = l1_distance(local.grid, res.phi, previous);
      previous = res.phi;
      if (warm_start) start = res.phi;
    } catch (const std::exception& e) {
      row.status = std::string("failed: ") + e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace lensopt
