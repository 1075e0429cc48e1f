#include "lensopt/state.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lensopt {

AlphaCoefficient::AlphaCoefficient(Fn value, Fn dt, Fn dtt, Scalar lower, Scalar upper,
                                   bool time_independent)
    : value_(std::move(value)),
      dt_(std::move(dt)),
      dtt_(std::move(dtt)),
      lower_(lower),
      upper_(upper),
      time_independent_(time_independent) {
  if (!(lower_ > 0) || !(upper_ >= lower_)) {
    throw std::invalid_argument("alpha must satisfy 0 < lower <= upper");
  }
}

AlphaCoefficient AlphaCoefficient::constant(Scalar value) {
  auto zero = [](Scalar, Scalar, Scalar) { return Scalar(0); };
  return {[value](Scalar, Scalar, Scalar) { return value; }, zero, zero, value, value, true};
}

AlphaCoefficient AlphaCoefficient::modulated(Scalar base, Scalar amplitude, Scalar omega,
                                             Scalar lx, Scalar ly) {
  if (!(std::abs(amplitude) < base)) {
    throw std::invalid_argument("modulated alpha degenerates: need |amplitude| < base");
  }
  const Scalar pi = std::numbers::pi;
  auto shape = [=](Scalar x, Scalar y) { return std::cos(pi * x / lx) * std::cos(pi * y / ly); };
  return {
      [=](Scalar x, Scalar y, Scalar t) { return base + amplitude * std::sin(omega * t) * shape(x, y); },
      [=](Scalar x, Scalar y, Scalar t) {
        return amplitude * omega * std::cos(omega * t) * shape(x, y);
      },
      [=](Scalar x, Scalar y, Scalar t) {
        return -amplitude * omega * omega * std::sin(omega * t) * shape(x, y);
      },
      base - std::abs(amplitude),
      base + std::abs(amplitude),
      amplitude == 0 || omega == 0,
  };
}

Vector AlphaCoefficient::nodal(const Grid& grid, Scalar t) const {
  return grid.interpolate([&](Scalar x, Scalar y) { return value_(x, y, t); });
}

Vector AlphaCoefficient::nodal_dt(const Grid& grid, Scalar t) const {
  return grid.interpolate([&](Scalar x, Scalar y) { return dt_(x, y, t); });
}

Vector AlphaCoefficient::nodal_dtt(const Grid& grid, Scalar t) const {
  return grid.interpolate([&](Scalar x, Scalar y) { return dtt_(x, y, t); });
}

SourceSpec SourceSpec::zero(const Grid& grid, const TimeGrid&) {
  SourceSpec src;
  src.u0 = Vector::Zero(grid.node_count());
  src.u1 = Vector::Zero(grid.node_count());
  return src;
}

void SourceSpec::validate(const Grid& grid, const TimeGrid& time) const {
  if (time.steps < 3 || !(time.tau > 0)) {
    throw std::invalid_argument("time grid needs tau > 0 and at least 3 steps");
  }
  if (u0.size() != grid.node_count() || u1.size() != grid.node_count()) {
    throw std::invalid_argument("initial data does not match the grid");
  }
  if (!u0.allFinite() || !u1.allFinite()) throw std::invalid_argument("initial data not finite");
  if (!boundary.empty() && static_cast<int>(boundary.size()) != time.levels()) {
    throw std::invalid_argument("boundary series needs one trace per time level");
  }
  if (volume.size() != 0 &&
      (volume.rows() != grid.node_count() || volume.cols() != time.levels())) {
    throw std::invalid_argument("volume source needs nodes x levels entries");
  }
}

WaveTrajectory WaveTrajectory::zero(const Grid& grid, const TimeGrid& time) {
  const int n = grid.node_count();
  const int l = time.levels();
  return {time, History::Zero(n, l), History::Zero(n, l), History::Zero(n, l)};
}

WaveTrajectory WaveTrajectory::operator-(const WaveTrajectory& other) const {
  return {time, u - other.u, v - other.v, a - other.a};
}

WaveTrajectory WaveTrajectory::operator*(Scalar s) const { return {time, u * s, v * s, a * s}; }

WaveTrajectory reconstruct_trajectory(History u, const Vector& v0, const TimeGrid& time) {
  const int last = time.steps;
  const Scalar tau = time.tau;
  if (u.cols() != time.levels() || last < 3) {
    throw std::invalid_argument("trajectory needs steps + 1 >= 4 levels");
  }
  History v(u.rows(), u.cols());
  History a(u.rows(), u.cols());
  v.col(0) = v0;
  for (int n = 1; n < last; ++n) {
    v.col(n) = (u.col(n + 1) - u.col(n - 1)) / (2 * tau);
    a.col(n) = (u.col(n + 1) - 2 * u.col(n) + u.col(n - 1)) / (tau * tau);
  }
  v.col(last) = (3 * u.col(last) - 4 * u.col(last - 1) + u.col(last - 2)) / (2 * tau);
  a.col(0) = (2 * u.col(0) - 5 * u.col(1) + 4 * u.col(2) - u.col(3)) / (tau * tau);
  a.col(last) =
      (2 * u.col(last) - 5 * u.col(last - 1) + 4 * u.col(last - 2) - u.col(last - 3)) /
      (tau * tau);
  return {time, std::move(u), std::move(v), std::move(a)};
}

// ---------------------------------------------------------------------------

ThreeLevelScheme::ThreeLevelScheme(const Grid& grid, const CoefficientFields& coeffs,
                                   const AlphaCoefficient& alpha, TimeGrid time,
                                   SpdSolveOptions opts)
    : grid_(&grid), alpha_(&alpha), time_(time), opts_(opts) {
  if (!(time.tau > 0) || time.steps < 3) {
    throw std::invalid_argument("time grid needs tau > 0 and at least 3 steps");
  }
  mass_ = assemble_weighted_mass(grid, Vector::Ones(grid.node_count()));
  stiff_c_ = assemble_weighted_stiffness(grid, coeffs.csq);
  stiff_b_ = assemble_weighted_stiffness(grid, coeffs.b);
  if (alpha.time_independent()) mass_alpha_const_ = assemble_weighted_mass(grid, alpha.nodal(grid, 0));
}

SparseOperator ThreeLevelScheme::mass_alpha(int n) const {
  if (alpha_->time_independent()) return mass_alpha_const_;
  return assemble_weighted_mass(*grid_, alpha_->nodal(*grid_, time_.time(n)));
}

namespace {

void require_finite(const Vector& x, int n) {
  if (!x.allFinite()) {
    throw SolverError("non-finite values at time level " + std::to_string(n));
  }
}

}  // namespace

History ThreeLevelScheme::march_forward(const Vector& x0, const Vector& v0,
                                        const Load& load) const {
  const int nodes = grid_->node_count();
  const Scalar tau = time_.tau;
  History x = History::Zero(nodes, time_.levels());
  x.col(0) = x0;

  const bool fixed = alpha_->time_independent();
  const SparseOperator system_fixed =
      fixed ? SparseOperator(mass_alpha_const_ / (tau * tau) + 0.5 * stiff_c_ +
                             stiff_b_ / (2 * tau))
            : SparseOperator();
  std::unique_ptr<SpdSolver> solver_fixed;
  if (fixed) solver_fixed = std::make_unique<SpdSolver>(system_fixed, opts_);

  {
    const SparseOperator m0 = mass_alpha(0);
    const Vector rhs = load(0, x) - stiff_c_ * x0 - stiff_b_ * v0;
    const Vector a0 = SpdSolver(m0, opts_).solve(rhs);
    x.col(1) = x0 + tau * v0 + 0.5 * tau * tau * a0;
    require_finite(x.col(1), 1);
  }

  for (int n = 1; n < time_.steps; ++n) {
    const Vector prev = x.col(n - 1);
    const Vector cur = x.col(n);
    Vector rhs = load(n, x);
    Vector guess = 2 * cur - prev;
    if (fixed) {
      rhs += mass_alpha_const_ * ((2 * cur - prev) / (tau * tau));
      rhs += stiff_b_ * (prev / (2 * tau)) - stiff_c_ * (0.5 * prev);
      x.col(n + 1) = solver_fixed->solve(rhs, guess);
    } else {
      const SparseOperator ma = mass_alpha(n);
      rhs += ma * ((2 * cur - prev) / (tau * tau));
      rhs += stiff_b_ * (prev / (2 * tau)) - stiff_c_ * (0.5 * prev);
      const SparseOperator system = ma / (tau * tau) + 0.5 * stiff_c_ + stiff_b_ / (2 * tau);
      x.col(n + 1) = SpdSolver(system, opts_).solve(rhs, guess);
    }
    require_finite(x.col(n + 1), n + 1);
  }
  return x;
}

History ThreeLevelScheme::march_backward(const Load& load) const {
  const int nodes = grid_->node_count();
  const Scalar tau = time_.tau;
  const int last = time_.steps;
  History x = History::Zero(nodes, time_.levels());

  const bool fixed = alpha_->time_independent();
  const SparseOperator system_fixed =
      fixed ? SparseOperator(mass_alpha_const_ / (tau * tau) + 0.5 * stiff_c_ +
                             stiff_b_ / (2 * tau))
            : SparseOperator();
  std::unique_ptr<SpdSolver> solver_fixed;
  if (fixed) solver_fixed = std::make_unique<SpdSolver>(system_fixed, opts_);

  {
    // x^N = x_t^N = 0, so the acceleration at T comes from the load alone.
    const SparseOperator mn = mass_alpha(last);
    const Vector aN = SpdSolver(mn, opts_).solve(load(last, x));
    x.col(last - 1) = 0.5 * tau * tau * aN;
    require_finite(x.col(last - 1), last - 1);
  }

  for (int n = last - 1; n >= 1; --n) {
    const Vector next = x.col(n + 1);
    const Vector cur = x.col(n);
    Vector rhs = load(n, x);
    Vector guess = 2 * cur - next;
    if (fixed) {
      rhs += mass_alpha_const_ * ((2 * cur - next) / (tau * tau));
      rhs += stiff_b_ * (next / (2 * tau)) - stiff_c_ * (0.5 * next);
      x.col(n - 1) = solver_fixed->solve(rhs, guess);
    } else {
      const SparseOperator ma = mass_alpha(n);
      rhs += ma * ((2 * cur - next) / (tau * tau));
      rhs += stiff_b_ * (next / (2 * tau)) - stiff_c_ * (0.5 * next);
      const SparseOperator system = ma / (tau * tau) + 0.5 * stiff_c_ + stiff_b_ / (2 * tau);
      x.col(n - 1) = SpdSolver(system, opts_).solve(rhs, guess);
    }
    require_finite(x.col(n - 1), n - 1);
  }
  return x;
}

// ---------------------------------------------------------------------------

namespace {

/// u_t at level n from levels <= n, second order.
Vector extrapolated_velocity(const History& u, const Vector& v0, int n, Scalar tau) {
  if (n == 0) return v0;
  if (n == 1) return 2 * (u.col(1) - u.col(0)) / tau - v0;
  return (3 * u.col(n) - 4 * u.col(n - 1) + u.col(n - 2)) / (2 * tau);
}

std::vector<Vector> boundary_loads(const Grid& grid, const SourceSpec& src,
                                   const TimeGrid& time) {
  std::vector<Vector> loads(time.levels(), Vector::Zero(grid.node_count()));
  if (!src.boundary.empty()) {
    for (int n = 0; n < time.levels(); ++n) loads[n] = assemble_boundary_load(grid, src.boundary[n]);
  }
  return loads;
}

/// Boundary plus volume load per level.
std::vector<Vector> data_loads(const Grid& grid, const SparseOperator& mass, const SourceSpec& src,
                               const TimeGrid& time) {
  std::vector<Vector> loads = boundary_loads(grid, src, time);
  if (src.volume.size() != 0) {
    for (int n = 0; n < time.levels(); ++n) loads[n] += mass * src.volume.col(n);
  }
  return loads;
}

}  // namespace

WaveTrajectory solve_linearized(const Grid& grid, const CoefficientFields& coeffs,
                                const AlphaCoefficient& alpha, const Reaction& reaction,
                                const SourceSpec& src, const TimeGrid& time,
                                const SpdSolveOptions& opts) {
  src.validate(grid, time);
  if (reaction.kind == Reaction::Kind::linear &&
      (reaction.beta == nullptr || reaction.beta->rows() != grid.node_count() ||
       reaction.beta->cols() != time.levels() || !reaction.beta->allFinite())) {
    throw std::invalid_argument("linear reaction needs a finite beta with nodes x levels entries");
  }
  if (reaction.kind == Reaction::Kind::quadratic) {
    throw std::invalid_argument("solve_linearized takes no quadratic reaction; use solve_state");
  }
  const ThreeLevelScheme scheme(grid, coeffs, alpha, time, opts);
  const std::vector<Vector> loads = data_loads(grid, scheme.unit_mass(), src, time);
  const Vector two_k = 2 * coeffs.k;

  auto load = [&](int n, const History& u) -> Vector {
    Vector r = loads[n];
    if (reaction.kind == Reaction::Kind::linear) {
      const Vector ut = extrapolated_velocity(u, src.u1, n, time.tau);
      r += scheme.unit_mass() *
           two_k.cwiseProduct(reaction.beta->col(n)).cwiseProduct(ut);
    }
    return r;
  };
  return reconstruct_trajectory(scheme.march_forward(src.u0, src.u1, load), src.u1, time);
}

std::pair<WaveTrajectory, PicardReport> solve_state(const Grid& grid, const Vector& phi,
                                                    const MediumParams& mp,
                                                    const AlphaCoefficient& alpha,
                                                    const SourceSpec& src, const TimeGrid& time,
                                                    const StateOptions& opts) {
  src.validate(grid, time);
  if (phi.size() != grid.node_count() || !phi.allFinite()) {
    throw std::invalid_argument("phase field must be finite and match the grid");
  }
  if (!(opts.picard_tol > 0) || opts.picard_tol > 1e-4) {
    throw std::invalid_argument("picard_tol must lie in (0, 1e-4]");
  }
  const CoefficientFields coeffs = interpolate_coefficients(phi, mp);
  const ThreeLevelScheme scheme(grid, coeffs, alpha, time, opts.linear);
  const SparseOperator& mass = scheme.unit_mass();
  const std::vector<Vector> loads = data_loads(grid, mass, src, time);
  const Vector two_k = 2 * coeffs.k;

  PicardReport report;
  WaveTrajectory w = WaveTrajectory::zero(grid, time);
  int growing = 0;
  for (int sweep = 1; sweep <= opts.picard_max; ++sweep) {
    auto load = [&](int n, const History& u) -> Vector {
      const auto wt = w.v.col(n);
      if (opts.semi_lagged) {
        const Vector ut = extrapolated_velocity(u, src.u1, n, time.tau);
        return loads[n] + mass * two_k.cwiseProduct(wt).cwiseProduct(ut);
      }
      return loads[n] + mass * two_k.cwiseProduct(wt.cwiseAbs2());
    };
    WaveTrajectory u =
        reconstruct_trajectory(scheme.march_forward(src.u0, src.u1, load), src.u1, time);

    const Scalar update = u_norm(grid, u - w);
    const Scalar size = u_norm(grid, u);
    report.sweeps = sweep;
    if (!report.updates.empty()) {
      const Scalar prev = report.updates.back();
      report.ratios.push_back(prev > 0 ? update / prev : Scalar(0));
      growing = report.ratios.back() > 1 ? growing + 1 : 0;
    }
    report.updates.push_back(update);
    w = std::move(u);

    if (!std::isfinite(update)) {
      throw DivergenceError("fixed-point divergence: non-finite Picard update at sweep " +
                            std::to_string(sweep));
    }
    if (update <= opts.picard_tol * size) {
      report.converged = true;
      return {std::move(w), std::move(report)};
    }
    if (growing >= 3) {
      throw DivergenceError("fixed-point divergence: Picard updates grew for 3 consecutive "
                            "sweeps (data too large for contraction)");
    }
  }
  throw DivergenceError("fixed-point divergence: no convergence within " +
                        std::to_string(opts.picard_max) + " Picard sweeps");
}

// ---------------------------------------------------------------------------

namespace {

struct H1Operators {
  SparseOperator mass;
  SparseOperator h1;
};

H1Operators h1_operators(const Grid& grid) {
  const Vector ones = Vector::Ones(grid.node_count());
  SparseOperator mass = assemble_weighted_mass(grid, ones);
  SparseOperator h1 = mass + assemble_weighted_stiffness(grid, ones);
  return {std::move(mass), std::move(h1)};
}

Scalar quad_form(const SparseOperator& op, const auto& x) { return x.dot(op * x); }

}  // namespace

Scalar u_norm(const Grid& grid, const WaveTrajectory& traj) {
  const auto ops = h1_operators(grid);
  Scalar sup_u = 0;
  Scalar sup_v = 0;
  Scalar int_a = 0;
  for (int n = 0; n < traj.time.levels(); ++n) {
    sup_u = std::max(sup_u, quad_form(ops.h1, traj.u.col(n)));
    sup_v = std::max(sup_v, quad_form(ops.h1, traj.v.col(n)));
    int_a += traj.time.weight(n) * quad_form(ops.mass, traj.a.col(n));
  }
  return std::sqrt(std::max<Scalar>(0, sup_u + sup_v + int_a));
}

Scalar x_norm(const Grid& grid, const WaveTrajectory& traj) {
  const auto ops = h1_operators(grid);
  Scalar sup_u = 0;
  Scalar int_v = 0;
  for (int n = 0; n < traj.time.levels(); ++n) {
    sup_u = std::max(sup_u, quad_form(ops.h1, traj.u.col(n)));
    int_v += traj.time.weight(n) * quad_form(ops.h1, traj.v.col(n));
  }
  return std::sqrt(std::max<Scalar>(0, sup_u + int_v));
}

std::vector<Scalar> energy_identity_residual(const Grid& grid, const WaveTrajectory& traj,
                                             const CoefficientFields& coeffs,
                                             const AlphaCoefficient& alpha,
                                             const SourceSpec& src, const Reaction& reaction) {
  const TimeGrid& time = traj.time;
  const Scalar tau = time.tau;
  const Vector ones = Vector::Ones(grid.node_count());
  const SparseOperator mass = assemble_weighted_mass(grid, ones);
  const SparseOperator stiff_c = assemble_weighted_stiffness(grid, coeffs.csq);
  const SparseOperator stiff_b = assemble_weighted_stiffness(grid, coeffs.b);
  const std::vector<Vector> loads = data_loads(grid, mass, src, time);
  const Vector two_k = 2 * coeffs.k;

  // Right-hand side exactly as the scheme builds it at level n.
  auto forcing = [&](int n, const Vector& vn) -> Vector {
    Vector r = loads[n];
    switch (reaction.kind) {
      case Reaction::Kind::none:
        break;
      case Reaction::Kind::linear:
        r += mass * two_k.cwiseProduct(reaction.beta->col(n))
                        .cwiseProduct(extrapolated_velocity(traj.u, src.u1, n, tau));
        break;
      case Reaction::Kind::quadratic:
        r += mass * two_k.cwiseProduct(vn.cwiseAbs2());
        break;
    }
    return r;
  };
  // E^{n+1/2} = |w|^2_{M_alpha(t_{n+1/2})} / 2 + (|u^{n+1}|^2_Kc + |u^n|^2_Kc) / 4.
  auto half_energy = [&](int n) {
    const Vector w = (traj.u.col(n + 1) - traj.u.col(n)) / tau;
    const SparseOperator ma = assemble_weighted_mass(grid, alpha.nodal(grid, time.time(n) + 0.5 * tau));
    return 0.5 * quad_form(ma, w) +
           0.25 * (quad_form(stiff_c, traj.u.col(n + 1)) + quad_form(stiff_c, traj.u.col(n)));
  };

  std::vector<Scalar> residual;
  residual.reserve(time.steps - 1);
  Scalar before = half_energy(0);
  for (int n = 1; n < time.steps; ++n) {
    const Scalar after = half_energy(n);
    const Vector vn = (traj.u.col(n + 1) - traj.u.col(n - 1)) / (2 * tau);
    Scalar alpha_t_term = 0;
    if (!alpha.time_independent()) {
      alpha_t_term = 0.5 * quad_form(assemble_weighted_mass(grid, alpha.nodal_dt(grid, time.time(n))), vn);
    }
    residual.push_back((after - before) / tau + quad_form(stiff_b, vn) - alpha_t_term -
                       vn.dot(forcing(n, vn)));
    before = after;
  }
  return residual;
}

}  // namespace lensopt
