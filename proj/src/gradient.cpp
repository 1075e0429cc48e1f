#include "lensopt/gradient.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lensopt {

void Problem::validate() const {
  medium.validate();
  gl.validate();
  source.validate(grid, time);
  if (focus.size() != grid.node_count()) throw std::invalid_argument("focus mask does not match grid");
  if (target.rows() != grid.node_count() || target.cols() != time.levels()) {
    throw std::invalid_argument("target trajectory needs nodes x levels entries");
  }
}

Scalar tracking_term(const Problem& problem, const WaveTrajectory& state) {
  const SparseOperator focus_mass = assemble_weighted_mass(problem.grid, problem.focus);
  Scalar sum = 0;
  for (int n = 0; n < problem.time.levels(); ++n) {
    const Vector e = state.u.col(n) - problem.target.col(n);
    sum += problem.time.weight(n) * e.dot(focus_mass * e);
  }
  return std::max<Scalar>(0, 0.5 * sum);
}

Scalar tracking_derivative(const Problem& problem, const WaveTrajectory& state,
                           const WaveTrajectory& direction) {
  const SparseOperator focus_mass = assemble_weighted_mass(problem.grid, problem.focus);
  Scalar sum = 0;
  for (int n = 0; n < problem.time.levels(); ++n) {
    const Vector e = state.u.col(n) - problem.target.col(n);
    sum += problem.time.weight(n) * e.dot(focus_mass * direction.u.col(n));
  }
  return sum;
}

Evaluation evaluate(const Problem& problem, const Vector& phi) {
  if (!is_feasible(phi)) throw InfeasibleError("infeasible phase field: values outside [0, 1]");
  auto [state, report] = solve_state(problem.grid, phi, problem.medium, problem.alpha,
                                     problem.source, problem.time, problem.solver);
  ObjectiveValue obj;
  obj.tracking = tracking_term(problem, state);
  obj.gl = problem.gl.gamma * gl_energy(problem.grid, phi, problem.gl, problem.quadrature);
  obj.total = obj.tracking + obj.gl;
  return {std::move(state), std::move(report), obj};
}

ObjectiveValue evaluate_objective(const Problem& problem, const Vector& phi) {
  return evaluate(problem, phi).objective;
}

WaveTrajectory solve_sensitivity(const Problem& problem, const Vector& phi, const Vector& h,
                                 const WaveTrajectory& state) {
  const Grid& grid = problem.grid;
  const TimeGrid& time = problem.time;
  if (h.size() != grid.node_count() || !h.allFinite()) {
    throw std::invalid_argument("direction must be finite and match the grid");
  }
  const CoefficientFields coeffs = interpolate_coefficients(phi, problem.medium);
  const CoefficientDerivatives d = coefficient_derivatives(phi, problem.medium);
  const ThreeLevelScheme scheme(grid, coeffs, problem.alpha, time, problem.solver.linear);
  const SparseOperator& mass = scheme.unit_mass();
  const SparseOperator stiff_dc = assemble_weighted_stiffness(grid, d.dcsq.cwiseProduct(h));
  const SparseOperator stiff_db = assemble_weighted_stiffness(grid, d.db.cwiseProduct(h));
  const Vector two_dk_h = 2 * d.dk.cwiseProduct(h);
  const Vector four_k = 4 * coeffs.k;

  // Source terms from the coefficient perturbation, aligned with the levels the
  // state scheme uses: averaged u for K_c, centered u_t for K_b and the source.
  std::vector<Vector> base(time.levels());
  for (int n = 0; n < time.steps; ++n) {
    const Vector u_avg = n == 0 ? Vector(state.u.col(0))
                                : Vector(0.5 * (state.u.col(n + 1) + state.u.col(n - 1)));
    const auto vt = state.v.col(n);
    base[n] = -(stiff_dc * u_avg) - stiff_db * vt + mass * two_dk_h.cwiseProduct(vt.cwiseAbs2());
  }

  const Vector zero = Vector::Zero(grid.node_count());
  WaveTrajectory lagged = WaveTrajectory::zero(grid, time);
  const bool coupled = four_k.cwiseAbs().maxCoeff() > 0;
  for (int sweep = 1; sweep <= problem.solver.picard_max; ++sweep) {
    auto load = [&](int n, const History&) -> Vector {
      if (!coupled || n == 0) return base[n];
      return base[n] + mass * four_k.cwiseProduct(state.v.col(n)).cwiseProduct(lagged.v.col(n));
    };
    WaveTrajectory next = reconstruct_trajectory(scheme.march_forward(zero, zero, load), zero, time);
    const Scalar change = (next.u - lagged.u).norm();
    const Scalar size = next.u.norm();
    lagged = std::move(next);
    if (!coupled || change <= problem.solver.picard_tol * size) return lagged;
  }
  throw DivergenceError("sensitivity sweeps did not converge within " +
                        std::to_string(problem.solver.picard_max) + " sweeps");
}

AdjointTrajectory solve_problem_adjoint(const Problem& problem, const Vector& phi,
                                        const WaveTrajectory& state) {
  return solve_adjoint(problem.grid, phi, problem.medium, problem.alpha, state, problem.target,
                       problem.focus, problem.solver.linear);
}

namespace {

/// out_i += scale * int N_i grad f . grad g over the grid.
void add_gradient_product(const Grid& grid, const auto& f, const auto& g, Scalar scale,
                          Vector& out) {
  const auto& ref = grid.pattern().ref;
  for (int ey = 0; ey < grid.ny(); ++ey) {
    for (int ex = 0; ex < grid.nx(); ++ex) {
      const auto nodes = grid.element_nodes(ex, ey);
      std::array<Scalar, 4> fl{}, gl{};
      for (int a = 0; a < 4; ++a) {
        fl[a] = f[nodes[a]];
        gl[a] = g[nodes[a]];
      }
      for (int q = 0; q < 4; ++q) {
        Scalar fx = 0, fy = 0, gx = 0, gy = 0;
        for (int a = 0; a < 4; ++a) {
          fx += fl[a] * ref.grad_x[q][a];
          fy += fl[a] * ref.grad_y[q][a];
          gx += gl[a] * ref.grad_x[q][a];
          gy += gl[a] * ref.grad_y[q][a];
        }
        const Scalar dot = scale * ref.weight * (fx * gx + fy * gy);
        for (int a = 0; a < 4; ++a) out[nodes[a]] += dot * ref.shape[q][a];
      }
    }
  }
}

}  // namespace

GradientField reduced_gradient(const Problem& problem, const Vector& phi,
                               const WaveTrajectory& state, const AdjointTrajectory& adjoint) {
  const Grid& grid = problem.grid;
  const TimeGrid& time = problem.time;
  if (state.u.cols() != time.levels() || adjoint.p.cols() != time.levels() ||
      adjoint.p.rows() != state.u.rows() || state.time.tau != adjoint.time.tau) {
    throw std::invalid_argument("state and adjoint trajectories do not match");
  }
  const CoefficientDerivatives d = coefficient_derivatives(phi, problem.medium);
  const SparseOperator mass = assemble_weighted_mass(grid, Vector::Ones(grid.node_count()));

  const int nodes = grid.node_count();
  Vector grad_u_p = Vector::Zero(nodes);
  Vector grad_v_p = Vector::Zero(nodes);
  Vector vsq_mp = Vector::Zero(nodes);
  for (int n = 0; n < time.levels(); ++n) {
    const Scalar w = time.weight(n);
    const auto p = adjoint.p.col(n);
    if (p.cwiseAbs().maxCoeff() == 0) continue;
    add_gradient_product(grid, state.u.col(n), p, w, grad_u_p);
    add_gradient_product(grid, state.v.col(n), p, w, grad_v_p);
    vsq_mp += w * state.v.col(n).cwiseAbs2().cwiseProduct(mass * p);
  }

  GradientField g;
  g.c = -d.dcsq.cwiseProduct(grad_u_p);
  g.b = -d.db.cwiseProduct(grad_v_p);
  g.k = 2 * d.dk.cwiseProduct(vsq_mp);
  g.gl = gl_gradient(grid, phi, problem.gl, problem.quadrature);
  g.total = g.gl + g.c + g.b + g.k;
  return g;
}

GradientField compute_gradient(const Problem& problem, const Vector& phi, Evaluation* evaluation) {
  Evaluation ev = evaluate(problem, phi);
  const AdjointTrajectory adj = solve_problem_adjoint(problem, phi, ev.state);
  GradientField g = reduced_gradient(problem, phi, ev.state, adj);
  if (evaluation) *evaluation = std::move(ev);
  return g;
}

Scalar fd_directional(const Problem& problem, const Vector& phi, const Vector& h, Scalar delta) {
  if (!(delta > 0)) throw std::invalid_argument("finite-difference step must be positive");
  const Vector plus = phi + delta * h;
  const Vector minus = phi - delta * h;
  if (!is_feasible(plus) || !is_feasible(minus)) {
    throw InfeasibleError("finite-difference probe leaves [0, 1]; shrink delta or h");
  }
  if (h.cwiseAbs().maxCoeff() == 0) return 0;
  return (evaluate_objective(problem, plus).total - evaluate_objective(problem, minus).total) /
         (2 * delta);
}

FdPlateau fd_plateau(const Problem& problem, const Vector& phi, const Vector& h,
                     const std::vector<Scalar>& deltas) {
  if (deltas.empty()) throw std::invalid_argument("need at least one finite-difference step");
  FdPlateau out;
  out.deltas = deltas;
  for (Scalar delta : deltas) out.values.push_back(fd_directional(problem, phi, h, delta));
  out.plateau = out.values.front();
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 1; i < out.values.size(); ++i) {
    const Scalar spread = std::abs(out.values[i] - out.values[i - 1]);
    if (spread < best) {
      best = spread;
      out.spread = spread;
      out.plateau = out.deltas[i] < out.deltas[i - 1] ? out.values[i] : out.values[i - 1];
    }
  }
  return out;
}

Vector smooth_gradient(const Grid& grid, const Vector& load, Scalar sigma) {
  if (!(sigma >= 0)) throw std::invalid_argument("smoothing length must be nonnegative");
  const Vector ones = Vector::Ones(grid.node_count());
  SparseOperator op = assemble_weighted_mass(grid, ones);
  if (sigma > 0) op += (sigma * sigma) * assemble_weighted_stiffness(grid, ones);
  return SpdSolver(op, {1e-13, true, 0}).solve(load);
}

}  // namespace lensopt
