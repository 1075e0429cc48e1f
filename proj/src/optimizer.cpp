#include "lensopt/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lensopt {

void OptimizerConfig::validate() const {
  if (!(step0 > 0)) throw std::invalid_argument("optimizer step0 must be positive");
  if (!(armijo > 0 && armijo < 1)) throw std::invalid_argument("armijo constant must lie in (0, 1)");
  if (!(backtrack > 0 && backtrack < 1)) throw std::invalid_argument("backtrack factor must lie in (0, 1)");
  if (!(step_growth >= 1)) throw std::invalid_argument("step growth must be at least 1");
  if (max_iterations < 0 || max_backtracks < 1) throw std::invalid_argument("bad iteration limits");
  if (!(stationarity_tol >= 0)) throw std::invalid_argument("stationarity tolerance must be >= 0");
  if (!(smoothing >= 0)) throw std::invalid_argument("smoothing length must be >= 0");
  if (history_stride < 1) throw std::invalid_argument("history stride must be >= 1");
}

std::string to_string(OptimizerStatus status) {
  switch (status) {
    case OptimizerStatus::converged: return "converged";
    case OptimizerStatus::iteration_limit: return "iteration_limit";
    case OptimizerStatus::line_search_failed: return "line_search_failed";
    case OptimizerStatus::stalled: return "stalled";
  }
  return "unknown";
}

Scalar stationarity_measure(const Grid& grid, const Vector& phi, const Vector& representative) {
  const Vector r = phi - project_box(phi - representative);
  return l2_norm(assemble_weighted_mass(grid, Vector::Ones(grid.node_count())), r);
}

OptimizeResult optimize(const Vector& phi0, const Problem& problem, const OptimizerConfig& cfg) {
  cfg.validate();
  problem.validate();
  const Grid& grid = problem.grid;
  const SparseOperator mass = assemble_weighted_mass(grid, Vector::Ones(grid.node_count()));

  Vector pinned = Vector::Zero(grid.node_count());
  if (cfg.pin_focus_to_fluid) pinned = (problem.focus.array() > 0).cast<Scalar>().matrix();
  auto admissible = [&](const Vector& x) -> Vector {
    Vector y = project_box(x);
    for (int i = 0; i < y.size(); ++i) {
      if (pinned[i] > 0) y[i] = 1;
    }
    return y;
  };

  if (!is_feasible(phi0)) throw InfeasibleError("initial phase field is infeasible");
  OptimizeResult result;
  result.phi = admissible(phi0);

  Evaluation ev = evaluate(problem, result.phi);
  GradientField grad =
      reduced_gradient(problem, result.phi, ev.state, solve_problem_adjoint(problem, result.phi, ev.state));

  auto representative = [&](const GradientField& g) {
    Vector rep = smooth_gradient(grid, g.total, cfg.smoothing);
    for (int i = 0; i < rep.size(); ++i) {
      if (pinned[i] > 0) rep[i] = 0;
    }
    return rep;
  };

  Scalar step = cfg.step0;
  Scalar last_step = 0;
  Vector rep = representative(grad);
  Vector prev_phi, prev_rep;
  for (int it = 0;; ++it) {
    const Scalar stat = stationarity_measure(grid, result.phi, rep);
    if (it == 0) result.first_stationarity = stat;
    result.final_stationarity = stat;
    const bool done = stat <= cfg.stationarity_tol || it >= cfg.max_iterations;
    if (it % cfg.history_stride == 0 || done) {
      result.history.push_back({it, ev.objective, stat, last_step, ev.report.sweeps});
    }
    if (stat <= cfg.stationarity_tol) {
      result.status = OptimizerStatus::converged;
      break;
    }
    if (it >= cfg.max_iterations) {
      result.status = OptimizerStatus::iteration_limit;
      break;
    }

    if (cfg.barzilai_borwein && prev_phi.size() != 0) {
      const Vector dphi = result.phi - prev_phi;
      const Vector drep = rep - prev_rep;
      const Scalar curvature = dphi.dot(mass * drep);
      if (curvature > 0) step = dphi.dot(mass * dphi) / curvature;
    }

    bool accepted = false;
    bool any_descent = false;
    Vector trial;
    Evaluation trial_ev;
    for (int b = 0; b < cfg.max_backtracks; ++b, step *= cfg.backtrack) {
      trial = admissible(result.phi - step * rep);
      const Scalar decrease = grad.total.dot(trial - result.phi);
      if (!(decrease < 0)) continue;
      any_descent = true;
      try {
        trial_ev = evaluate(problem, trial);
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " (optimizer iteration " +
                              std::to_string(it + 1) + ", step " + std::to_string(step) + ")");
      }
      if (trial_ev.objective.total <= ev.objective.total + cfg.armijo * decrease) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      result.status = any_descent ? OptimizerStatus::line_search_failed : OptimizerStatus::stalled;
      break;
    }

    prev_phi = result.phi;
    prev_rep = rep;
    result.phi = std::move(trial);
    ev = std::move(trial_ev);
    grad = reduced_gradient(problem, result.phi, ev.state,
                            solve_problem_adjoint(problem, result.phi, ev.state));
    rep = representative(grad);
    last_step = step;
    step *= cfg.step_growth;
  }
  return result;
}

}  // namespace lensopt
