#pragma once

#include "lensopt/gradient.hpp"
#include "lensopt/types.hpp"

#include <string>
#include <vector>

namespace lensopt {

struct OptimizerConfig {
  Scalar step0 = 1.0;
  Scalar armijo = 1e-4;        // c1 in (0, 1)
  Scalar backtrack = 0.5;      // in (0, 1)
  Scalar step_growth = 2.0;    // accepted step is reused times this factor
  int max_iterations = 100;
  int max_backtracks = 30;
  Scalar stationarity_tol = 1e-6;
  Scalar smoothing = 0.0;      // sigma of the H1 representative, 0 = L2
  bool barzilai_borwein = false;
  int history_stride = 1;
  /// Pin phi = 1 on the focal region (fluid-only focus).
  bool pin_focus_to_fluid = false;

  void validate() const;
};

struct IterateRecord {
  int iteration = 0;
  ObjectiveValue objective;
  Scalar stationarity = 0;
  Scalar step = 0;
  int picard_sweeps = 0;
};

enum class OptimizerStatus { converged, iteration_limit, line_search_failed, stalled };

std::string to_string(OptimizerStatus status);

struct OptimizeResult {
  Vector phi;
  std::vector<IterateRecord> history;
  OptimizerStatus status = OptimizerStatus::iteration_limit;
  Scalar first_stationarity = 0;
  Scalar final_stationarity = 0;
};

/// ||phi - P(phi - g)|| in the discrete L2 norm, where g is the descent
/// representative of the gradient. Zero exactly at points of the discrete
/// variational inequality.
Scalar stationarity_measure(const Grid& grid, const Vector& phi, const Vector& representative);

/// Projected-gradient descent on j_eps over the box with Armijo backtracking
/// along the projection arc. Every accepted iterate is feasible and the
/// objective history is non-increasing.
OptimizeResult optimize(const Vector& phi0, const Problem& problem, const OptimizerConfig& cfg);

}  // namespace lensopt
