#pragma once

#include "lensopt/adjoint.hpp"
#include "lensopt/grid.hpp"
#include "lensopt/medium.hpp"
#include "lensopt/state.hpp"
#include "lensopt/types.hpp"

#include <vector>

namespace lensopt {

/// Everything needed to evaluate the reduced objective j_eps(phi): the wave
/// problem, the focal region D as a nodal indicator, and the target u_d.
struct Problem {
  Grid grid;
  TimeGrid time;
  MediumParams medium;
  GLParams gl;
  AlphaCoefficient alpha = AlphaCoefficient::constant(1.0);
  SourceSpec source;
  Vector focus;    // chi_D at the nodes
  History target;  // u_d, nodes x levels
  StateOptions solver;
  PotentialQuadrature quadrature = PotentialQuadrature::consistent;

  void validate() const;
};

/// Tracking misfit, weighted interface energy and their sum.
struct ObjectiveValue {
  Scalar tracking = 0;  // 1/2 int_0^T int_D (u - u_d)^2
  Scalar gl = 0;        // gamma * E_eps(phi)
  Scalar total = 0;
};

/// Nodal derivative load G with <G, h> ~ j_eps'(phi) h, kept as its parts.
struct GradientField {
  Vector gl;
  Vector c;
  Vector b;
  Vector k;
  Vector total;

  Vector pde() const { return c + b + k; }
};

/// A solved state together with its objective value.
struct Evaluation {
  WaveTrajectory state;
  PicardReport report;
  ObjectiveValue objective;
};

/// Trapezoidal-in-time, D-masked tracking term of a trajectory.
Scalar tracking_term(const Problem& problem, const WaveTrajectory& state);

/// J_0'(u) w = int_0^T int_D (u - u_d) w, same quadrature as tracking_term.
Scalar tracking_derivative(const Problem& problem, const WaveTrajectory& state,
                           const WaveTrajectory& direction);

Evaluation evaluate(const Problem& problem, const Vector& phi);
ObjectiveValue evaluate_objective(const Problem& problem, const Vector& phi);

/// Linearized state u* = S'(phi) h with zero initial data. Discretized as the
/// exact tangent of the state scheme; the 4 k u_t u*_t coupling is lagged by
/// sweeps the same way the state lags its quadratic source.
WaveTrajectory solve_sensitivity(const Problem& problem, const Vector& phi, const Vector& h,
                                 const WaveTrajectory& state);

/// Adjoint of the problem's tracking term at the given state.
AdjointTrajectory solve_problem_adjoint(const Problem& problem, const Vector& phi,
                                        const WaveTrajectory& state);

/// Gradient inequality integrand assembled at the nodes:
///   -dcsq_i int N_i grad u . grad p - db_i int N_i grad u_t . grad p
///   + 2 dk_i u_t^2 (M p)_i, integrated in time by the trapezoidal rule,
/// plus the Ginzburg-Landau load.
GradientField reduced_gradient(const Problem& problem, const Vector& phi,
                               const WaveTrajectory& state, const AdjointTrajectory& adjoint);

/// Convenience: state, adjoint and gradient at phi.
GradientField compute_gradient(const Problem& problem, const Vector& phi,
                               Evaluation* evaluation = nullptr);

/// Central difference (j(phi + delta h) - j(phi - delta h)) / (2 delta).
/// Throws InfeasibleError if a probe leaves [0, 1].
Scalar fd_directional(const Problem& problem, const Vector& phi, const Vector& h, Scalar delta);

struct FdPlateau {
  std::vector<Scalar> deltas;
  std::vector<Scalar> values;
  Scalar plateau = 0;  // value at the smaller step of the most stable pair
  Scalar spread = 0;   // |difference| within that pair, a noise estimate
};

/// Central differences over a list of steps, picking the plateau value.
FdPlateau fd_plateau(const Problem& problem, const Vector& phi, const Vector& h,
                     const std::vector<Scalar>& deltas = {1e-3, 1e-4, 1e-5});

/// Riesz representative: solves (sigma^2 K + M) g = G. sigma = 0 gives M^{-1} G.
Vector smooth_gradient(const Grid& grid, const Vector& load, Scalar sigma);

}  // namespace lensopt
