#pragma once

#include "lensopt/gradient.hpp"
#include "lensopt/optimizer.hpp"
#include "lensopt/types.hpp"

#include <numbers>
#include <string>
#include <vector>

namespace lensopt {

/// Profile constant of the double obstacle potential: int_0^1 sqrt(2 Psi0) = pi/8.
inline constexpr Scalar kProfileConstant = std::numbers::pi / 8;

/// Nodal indicator phi >= level (ties go to 1). Entries are exactly 0 or 1.
Vector threshold(const Vector& phi, Scalar level = 0.5);

/// Perimeter of {phi = 1} inside the domain. The indicator is first smoothed
/// by a separable discrete Gaussian one cell wide (edge values replicated),
/// then measured by the isotropic total variation with gradients at cell
/// centres. Plain TV of the staircase overestimates a circle by about 6%; the
/// smoothing brings that under 1% at 64^2 and finer, and costs O(h) at
/// corners. Throws std::invalid_argument for non-binary input.
Scalar perimeter_tv(const Grid& grid, const Vector& binary);

/// tracking(S(binary)) + gamma * pi/8 * perimeter_tv(binary).
Scalar sharp_objective(const Problem& problem, const Vector& binary);

/// L1 distance of two nodal fields (lumped mass quadrature).
Scalar l1_distance(const Grid& grid, const Vector& a, const Vector& b);

/// 1D Ginzburg-Landau energy of nodal values on [0, length] with linear
/// elements, the potential integrated exactly.
Scalar profile_energy(Scalar eps, const Vector& values, Scalar length = 1.0);

struct ProfileResult {
  Scalar energy = 0;
  Vector profile;
  int sweeps = 0;
};

/// Minimizes the 1D energy over [0, length] with phi(0) = 0, phi(length) = 1
/// and 0 <= phi <= 1 by projected successive over-relaxation. Requires at
/// least 20 nodes per eps. Throws SolverError if the sweeps stall.
ProfileResult optimal_profile(Scalar eps, int nodes, Scalar length = 1.0);

inline Scalar optimal_profile_energy(Scalar eps, int nodes, Scalar length = 1.0) {
  return optimal_profile(eps, nodes, length).energy;
}

struct SweepRow {
  Scalar eps = 0;
  Scalar j_eps = 0;          // diffuse objective at the optimizer output
  Scalar gl_energy = 0;      // E_eps(phi_eps)
  Scalar perimeter = 0;      // P(threshold(phi_eps))
  Scalar sharp_energy = 0;   // pi/8 * perimeter
  Scalar j0 = 0;             // sharp objective of the thresholded field
  Scalar l1_to_previous = 0; // NaN on the first row
  std::string status;
  Vector phi;
};

/// Optimizes j_eps for each eps in turn (warm-started from the previous
/// result unless `warm_start` is false) and tabulates the diffuse and sharp
/// quantities. A failing eps is recorded in its row and the sweep continues.
std::vector<SweepRow> eps_sweep(const Problem& problem, const Vector& phi0,
                                const std::vector<Scalar>& eps_list, const OptimizerConfig& cfg,
                                bool warm_start = true);

}  // namespace lensopt
