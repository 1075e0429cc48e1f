#pragma once

#include "lensopt/grid.hpp"
#include "lensopt/types.hpp"

namespace lensopt {

/// Lens (l) and fluid (f) material constants. Requires c_l < c_f, b_l < b_f,
/// k_l < k_f and positive speeds and diffusivities.
struct MediumParams {
  Scalar c_lens = 1.0;
  Scalar c_fluid = 1.5;
  Scalar b_lens = 0.01;
  Scalar b_fluid = 0.02;
  Scalar k_lens = 0.5;
  Scalar k_fluid = 1.0;

  void validate() const;
};

/// Nodal c^2, b and k.
struct CoefficientFields {
  Vector csq;
  Vector b;
  Vector k;
};

/// Nodal derivatives of c^2, b and k with respect to the phase field.
struct CoefficientDerivatives {
  Vector dcsq;
  Vector db;
  Vector dk;
};

/// Interface width eps and perimeter weight gamma, both positive.
struct GLParams {
  Scalar eps = 0.05;
  Scalar gamma = 1e-3;

  void validate() const;
};

/// How the potential integral int Psi0(phi) is evaluated. `consistent`
/// integrates Psi0 of the bilinear interpolant exactly (it is quadratic, so the
/// unit mass matrix does it); `lumped` uses row-summed mass weights at nodes.
enum class PotentialQuadrature { consistent, lumped };

/// c^2 = c_l^2 + clamp(phi, 0, 1) (c_f^2 - c_l^2), likewise b and k. The clamp
/// is the flat extension outside [0, 1].
CoefficientFields interpolate_coefficients(const Vector& phi, const MediumParams& mp);

/// Slopes of the clamped interpolation: the contrast inside [0, 1], zero outside.
CoefficientDerivatives coefficient_derivatives(const Vector& phi, const MediumParams& mp);

/// Psi0(s) = s (1 - s) / 2 and its derivative.
inline Scalar obstacle_potential(Scalar s) { return 0.5 * s * (1 - s); }
inline Scalar obstacle_potential_slope(Scalar s) { return 0.5 - s; }

/// True when every entry lies in [0, 1].
bool is_feasible(const Vector& phi);

/// Ginzburg-Landau energy (eps/2) |grad phi|^2 + Psi(phi)/eps integrated over
/// the grid. Throws InfeasibleError outside [0, 1], where the obstacle is +inf.
Scalar gl_energy(const Grid& grid, const Vector& phi, const GLParams& glp,
                 PotentialQuadrature quad = PotentialQuadrature::consistent);

/// Nodal load G with <G, h> = gamma eps phi^T K h + (gamma / eps) int Psi0'(phi) h,
/// the exact derivative of gamma * gl_energy.
Vector gl_gradient(const Grid& grid, const Vector& phi, const GLParams& glp,
                   PotentialQuadrature quad = PotentialQuadrature::consistent);

/// Pointwise projection onto the admissible box.
template <typename Derived>
auto project_box(const Eigen::MatrixBase<Derived>& field) {
  return field.cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
}

}  // namespace lensopt
