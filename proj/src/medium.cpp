#include "lensopt/medium.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lensopt {

void MediumParams::validate() const {
  if (!(c_lens > 0 && c_fluid > 0 && b_lens > 0 && b_fluid > 0)) {
    throw std::invalid_argument("sound speeds and diffusivities must be positive");
  }
  if (!(c_lens < c_fluid)) throw std::invalid_argument("medium requires c_lens < c_fluid");
  if (!(b_lens < b_fluid)) throw std::invalid_argument("medium requires b_lens < b_fluid");
  if (!(k_lens < k_fluid)) throw std::invalid_argument("medium requires k_lens < k_fluid");
}

void GLParams::validate() const {
  if (!(eps > 0)) throw std::invalid_argument("interface width eps must be positive");
  if (!(gamma > 0)) throw std::invalid_argument("perimeter weight gamma must be positive");
}

CoefficientFields interpolate_coefficients(const Vector& phi, const MediumParams& mp) {
  const Vector s = project_box(phi);
  const Scalar cl2 = mp.c_lens * mp.c_lens;
  const Scalar cf2 = mp.c_fluid * mp.c_fluid;
  return {
      (cl2 + s.array() * (cf2 - cl2)).matrix(),
      (mp.b_lens + s.array() * (mp.b_fluid - mp.b_lens)).matrix(),
      (mp.k_lens + s.array() * (mp.k_fluid - mp.k_lens)).matrix(),
  };
}

CoefficientDerivatives coefficient_derivatives(const Vector& phi, const MediumParams& mp) {
  const Vector inside =
      phi.unaryExpr([](Scalar s) { return (s >= 0 && s <= 1) ? Scalar(1) : Scalar(0); });
  return {
      inside * (mp.c_fluid * mp.c_fluid - mp.c_lens * mp.c_lens),
      inside * (mp.b_fluid - mp.b_lens),
      inside * (mp.k_fluid - mp.k_lens),
  };
}

bool is_feasible(const Vector& phi) {
  return phi.size() == 0 || (phi.allFinite() && phi.minCoeff() >= 0 && phi.maxCoeff() <= 1);
}

namespace {

void require_feasible(const Grid& grid, const Vector& phi) {
  if (phi.size() != grid.node_count()) throw std::invalid_argument("phase field does not match grid");
  if (!is_feasible(phi)) throw InfeasibleError("infeasible phase field: values outside [0, 1]");
}

}  // namespace

Scalar gl_energy(const Grid& grid, const Vector& phi, const GLParams& glp,
                 PotentialQuadrature quad) {
  glp.validate();
  require_feasible(grid, phi);
  const Vector ones = Vector::Ones(grid.node_count());
  const SparseOperator stiff = assemble_weighted_stiffness(grid, ones);
  const Scalar gradient_part = 0.5 * glp.eps * phi.dot(stiff * phi);

  Scalar potential = 0;
  if (quad == PotentialQuadrature::consistent) {
    const SparseOperator mass = assemble_weighted_mass(grid, ones);
    const Vector m_phi = mass * phi;
    potential = 0.5 * m_phi.sum() - 0.5 * phi.dot(m_phi);
  } else {
    const Vector lumped = lumped_mass(grid);
    for (int i = 0; i < phi.size(); ++i) potential += lumped[i] * obstacle_potential(phi[i]);
  }
  // Roundoff can push a pure phase a hair below zero.
  return std::max<Scalar>(0, gradient_part + potential / glp.eps);
}

Vector gl_gradient(const Grid& grid, const Vector& phi, const GLParams& glp,
                   PotentialQuadrature quad) {
  glp.validate();
  require_feasible(grid, phi);
  const Vector ones = Vector::Ones(grid.node_count());
  const SparseOperator stiff = assemble_weighted_stiffness(grid, ones);
  const Vector slope = phi.unaryExpr([](Scalar s) { return obstacle_potential_slope(s); });
  Vector potential_load;
  if (quad == PotentialQuadrature::consistent) {
    potential_load = assemble_weighted_mass(grid, ones) * slope;
  } else {
    potential_load = lumped_mass(grid).cwiseProduct(slope);
  }
  return glp.gamma * (glp.eps * (stiff * phi) + potential_load / glp.eps);
}

}  // namespace lensopt
