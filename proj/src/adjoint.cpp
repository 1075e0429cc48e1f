#include "lensopt/adjoint.hpp"

#include <stdexcept>

namespace lensopt {

AdjointTrajectory solve_adjoint(const Grid& grid, const Vector& phi, const MediumParams& mp,
                                const AlphaCoefficient& alpha, const WaveTrajectory& state,
                                const History& target, const Vector& focus,
                                const SpdSolveOptions& opts) {
  const TimeGrid& time = state.time;
  const int nodes = grid.node_count();
  if (state.u.rows() != nodes || target.rows() != nodes || target.cols() != time.levels() ||
      focus.size() != nodes || phi.size() != nodes) {
    throw std::invalid_argument("adjoint inputs do not match the grid and time levels");
  }
  const CoefficientFields coeffs = interpolate_coefficients(phi, mp);
  const ThreeLevelScheme scheme(grid, coeffs, alpha, time, opts);
  const SparseOperator& mass = scheme.unit_mass();
  const SparseOperator focus_mass = assemble_weighted_mass(grid, focus);
  const Scalar tau = time.tau;
  const int last = time.steps;

  auto load = [&](int n, const History& p) -> Vector {
    Vector r = focus_mass * (state.u.col(n) - target.col(n));
    if (n == last) return r;
    Vector pt;
    if (n == last - 1) {
      pt = 2 * (p.col(last) - p.col(last - 1)) / tau;
    } else {
      pt = (-3 * p.col(n) + 4 * p.col(n + 1) - p.col(n + 2)) / (2 * tau);
    }
    Vector zeroth = 4 * coeffs.k.cwiseProduct(state.a.col(n));
    Vector first = 4 * coeffs.k.cwiseProduct(state.v.col(n));
    if (!alpha.time_independent()) {
      zeroth += alpha.nodal_dtt(grid, time.time(n));
      first += 2 * alpha.nodal_dt(grid, time.time(n));
    }
    r -= mass * (zeroth.cwiseProduct(p.col(n)) + first.cwiseProduct(pt));
    return r;
  };

  AdjointTrajectory adj{time, scheme.march_backward(load), History::Zero(nodes, time.levels())};
  for (int n = 1; n < last; ++n) adj.q.col(n) = (adj.p.col(n + 1) - adj.p.col(n - 1)) / (2 * tau);
  adj.q.col(0) = (-3 * adj.p.col(0) + 4 * adj.p.col(1) - adj.p.col(2)) / (2 * tau);
  return adj;
}

}  // namespace lensopt
