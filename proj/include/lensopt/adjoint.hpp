#pragma once

#include "lensopt/grid.hpp"
#include "lensopt/medium.hpp"
#include "lensopt/state.hpp"
#include "lensopt/types.hpp"

namespace lensopt {

/// Adjoint state p^n and q^n ~ p_t on the state's time levels, with
/// p^N = q^N = 0 exactly.
struct AdjointTrajectory {
  TimeGrid time;
  History p;
  History q;
};

/// Backward solve of
///
///   alpha p_tt - div(c^2 grad p) + div(b grad p_t)
///     = -(4 k u_tt + alpha_tt) p - 2 (alpha_t + 2 k u_t) p_t + (u - u_d) chi_D,
///
/// with natural boundary conditions and zero data at t = T. The zeroth and
/// first-order couplings use p and p_t at the known level n (p_t from a
/// one-sided second-order stencil), so each step is the state's SPD solve.
/// `focus` is the nodal indicator of D; `target` holds u_d for every level.
AdjointTrajectory solve_adjoint(const Grid& grid, const Vector& phi, const MediumParams& mp,
                                const AlphaCoefficient& alpha, const WaveTrajectory& state,
                                const History& target, const Vector& focus,
                                const SpdSolveOptions& opts = {});

}  // namespace lensopt
