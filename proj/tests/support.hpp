#pragma once

#include "lensopt/scenario.hpp"

namespace lensopt::testing {

/// Small pulse-through-lens scenario that runs in well under a second.
inline Scenario small_scenario(int n = 12, int steps = 16, Scalar final_time = 0.5) {
  Scenario sc;
  sc.nx = n;
  sc.ny = n;
  sc.final_time = final_time;
  sc.time_step = final_time / steps;
  sc.source.amplitude = 0.5;
  sc.gl = {0.1, 1e-8};
  sc.target.phi_true = {false, 1.0, {Region::Kind::disk, {0.45, 0.5}, 0.15, {}, {}}, 0.0, 1.0, 0.0};
  return sc;
}

/// Smooth phase field strictly inside (0, 1).
inline Vector interior_phase(const Grid& grid) {
  return rasterize(grid, {false, 1.0, {Region::Kind::disk, {0.45, 0.5}, 0.2, {}, {}}, 0.3, 0.8, 0.2});
}

/// Smooth bump direction vanishing where phi touches the box.
inline Vector bump_direction(const Grid& grid, const Vector& phi, Scalar cx = 0.4, Scalar cy = 0.55) {
  const Vector bump = grid.interpolate([&](Scalar x, Scalar y) {
    return std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / 0.02);
  });
  return bump.cwiseProduct((4 * phi.array() * (1 - phi.array())).matrix());
}

inline Scalar rel_gap(Scalar a, Scalar b) {
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

}  // namespace lensopt::testing
