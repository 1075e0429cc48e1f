#include "lensopt/adjoint.hpp"
#include "lensopt/gradient.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace lensopt;
using namespace lensopt::testing;

TEST_CASE("matched target gives the zero adjoint") {
  Problem pb = build_problem(small_scenario());
  const Vector phi = interior_phase(pb.grid);
  const Evaluation ev = evaluate(pb, phi);
  pb.target = ev.state.u;
  const AdjointTrajectory adj = solve_problem_adjoint(pb, phi, ev.state);
  CHECK(adj.p.cwiseAbs().maxCoeff() == 0.0);
  CHECK(adj.q.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adjoint has zero terminal data") {
  const Problem pb = build_problem(small_scenario());
  const Vector phi = interior_phase(pb.grid);
  const Evaluation ev = evaluate(pb, phi);
  const AdjointTrajectory adj = solve_problem_adjoint(pb, phi, ev.state);
  const int last = pb.time.steps;
  CHECK(adj.p.col(last).cwiseAbs().maxCoeff() == 0.0);
  CHECK(adj.q.col(last).cwiseAbs().maxCoeff() == 0.0);
  CHECK(adj.p.cwiseAbs().maxCoeff() > 0.0);
  CHECK(adj.p.allFinite());
}

TEST_CASE("adjoint pairing approaches the tracking derivative under refinement") {
  // PDE part of the adjoint gradient against the tangent solve. The two are
  // discretizations of the same derivative, so the gap is O(h^2 + tau^2).
  auto worst = [](int n, int steps) {
    const Problem pb = build_problem(small_scenario(n, steps, 0.75));
    const Vector phi = interior_phase(pb.grid);
    Evaluation ev;
    const GradientField g = compute_gradient(pb, phi, &ev);
    Scalar w = 0;
    for (Scalar cx : {0.3, 0.5, 0.65}) {
      const Vector h = bump_direction(pb.grid, phi, cx, 0.5);
      const WaveTrajectory sens = solve_sensitivity(pb, phi, h, ev.state);
      w = std::max(w, rel_gap(g.pde().dot(h), tracking_derivative(pb, ev.state, sens)));
    }
    return w;
  };
  const Scalar coarse = worst(12, 24);
  const Scalar fine = worst(24, 48);
  MESSAGE("adjoint-tangent gap " << coarse << " -> " << fine);
  CHECK(coarse < 0.1);
  CHECK(fine < coarse / 2);
}

TEST_CASE("adjoint rejects mismatched targets") {
  const Problem pb = build_problem(small_scenario());
  const Vector phi = interior_phase(pb.grid);
  const Evaluation ev = evaluate(pb, phi);
  const History bad = History::Zero(pb.grid.node_count(), 3);
  CHECK_THROWS_AS(solve_adjoint(pb.grid, phi, pb.medium, pb.alpha, ev.state, bad, pb.focus),
                  std::invalid_argument);
}
