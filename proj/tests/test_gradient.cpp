#include "lensopt/gradient.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace lensopt;
using namespace lensopt::testing;

TEST_CASE("zero data gives zero PDE gradient parts") {
  Scenario sc = small_scenario();
  sc.source.amplitude = 0;
  sc.target.mode = "zero";
  const Problem pb = build_problem(sc);
  const Vector phi = interior_phase(pb.grid);
  const GradientField g = compute_gradient(pb, phi);
  CHECK(g.c.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.b.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.k.cwiseAbs().maxCoeff() == 0.0);
  CHECK((g.gl - gl_gradient(pb.grid, phi, pb.gl)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("three gradient evaluations agree") {
  // Sensitivity and finite differences share the discrete forward map; the
  // adjoint gradient only agrees up to discretization error.
  auto gaps = [](int n, int steps) {
    const Problem pb = build_problem(small_scenario(n, steps, 0.75));
    const Vector phi = interior_phase(pb.grid);
    Evaluation ev;
    const GradientField g = compute_gradient(pb, phi, &ev);
    const Vector h = bump_direction(pb.grid, phi);
    const Scalar adjoint = g.total.dot(h);
    const Scalar tangent =
        tracking_derivative(pb, ev.state, solve_sensitivity(pb, phi, h, ev.state)) + g.gl.dot(h);
    const FdPlateau fd = fd_plateau(pb, phi, h);
    CHECK(fd.values.size() == 3);
    CHECK(rel_gap(tangent, fd.plateau) < 1e-6);
    return rel_gap(adjoint, fd.plateau);
  };
  const Scalar coarse = gaps(12, 24);
  const Scalar fine = gaps(24, 48);
  CHECK(coarse < 0.1);
  CHECK(fine < coarse / 2);
}

TEST_CASE("objective parts add up and vanish at the synthetic truth") {
  Scenario sc = small_scenario();
  const Problem pb = build_problem(sc);
  const Vector truth = rasterize(pb.grid, sc.target.phi_true);
  const ObjectiveValue at_truth = evaluate_objective(pb, truth);
  CHECK(at_truth.tracking == 0.0);
  const ObjectiveValue v = evaluate_objective(pb, interior_phase(pb.grid));
  CHECK(v.tracking > 0);
  CHECK(v.total == doctest::Approx(v.tracking + v.gl));
}

TEST_CASE("finite differences refuse infeasible probes") {
  const Problem pb = build_problem(small_scenario());
  const Vector ones = Vector::Ones(pb.grid.node_count());
  CHECK_THROWS_AS(fd_directional(pb, ones, ones, 1e-3), InfeasibleError);
  CHECK_THROWS_AS(evaluate(pb, 1.5 * ones), InfeasibleError);
}

TEST_CASE("gradient representatives") {
  const Grid g = build_grid(10, 10, 1.0, 1.0);
  const Vector load = g.interpolate([](Scalar x, Scalar y) { return std::sin(4 * x) * y; });
  const SparseOperator m = assemble_weighted_mass(g, Vector::Ones(g.node_count()));
  const Vector l2 = smooth_gradient(g, load, 0.0);
  CHECK((m * l2 - load).norm() < 1e-11 * load.norm());
  // The H1 representative is smoother: smaller Dirichlet energy per unit pairing.
  const SparseOperator k = assemble_weighted_stiffness(g, Vector::Ones(g.node_count()));
  const Vector h1 = smooth_gradient(g, load, 0.2);
  CHECK(h1.dot(k * h1) / load.dot(h1) < l2.dot(k * l2) / load.dot(l2));
}
