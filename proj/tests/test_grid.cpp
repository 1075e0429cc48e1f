#include "lensopt/grid.hpp"
#include "lensopt/linear_solver.hpp"

#include <doctest.h>

#include <Eigen/SparseCore>

#include <cmath>
#include <set>

using namespace lensopt;

namespace {

Scalar total(const SparseOperator& op) {
  Scalar s = 0;
  for (int k = 0; k < op.outerSize(); ++k) {
    for (SparseOperator::InnerIterator it(op, k); it; ++it) s += it.value();
  }
  return s;
}

Scalar asymmetry(const SparseOperator& op) {
  const SparseOperator diff = op - SparseOperator(op.transpose());
  return diff.cwiseAbs().sum();
}

}  // namespace

TEST_CASE("grid counts nodes and boundary nodes") {
  const Grid g2 = build_grid(2, 2, 1.0, 1.0);
  CHECK(g2.node_count() == 9);
  CHECK(g2.boundary_nodes().size() == 8);
  CHECK(build_grid(32, 32, 1.0, 1.0).node_count() == 1089);

  const Grid g = build_grid(5, 3, 2.0, 1.5);
  CHECK(g.boundary_nodes().size() == 16);
  std::set<int> unique(g.boundary_nodes().begin(), g.boundary_nodes().end());
  CHECK(unique.size() == 16);
  for (int n : g.boundary_nodes()) {
    const auto p = g.coord(n);
    const bool on_edge = p.x() == 0 || p.y() == 0 || p.x() == 2.0 || p.y() == 1.5;
    CHECK(on_edge);
  }
}

TEST_CASE("grid rejects degenerate sizes") {
  CHECK_THROWS_AS(build_grid(2, 1, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(4, 4, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(4, 4, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("element connectivity follows the local order") {
  const Grid g = build_grid(3, 2, 1.0, 1.0);
  const auto n = g.element_nodes(1, 1);
  CHECK(n[0] == g.node(1, 1));
  CHECK(n[1] == g.node(2, 1));
  CHECK(n[2] == g.node(1, 2));
  CHECK(n[3] == g.node(2, 2));
}

TEST_CASE("weighted mass integrates the weight") {
  const Grid g = build_grid(4, 4, 1.0, 1.0);
  const Vector one = Vector::Ones(g.node_count());
  CHECK(total(assemble_weighted_mass(g, one)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(total(assemble_weighted_mass(g, 2 * one)) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(assemble_weighted_mass(g, Vector::Zero(g.node_count())).cwiseAbs().sum() == 0.0);

  const Grid r = build_grid(6, 3, 2.0, 0.5);
  const SparseOperator m = assemble_weighted_mass(r, Vector::Ones(r.node_count()));
  CHECK(total(m) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(asymmetry(m) < 1e-15);
  CHECK(lumped_mass(r).sum() == doctest::Approx(1.0).epsilon(1e-14));

  // Bilinear functions and weights are integrated exactly by 2x2 Gauss.
  const Vector x = g.interpolate([](Scalar px, Scalar) { return px; });
  CHECK(x.dot(assemble_weighted_mass(g, one) * x) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(total(assemble_weighted_mass(g, x)) == doctest::Approx(0.5).epsilon(1e-14));
  const Vector xy = g.interpolate([](Scalar px, Scalar py) { return px * py; });
  CHECK(one.dot(assemble_weighted_mass(g, xy) * xy) == doctest::Approx(1.0 / 9).epsilon(1e-14));
}

TEST_CASE("weighted stiffness annihilates constants and is exact on linears") {
  const Grid g = build_grid(7, 5, 1.0, 2.0);
  const Vector one = Vector::Ones(g.node_count());
  const SparseOperator k = assemble_weighted_stiffness(g, one);
  CHECK((k * one).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(asymmetry(k) < 1e-13);
  const Vector lin = g.interpolate([](Scalar x, Scalar y) { return 3 * x - y; });
  CHECK(lin.dot(k * lin) == doctest::Approx(10.0 * 2.0).epsilon(1e-13));
  const Vector w = g.interpolate([](Scalar x, Scalar) { return 1 + x; });
  const Vector x = g.interpolate([](Scalar px, Scalar) { return px; });
  // int_0^1 int_0^2 (1 + x) dy dx = 3
  CHECK(x.dot(assemble_weighted_stiffness(g, w) * x) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("boundary load integrates per side") {
  const Grid g = build_grid(4, 6, 2.0, 3.0);
  const Vector left = assemble_boundary_load(g, BoundaryTrace::uniform(g, 1.0, {Side::left}));
  CHECK(left.sum() == doctest::Approx(3.0).epsilon(1e-14));
  for (int j = 0; j <= g.ny(); ++j) CHECK(left[g.node(1, j)] == 0.0);
  const Vector all = assemble_boundary_load(
      g, BoundaryTrace::uniform(g, 2.0, {Side::left, Side::right, Side::top, Side::bottom}));
  CHECK(all.sum() == doctest::Approx(2 * 10.0).epsilon(1e-14));
  CHECK(assemble_boundary_load(g, BoundaryTrace::zero(g)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("SPD solver reaches the residual target") {
  const Grid g = build_grid(10, 10, 1.0, 1.0);
  const Vector one = Vector::Ones(g.node_count());
  const SparseOperator a = assemble_weighted_mass(g, one) + 0.1 * assemble_weighted_stiffness(g, one);
  const Vector rhs = g.interpolate([](Scalar x, Scalar y) { return std::sin(3 * x) + y * y; });
  for (bool jacobi : {false, true}) {
    const Vector x = solve_spd(a, rhs, 1e-12, jacobi);
    CHECK((a * x - rhs).norm() <= 1e-11 * rhs.norm());
  }
  CHECK(solve_spd(a, Vector::Zero(g.node_count())).norm() == 0.0);
  CHECK_THROWS_AS(solve_spd(a, rhs, 1.0), std::invalid_argument);
}

TEST_CASE("discrete L2 norm of a constant") {
  const Grid g = build_grid(3, 3, 2.0, 2.0);
  const SparseOperator m = assemble_weighted_mass(g, Vector::Ones(g.node_count()));
  CHECK(l2_norm(m, Vector::Constant(g.node_count(), 3.0)) == doctest::Approx(6.0).epsilon(1e-14));
}
