#include "lensopt/gamma.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace lensopt;
using namespace lensopt::testing;

namespace {

Vector disk_indicator(const Grid& g, Scalar cx, Scalar cy, Scalar r) {
  return g.interpolate([&](Scalar x, Scalar y) { return std::hypot(x - cx, y - cy) <= r ? 1.0 : 0.0; });
}

}  // namespace

TEST_CASE("threshold uses the >= rule") {
  Vector phi(4);
  phi << 0.7, 0.5, 0.49, 0.0;
  const Vector b = threshold(phi);
  CHECK(b[0] == 1.0);
  CHECK(b[1] == 1.0);
  CHECK(b[2] == 0.0);
  CHECK(threshold(b) == b);
  CHECK(threshold(Vector::Constant(3, 0.7)) == Vector::Ones(3));
  CHECK_THROWS_AS(threshold(phi, 1.0), std::invalid_argument);
}

TEST_CASE("perimeter of simple sets") {
  const Grid g = build_grid(64, 64, 1.0, 1.0);
  const int n = g.node_count();
  CHECK(perimeter_tv(g, Vector::Zero(n)) == 0.0);
  CHECK(perimeter_tv(g, Vector::Ones(n)) == 0.0);

  const Vector square = g.interpolate([](Scalar x, Scalar y) {
    return std::abs(x - 0.5) <= 0.25 && std::abs(y - 0.5) <= 0.25 ? 1.0 : 0.0;
  });
  CHECK(perimeter_tv(g, square) == doctest::Approx(2.0).epsilon(0.02));
  CHECK(perimeter_tv(g, Vector::Ones(n) - square) == perimeter_tv(g, square));

  // A diagonal half plane has length sqrt(2); the bias is confined to the corners.
  const Grid g128 = build_grid(128, 128, 1.0, 1.0);
  const Vector diag = g128.interpolate([](Scalar x, Scalar y) { return y <= x ? 1.0 : 0.0; });
  CHECK(perimeter_tv(g128, diag) == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));

  // Translation by whole cells away from the boundary leaves it unchanged.
  const Scalar p1 = perimeter_tv(g, disk_indicator(g, 0.5, 0.5, 0.2));
  const Scalar p2 = perimeter_tv(g, disk_indicator(g, 0.5 + 3.0 / 64, 0.5 - 5.0 / 64, 0.2));
  CHECK(p1 == doctest::Approx(p2).epsilon(1e-12));

  CHECK_THROWS_AS(perimeter_tv(g, Vector::Constant(n, 0.5)), std::invalid_argument);
}

TEST_CASE("disk perimeter at fine resolution") {
  const Grid g = build_grid(256, 256, 1.0, 1.0);
  const Scalar p = perimeter_tv(g, disk_indicator(g, 0.5, 0.5, 0.25));
  CHECK(p == doctest::Approx(std::numbers::pi / 2).epsilon(0.05));
}

TEST_CASE("one-dimensional profile energy") {
  CHECK(profile_energy(0.1, Vector::Zero(50)) == 0.0);
  CHECK(profile_energy(1.0, Vector::LinSpaced(101, 0, 1)) == doctest::Approx(7.0 / 12).epsilon(1e-12));
  const ProfileResult r = optimal_profile(0.1, 400);
  CHECK(r.energy == doctest::Approx(kProfileConstant).epsilon(0.02));
  CHECK(r.profile[0] == 0.0);
  CHECK(r.profile[399] == 1.0);
  for (int i = 1; i < 400; ++i) CHECK(r.profile[i] >= r.profile[i - 1]);
  // The transition occupies about pi * eps.
  int interior = 0;
  for (int i = 0; i < 400; ++i) interior += r.profile[i] > 0 && r.profile[i] < 1;
  CHECK(interior * (1.0 / 399) == doctest::Approx(std::numbers::pi * 0.1).epsilon(0.05));
  CHECK_THROWS_AS(optimal_profile(0.01, 100), std::invalid_argument);
}

TEST_CASE("sharp objective") {
  Scenario sc = small_scenario();
  sc.target.phi_true = {true, 1.0, {}, 0.0, 1.0, 0.0};
  Problem pb = build_problem(sc);
  const Vector ones = Vector::Ones(pb.grid.node_count());
  CHECK(sharp_objective(pb, ones) == 0.0);

  const Vector disk = disk_indicator(pb.grid, 0.45, 0.5, 0.2);
  const Scalar j1 = sharp_objective(pb, disk);
  pb.gl.gamma *= 2;
  const Scalar j2 = sharp_objective(pb, disk);
  const Scalar perimeter_part = 1e-8 * kProfileConstant * perimeter_tv(pb.grid, disk);
  CHECK(j2 - j1 == doctest::Approx(perimeter_part).epsilon(1e-9));
  CHECK(kProfileConstant == doctest::Approx(0.39269908169872414));
}

TEST_CASE("single-eps sweep gives one row without comparisons") {
  const Problem pb = build_problem(small_scenario());
  OptimizerConfig cfg;
  cfg.max_iterations = 2;
  cfg.step0 = 1e4;
  cfg.stationarity_tol = 0;
  const auto rows = eps_sweep(pb, Vector::Ones(pb.grid.node_count()), {0.1}, cfg);
  REQUIRE(rows.size() == 1);
  CHECK(std::isnan(rows[0].l1_to_previous));
  CHECK(rows[0].phi.size() == pb.grid.node_count());
  CHECK(rows[0].sharp_energy == doctest::Approx(kProfileConstant * rows[0].perimeter));
}

TEST_CASE("a failing eps is recorded and the sweep continues") {
  const Problem pb = build_problem(small_scenario());
  OptimizerConfig cfg;
  cfg.max_iterations = 1;
  cfg.step0 = 1e4;
  const auto rows = eps_sweep(pb, Vector::Ones(pb.grid.node_count()), {0.1, -1.0, 0.05}, cfg);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].status.rfind("failed", 0) == 0);
  CHECK(rows[2].phi.size() == pb.grid.node_count());
}
