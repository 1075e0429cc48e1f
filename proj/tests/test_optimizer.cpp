#include "lensopt/optimizer.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace lensopt;
using namespace lensopt::testing;

TEST_CASE("stationarity measure examples") {
  const Grid g = build_grid(8, 6, 2.0, 1.5);
  const int n = g.node_count();
  const Vector half = Vector::Constant(n, 0.5);
  CHECK(stationarity_measure(g, half, Vector::Zero(n)) == 0.0);
  CHECK(stationarity_measure(g, Vector::Zero(n), Vector::Constant(n, 2.0)) == 0.0);
  CHECK(stationarity_measure(g, Vector::Ones(n), Vector::Constant(n, -1.0)) == 0.0);
  CHECK(stationarity_measure(g, half, Vector::Ones(n)) == doctest::Approx(0.5 * std::sqrt(3.0)).epsilon(1e-13));
}

TEST_CASE("optimizer config validation") {
  OptimizerConfig c;
  CHECK_NOTHROW(c.validate());
  c.armijo = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.backtrack = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.history_stride = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("a constructed stationary point stops at once") {
  Problem pb = build_problem(small_scenario());
  pb.gl.gamma = 1e-14;
  const Vector phi0 = Vector::Constant(pb.grid.node_count(), 0.5);
  pb.target = evaluate(pb, phi0).state.u;
  OptimizerConfig cfg;
  cfg.stationarity_tol = 1e-10;
  const OptimizeResult r = optimize(phi0, pb, cfg);
  CHECK(r.status == OptimizerStatus::converged);
  CHECK(r.history.back().iteration <= 2);
}

TEST_CASE("interface-only problem coarsens with monotone energy") {
  Scenario sc = small_scenario(10, 8, 0.25);
  sc.source.amplitude = 0;
  sc.target.mode = "zero";
  sc.gl = {0.1, 1.0};
  const Problem pb = build_problem(sc);
  const Vector phi0 = pb.grid.interpolate([](Scalar x, Scalar y) {
    return 0.5 + 0.1 * std::cos(3 * x) * std::cos(2 * y + 0.3);
  });
  OptimizerConfig cfg;
  cfg.max_iterations = 25;
  cfg.stationarity_tol = 1e-12;
  const OptimizeResult r = optimize(phi0, pb, cfg);
  CHECK(r.history.size() >= 2);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    CHECK(r.history[i].objective.total <= r.history[i - 1].objective.total);
    CHECK(r.history[i].objective.tracking == 0.0);
  }
  CHECK(is_feasible(r.phi));
  // Values separate away from 1/2.
  const Scalar spread0 = phi0.maxCoeff() - phi0.minCoeff();
  CHECK(r.phi.maxCoeff() - r.phi.minCoeff() > 2 * spread0);
}

TEST_CASE("optimizer keeps iterates feasible and pins the focus if asked") {
  Scenario sc = small_scenario();
  const Problem pb = build_problem(sc);
  OptimizerConfig cfg;
  cfg.max_iterations = 4;
  cfg.step0 = 1e4;
  cfg.stationarity_tol = 0;
  cfg.pin_focus_to_fluid = true;
  const OptimizeResult r = optimize(interior_phase(pb.grid), pb, cfg);
  CHECK(r.history.size() > 1);
  CHECK(is_feasible(r.phi));
  CHECK(r.history.front().objective.total >= r.history.back().objective.total);
  for (int i = 0; i < r.phi.size(); ++i) {
    if (pb.focus[i] > 0) CHECK(r.phi[i] == 1.0);
  }
  CHECK(r.history.back().objective.tracking < r.history.front().objective.tracking);
}

TEST_CASE("status names") {
  CHECK(to_string(OptimizerStatus::converged) == "converged");
  CHECK(to_string(OptimizerStatus::stalled) == "stalled");
}
