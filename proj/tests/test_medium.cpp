#include "lensopt/grid.hpp"
#include "lensopt/medium.hpp"

#include <doctest.h>

#include <cmath>

using namespace lensopt;

TEST_CASE("coefficients interpolate between lens and fluid") {
  const MediumParams mp;
  Vector phi(5);
  phi << 0.0, 1.0, 0.5, 1.3, -0.2;
  const CoefficientFields c = interpolate_coefficients(phi, mp);
  const Scalar cl2 = mp.c_lens * mp.c_lens, cf2 = mp.c_fluid * mp.c_fluid;
  CHECK(c.csq[0] == doctest::Approx(cl2));
  CHECK(c.csq[1] == doctest::Approx(cf2));
  CHECK(c.csq[2] == doctest::Approx(0.5 * (cl2 + cf2)));
  CHECK(c.csq[3] == doctest::Approx(cf2));
  CHECK(c.csq[4] == doctest::Approx(cl2));
  CHECK(c.b[2] == doctest::Approx(0.5 * (mp.b_lens + mp.b_fluid)));
  CHECK(c.k[0] == doctest::Approx(mp.k_lens));
  CHECK(c.k[3] == doctest::Approx(mp.k_fluid));

  const CoefficientDerivatives d = coefficient_derivatives(phi, mp);
  CHECK(d.dcsq[2] == doctest::Approx(cf2 - cl2));
  CHECK(d.db[0] == doctest::Approx(mp.b_fluid - mp.b_lens));
  CHECK(d.dk[1] == doctest::Approx(mp.k_fluid - mp.k_lens));
  CHECK(d.dcsq[3] == 0.0);
  CHECK(d.dk[4] == 0.0);
}

TEST_CASE("medium ordering is validated") {
  MediumParams mp;
  CHECK_NOTHROW(mp.validate());
  mp.c_lens = 2.0;
  CHECK_THROWS_AS(mp.validate(), std::invalid_argument);
  MediumParams neg;
  neg.b_lens = -0.1;
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
  GLParams gl{0.0, 1.0};
  CHECK_THROWS_AS(gl.validate(), std::invalid_argument);
}

TEST_CASE("obstacle potential") {
  CHECK(obstacle_potential(0.0) == 0.0);
  CHECK(obstacle_potential(1.0) == 0.0);
  CHECK(obstacle_potential(0.5) == doctest::Approx(0.125));
  CHECK(obstacle_potential_slope(0.25) == doctest::Approx(0.25));
}

TEST_CASE("GL energy of pure phases and of the ramp") {
  const Grid g = build_grid(16, 16, 1.0, 1.0);
  const GLParams gl{1.0, 1.0};
  CHECK(gl_energy(g, Vector::Zero(g.node_count()), gl) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(gl_energy(g, Vector::Ones(g.node_count()), gl)) < 1e-14);

  // eps/2 * 1 + (1/eps) int_0^1 x (1 - x) / 2 dx = eps/2 + 1/(12 eps)
  const Vector ramp = g.interpolate([](Scalar x, Scalar) { return x; });
  CHECK(gl_energy(g, ramp, gl) == doctest::Approx(7.0 / 12).epsilon(1e-13));
  CHECK(gl_energy(g, ramp, {0.5, 1.0}) == doctest::Approx(0.25 + 1.0 / 6).epsilon(1e-13));
  // Lumped quadrature converges to the same value.
  const Grid fine = build_grid(256, 4, 1.0, 1.0);
  const Vector fine_ramp = fine.interpolate([](Scalar x, Scalar) { return x; });
  CHECK(gl_energy(fine, fine_ramp, gl, PotentialQuadrature::lumped) ==
        doctest::Approx(7.0 / 12).epsilon(1e-4));

  Vector bad = ramp;
  bad[3] = 1.01;
  CHECK_THROWS_AS(gl_energy(g, bad, gl), InfeasibleError);
}

TEST_CASE("GL gradient matches central differences") {
  const Grid g = build_grid(12, 10, 1.0, 1.0);
  const GLParams gl{0.07, 0.3};
  const Vector phi = g.interpolate([](Scalar x, Scalar y) { return 0.5 + 0.3 * std::sin(2 * x + y); });
  const Vector h = g.interpolate([](Scalar x, Scalar y) { return std::cos(3 * x * y) - 0.4; });
  for (auto quad : {PotentialQuadrature::consistent, PotentialQuadrature::lumped}) {
    const Scalar analytic = gl_gradient(g, phi, gl, quad).dot(h);
    const Scalar d = 1e-5;
    const Scalar fd = gl.gamma *
                      (gl_energy(g, phi + d * h, gl, quad) - gl_energy(g, phi - d * h, gl, quad)) / (2 * d);
    CHECK(std::abs(analytic - fd) <= 1e-6 * std::abs(analytic));
  }
}

TEST_CASE("box projection and feasibility") {
  Vector v(4);
  v << -0.5, 0.2, 1.0, 3.0;
  const Vector p = project_box(v);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 0.2);
  CHECK(p[3] == 1.0);
  CHECK_FALSE(is_feasible(v));
  CHECK(is_feasible(p));
}
