#include <cmath>

#include "doctest.h"
#include "npspec/oracles.hpp"

using namespace npspec;
using namespace npspec::oracle;

TEST_CASE("ellipse eigenvalues") {
  auto e = ellipse_eigenvalues(3.0, 3);
  REQUIRE(e.size() == 6);
  CHECK(e[0] == 0.25);
  CHECK(e[1] == -0.25);
  CHECK(e[2] == 0.125);
  CHECK(e[5] == -0.0625);
  // circles have nothing nontrivial
  for (double v : ellipse_eigenvalues(1.0, 4)) CHECK(v == 0.0);
  CHECK(ellipse_eigenvalues(2.0, 0).empty());
  CHECK_THROWS_AS(ellipse_eigenvalues(0.5, 2), ParameterError);
}

TEST_CASE("ellipse polarization tensor") {
  // disk: pi a^2 / lambda on the diagonal
  const cplx l(0.1, 0.01);
  auto d = ellipse_pt(l, 2.0, 2.0);
  CHECK(std::abs(d.m11 - kPi * 4.0 / l) < 1e-13);
  CHECK(std::abs(d.m11 - d.m22) < 1e-14);
  // poles at +-(a - b) / (2 (a + b))
  CHECK_THROWS_AS(ellipse_pt(cplx(0.25, 0.0), 3.0, 1.0), PoleError);
  CHECK_THROWS_AS(ellipse_pt(cplx(-0.25, 0.0), 3.0, 1.0), PoleError);
  CHECK_NOTHROW(ellipse_pt(cplx(0.25, 1e-6), 3.0, 1.0));
  CHECK_THROWS_AS(ellipse_pt(l, -1.0, 1.0), ParameterError);
}

TEST_CASE("bipolar coordinates") {
  auto p = bipolar({3.0, 0.0}, 1.0);
  CHECK(p.psi1 == doctest::Approx(std::log(2.0)));
  CHECK(p.psi2 == 0.0);
  auto q = bipolar({0.0, 1.0}, 1.0);
  CHECK(std::abs(q.psi1) < 1e-15);
  CHECK(q.psi2 == doctest::Approx(-kPi / 2));
  CHECK_THROWS_AS(bipolar({1.0, 0.0}, 1.0), ParameterError);
  CHECK_THROWS_AS(bipolar({1.0, 0.0}, 0.0), ParameterError);
}

TEST_CASE("intersecting disks profile") {
  const Vec2 z{3.0, 2.0};
  CHECK(alpha_disks_analytic(0.3, z, 2.0, kPi / 4) == 0.0);
  CHECK(alpha_disks_analytic(-0.1, z, 2.0, kPi / 4) == 0.5);
  CHECK(alpha_disks_analytic(0.25, z, 2.0, kPi / 4) == 0.75);
  CHECK(alpha_disks_analytic(-0.25, z, 2.0, kPi / 4) == 0.75);
  const double c = 2.0 * std::sin(kPi / 4);
  const double psi2 = std::arg((cplx(3.0, 2.0) + c) / (cplx(3.0, 2.0) - c));
  const double a0 = alpha_disks_analytic(0.0, z, 2.0, kPi / 4);
  CHECK(a0 == doctest::Approx(0.5 * (1.0 + std::abs(psi2) / (kPi / 4))));
  CHECK(a0 > 0.5);
  CHECK(a0 < 1.0);
  CHECK_THROWS_AS(alpha_disks_analytic(0.0, z, 2.0, kPi / 2), ParameterError);
}

TEST_CASE("corner bound") {
  CHECK(corner_bound(kPi / 2) == 0.25);
  CHECK(corner_bound(3 * kPi / 2) == 0.25);
  CHECK(corner_bound(kPi) == 0.0);
  CHECK(corner_bound(kPi / 3) == doctest::Approx(1.0 / 3));
}
