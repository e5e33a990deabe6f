#include <cmath>

#include "doctest.h"
#include "npspec/geometry.hpp"

using namespace npspec;

namespace {
double law_of_cosines_apex(double s1, double s2) { return std::acos((2 * s2 * s2 - s1 * s1) / (2 * s2 * s2)); }
}  // namespace

TEST_CASE("ellipse and circle") {
  auto c = make_ellipse(1, 1);
  CHECK(c.corners().empty());
  CHECK(std::abs(c.perimeter() - 2 * kPi) < 1e-13);
  CHECK(std::abs(c.area() - kPi) < 1e-13);
  auto e = make_ellipse(3, 1);
  CHECK(std::abs(e.area() - 3 * kPi) < 1e-12 * 3 * kPi);
  CHECK(std::abs(e.total_turning() - 2 * kPi) < 1e-10);
  CHECK_THROWS_AS(make_ellipse(0, 1), InvalidGeometry);
  CHECK_THROWS_AS(make_ellipse(1, -1), InvalidGeometry);
  CHECK(essential_bound(e) == 0.0);
}

TEST_CASE("superellipse") {
  auto s = make_superellipse(1, 2);
  CHECK(std::abs(s.area() - kPi) < 1e-12);
  auto t = make_superellipse(30, 10);
  CHECK(t.corners().empty());
  CHECK(std::abs(t.total_turning() - 2 * kPi) < 1e-10);
  // area of |x/r|^k + |y|^k = 1 is 4 r Gamma(1+1/k)^2 / Gamma(1+2/k)
  double exact = 4 * 30 * std::pow(std::tgamma(1.1), 2) / std::tgamma(1.2);
  CHECK(std::abs(t.area() - exact) < 1e-12 * exact);
  CHECK_THROWS_AS(make_superellipse(1, 1.5), InvalidGeometry);
}

TEST_CASE("rectangle") {
  auto r = make_rectangle(1);
  CHECK(r.corners().size() == 4);
  CHECK(std::abs(r.area() - 1) < 1e-14);
  CHECK(essential_bound(r) == doctest::Approx(0.25));
  auto r30 = make_rectangle(30);
  CHECK(std::abs(r30.area() - 1) < 1e-13);
  CHECK(std::abs(r30.total_turning() - 2 * kPi) < 1e-10);
  auto swapped = make_rectangle(0.5);
  CHECK(std::abs(swapped.area() - 1) < 1e-14);
}

TEST_CASE("isosceles triangle") {
  auto t = make_isosceles_triangle(1, 2);
  double apex = law_of_cosines_apex(1, 2);
  CHECK(std::abs(apex - 0.5054) < 1e-4);
  CHECK(std::abs(0.5 * (1 - apex / kPi) - 0.4196) < 1e-4);
  CHECK(std::abs(0.5 * (1 - 0.5 * (kPi - apex) / kPi) - 0.2902) < 1e-4);
  CHECK(std::abs(essential_bound(t) - 0.5 * (1 - apex / kPi)) < 1e-14);
  CHECK(std::abs(t.perimeter() - 5) < 1e-13);
  auto eq = make_isosceles_triangle(1, 1);
  CHECK(std::abs(essential_bound(eq) - 1.0 / 3.0) < 1e-14);
  auto obtuse = make_isosceles_triangle(1.9, 1);
  double a = law_of_cosines_apex(1.9, 1), base = 0.5 * (kPi - a);
  CHECK(std::abs(essential_bound(obtuse) - 0.5 * (1 - base / kPi)) < 1e-14);
  CHECK_THROWS_AS(make_isosceles_triangle(2, 1), InvalidGeometry);
}

TEST_CASE("intersecting disks") {
  auto d = make_intersecting_disks(2, kPi / 4);
  REQUIRE(d.corners().size() == 2);
  CHECK(std::abs(std::abs(d.corners()[0].vertex.x) - std::sqrt(2.0)) < 1e-14);
  CHECK(std::abs(essential_bound(d) - 0.25) < 1e-14);
  CHECK(std::abs(d.total_turning() - 2 * kPi) < 1e-10);
  // union of two disks: 2 pi a^2 minus the lens overlap
  double a = 2, t0 = kPi / 4, h = a * std::cos(t0);
  double half_angle = std::acos(h / a);
  double segment = a * a * (half_angle - std::sin(half_angle) * std::cos(half_angle));
  double exact = 2 * kPi * a * a - 2 * segment;
  CHECK(std::abs(d.area() - exact) < 1e-12 * exact);
  auto d2 = make_intersecting_disks(1, kPi / 3);
  CHECK(std::abs(std::abs(d2.corners()[0].vertex.x) - std::sqrt(3.0) / 2) < 1e-15);
  CHECK_THROWS_AS(make_intersecting_disks(1, kPi / 2), InvalidGeometry);
  CHECK(!d.contains({3, 2}));
  CHECK(d.contains({0, 0}));
}

TEST_CASE("perturbed ellipse") {
  auto p = make_perturbed_ellipse(7.0 / 3.0, kPi / 2, 0.05);
  REQUIRE(p.corners().size() == 1);
  CHECK(std::abs(essential_bound(p) - 0.25) < 1e-14);
  CHECK(std::abs(p.total_turning() - 2 * kPi) < 1e-10);
  CHECK(p.is_simple());
  // vertex on the minor axis
  auto q = make_perturbed_ellipse(3.0 / 7.0, kPi / 2, 0.05);
  CHECK(q.is_simple());
  CHECK(std::abs(q.total_turning() - 2 * kPi) < 1e-10);
  CHECK(q.corners()[0].vertex.x > 3.0 / 7.0);
  CHECK_THROWS_AS(make_perturbed_ellipse(0.0, kPi / 2, 0.05), InvalidGeometry);
  CHECK_THROWS_AS(make_perturbed_ellipse(1, kPi, 0.05), InvalidGeometry);
  CHECK_THROWS_AS(make_perturbed_ellipse(2, kPi / 2, 0.3), InvalidGeometry);
}

TEST_CASE("essential bound invariance") {
  auto t = make_isosceles_triangle(1, 2);
  auto moved = t.transformed(0.7, 3.5, {1.0, -2.0});
  CHECK(std::abs(essential_bound(t) - essential_bound(moved)) < 1e-15);
  CHECK(std::abs(moved.area() - 3.5 * 3.5 * t.area()) < 1e-12 * moved.area());
}
