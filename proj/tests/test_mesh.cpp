#include <cmath>

#include "doctest.h"
#include "npspec/mesh.hpp"

using namespace npspec;

TEST_CASE("circle with fixed panels") {
  MeshConfig cfg;
  cfg.panels_per_arc = 10;
  auto m = build_mesh(make_ellipse(1, 1), cfg);
  CHECK(m.size() == 160);
  CHECK(std::abs(m.perimeter() - 2 * kPi) < 1e-13);
  CHECK(std::abs(m.area() - kPi) < 1e-13);
  for (std::size_t j = 0; j < m.size(); ++j) {
    CHECK(m.weight[j] > 0.0);
    CHECK(std::abs(norm(m.normal[j]) - 1.0) < 1e-14);
  }
  auto r = refine_mesh(m, 2);
  CHECK(r.size() == 320);
  CHECK(std::abs(r.perimeter() - 2 * kPi) < 1e-13);
}

TEST_CASE("perimeter converges fast on an ellipse") {
  // 4-point panels so the error is visible before roundoff
  MeshConfig cfg;
  cfg.nodes_per_panel = 4;
  double prev_err = 0.0;
  std::vector<double> orders;
  const double exact = make_ellipse(2, 1).perimeter();
  for (int p : {8, 16, 32}) {
    cfg.panels_per_arc = p;
    double err = std::abs(build_mesh(make_ellipse(2, 1), cfg).perimeter() - exact);
    if (prev_err > 0.0 && err > 1e-14) orders.push_back(std::log2(prev_err / err));
    prev_err = err;
  }
  REQUIRE(!orders.empty());
  CHECK(orders.front() >= 7.0);  // error O(h^8) for four-point panels
}

TEST_CASE("rectangle grading") {
  MeshConfig cfg;
  cfg.corner_levels = 30;
  auto m = build_mesh(make_rectangle(1), cfg);
  REQUIRE(m.corner_zones.size() == 4);
  for (const auto& z : m.corner_zones) {
    int graded = 0;
    for (auto p : z.panels) graded += m.panels[p].level > 0 ? 1 : 0;
    CHECK(graded == 60);
    // lengths halve toward the vertex
    std::vector<double> len;
    for (auto p : z.panels) len.push_back(m.panel_length(p));
    double smallest = *std::min_element(len.begin(), len.end());
    double largest = *std::max_element(len.begin(), len.end());
    CHECK(std::abs(smallest / largest - std::ldexp(1.0, -29)) < 1e-12);
  }
  CHECK(std::abs(m.perimeter() - 4.0) < 1e-12 * 4);
  CHECK(std::abs(m.area() - 1.0) < 1e-12);
  auto r = refine_mesh(m, 2);
  CHECK(r.corner_zones.size() == 4);
  CHECK(std::abs(r.perimeter() - 4.0) < 1e-12 * 4);
}

TEST_CASE("triangle with deep grading") {
  MeshConfig cfg;
  cfg.corner_levels = 40;
  auto m = build_mesh(make_isosceles_triangle(1, 2), cfg);
  CHECK(std::abs(m.perimeter() - 5.0) < 1e-12 * 5);
  for (std::size_t j = 0; j < m.size(); ++j) {
    for (const auto& c : m.curve->corners()) CHECK(norm(m.x[j] - c.vertex) > 0.0);
  }
}

TEST_CASE("mesh is deterministic") {
  MeshConfig cfg;
  cfg.refine_points = {{3, 2}};
  auto a = build_mesh(make_intersecting_disks(2, kPi / 4), cfg);
  auto b = build_mesh(make_intersecting_disks(2, kPi / 4), cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(a.x[j] == b.x[j]);
    CHECK(a.weight[j] == b.weight[j]);
  }
}

TEST_CASE("area of smooth generators") {
  MeshConfig cfg;
  auto e = build_mesh(make_ellipse(3, 1), cfg);
  CHECK(std::abs(e.area() - 3 * kPi) < 1e-12 * 3 * kPi);
  auto s = build_mesh(make_superellipse(30, 10), cfg);
  double exact = 4 * 30 * std::pow(std::tgamma(1.1), 2) / std::tgamma(1.2);
  CHECK(std::abs(s.area() - exact) < 1e-12 * exact);
}

TEST_CASE("mesh config validation") {
  MeshConfig cfg;
  cfg.nodes_per_panel = 3;
  CHECK_THROWS_AS(build_mesh(make_ellipse(1, 1), cfg), ParameterError);
  MeshConfig c2;
  c2.panels_per_arc = 3;
  CHECK_THROWS_AS(build_mesh(make_rectangle(1), c2), MeshingError);
}
