#include <cmath>

#include "doctest.h"
#include "npspec/quadrature.hpp"
#include "npspec/types.hpp"

using namespace npspec;

TEST_CASE("gauss_legendre small rules") {
  auto g1 = gauss_legendre(1);
  CHECK(g1.nodes[0] == doctest::Approx(0.0));
  CHECK(g1.weights[0] == doctest::Approx(2.0));
  auto g2 = gauss_legendre(2);
  CHECK(std::abs(g2.nodes[0] + 1.0 / std::sqrt(3.0)) < 1e-15);
  CHECK(std::abs(g2.nodes[1] - 1.0 / std::sqrt(3.0)) < 1e-15);
  CHECK(std::abs(g2.weights[0] - 1.0) < 1e-15);
}

TEST_CASE("gauss_legendre 16 integrates monomials") {
  auto g = gauss_legendre(16);
  double sw = 0.0;
  for (double w : g.weights) {
    CHECK(w > 0.0);
    sw += w;
  }
  CHECK(std::abs(sw - 2.0) < 1e-15);
  for (int p = 0; p <= 31; ++p) {
    double s = 0.0;
    for (int i = 0; i < 16; ++i) s += g.weights[i] * std::pow(g.nodes[i], p);
    double exact = (p % 2 == 1) ? 0.0 : 2.0 / (p + 1);
    CHECK(std::abs(s - exact) < 1e-14);
  }
}

TEST_CASE("gauss_legendre range") {
  CHECK_THROWS_AS(gauss_legendre(0), ParameterError);
  CHECK_THROWS_AS(gauss_legendre(65), ParameterError);
  auto g = gauss_legendre(64);
  double sw = 0.0;
  for (double w : g.weights) sw += w;
  CHECK(std::abs(sw - 2.0) < 1e-14);
}

TEST_CASE("interpolation reproduces polynomials") {
  auto g = gauss_legendre(16);
  std::vector<double> to = {-0.9, 0.123, 0.77};
  auto m = interpolation_matrix(g.nodes, to);
  for (int r = 0; r < 3; ++r) {
    double s = 0.0;
    for (int k = 0; k < 16; ++k) s += m(r, k) * std::pow(g.nodes[k], 15);
    CHECK(std::abs(s - std::pow(to[r], 15)) < 1e-13);
  }
}
