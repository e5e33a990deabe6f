#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "npspec/operators.hpp"

using namespace npspec;

namespace {
PanelMesh circle_mesh(double a, int panels) {
  MeshConfig cfg;
  cfg.panels_per_arc = panels;
  return build_mesh(make_ellipse(a, a), cfg);
}
double theta_of(Vec2 p) { return std::atan2(p.y, p.x); }
}  // namespace

TEST_CASE("circle kernel is constant") {
  auto m = circle_mesh(2.0, 8);
  auto k = assemble_np(m);
  for (Eigen::Index j = 0; j < k.a.rows(); ++j)
    for (Eigen::Index i = 0; i < k.a.cols(); ++i)
      CHECK(std::abs(k.a(j, i) - m.weight[i] / (4 * kPi * 2.0)) < 1e-14);
  // mean-zero density maps to zero, constants to 1/2
  CVector phi(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) phi[j] = std::cos(3 * theta_of(m.x[j]));
  CHECK((k.a * phi).norm() < 1e-12);
  RVector one = RVector::Ones(m.size());
  CHECK(((k.a * one).array() - 0.5).abs().maxCoeff() < 1e-12);
}

TEST_CASE("double layer reproduces the constant") {
  MeshConfig cfg;
  auto m = build_mesh(make_ellipse(3, 1), cfg);
  auto k = assemble_np(m);
  RMatrix dl = double_layer_from(k);
  RVector one = RVector::Ones(m.size());
  CHECK(((dl * one).array() - 0.5).abs().maxCoeff() < 1e-11);
  // adjoint relation W K = A^T W
  RMatrix lhs = RVector(Eigen::Map<const RVector>(m.weight.data(), m.size())).asDiagonal() * dl;
  RMatrix rhs = k.a.transpose() * RVector(Eigen::Map<const RVector>(m.weight.data(), m.size())).asDiagonal();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-13 * lhs.cwiseAbs().maxCoeff());
}

TEST_CASE("single layer on circles") {
  auto m = circle_mesh(1.0, 10);
  auto s = assemble_slp(m);
  RVector one = RVector::Ones(m.size());
  CHECK((s.s * one).cwiseAbs().maxCoeff() < 1e-13);
  CVector c(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) c[j] = std::cos(theta_of(m.x[j]));
  CVector sc = s.s * c;
  CHECK((sc + 0.5 * c).cwiseAbs().maxCoeff() < 1e-13);
  auto m2 = circle_mesh(2.5, 10);
  auto s2 = assemble_slp(m2);
  // (1/2pi) int log|x - y| over a circle of radius a is a log a
  CHECK(((s2.s * RVector::Ones(m2.size())).array() - 2.5 * std::log(2.5)).abs().maxCoeff() < 1e-13);
  Density d{c, &m};
  CHECK(std::abs(star_inner(d, d, s).real() - kPi / 2) < 1e-12);
  CHECK(std::abs(star_norm(d, s) - std::sqrt(kPi / 2)) < 1e-12);
  Density d3{c * cplx(0, 3), &m};
  CHECK(std::abs(star_norm(d3, s) - 3 * std::sqrt(kPi / 2)) < 1e-12);
  Density zero{CVector::Zero(m.size()), &m};
  CHECK(star_norm(zero, s) == 0.0);
  Density other{c, &m2};
  CHECK_THROWS_AS(star_inner(d, other, s), ContractError);
}

TEST_CASE("single layer bilinear form is symmetric on resolved densities") {
  MeshConfig cfg;
  auto m = build_mesh(make_ellipse(3, 1), cfg);
  auto s = assemble_slp(m);
  RVector w = Eigen::Map<const RVector>(m.weight.data(), m.size());
  auto arc = node_arclength(m);
  const double per = m.perimeter();
  double worst = 0.0;
  for (int p = 1; p <= 6; ++p)
    for (int q = 1; q <= 6; ++q) {
      RVector f(m.size()), g(m.size());
      for (std::size_t j = 0; j < m.size(); ++j) {
        f[j] = std::cos(2 * kPi * p * arc[j] / per);
        g[j] = std::sin(2 * kPi * q * arc[j] / per) + 0.3 * std::cos(2 * kPi * q * arc[j] / per);
      }
      double fg = f.dot(w.asDiagonal() * (s.s * g));
      double gf = g.dot(w.asDiagonal() * (s.s * f));
      worst = std::max(worst, std::abs(fg - gf) / std::max(std::abs(fg), 1.0));
    }
  MESSAGE("bilinear asymmetry " << worst);
  CHECK(worst < 1e-13);
}

TEST_CASE("ellipse eigenvalues and Plemelj defect") {
  MeshConfig cfg;
  cfg.panels_per_arc = 24;
  auto m = build_mesh(make_ellipse(3, 1), cfg);
  auto k = assemble_np(m);
  auto ev = np_eigenvalues(k, 20);
  for (int n = 1; n <= 10; ++n) {
    double lam = 0.5 * std::pow(0.5, n);
    CHECK(std::abs(std::abs(ev[2 * n - 2]) - lam) < 1e-13);
    CHECK(std::abs(std::abs(ev[2 * n - 1]) - lam) < 1e-13);
    CHECK(std::abs(ev[2 * n - 2] + ev[2 * n - 1]) < 1e-12);
  }
  auto s = assemble_slp(m);
  double d = plemelj_defect(k, s);
  MESSAGE("plemelj defect " << d);
  CHECK(d < 1e-10);
}

TEST_CASE("circle spectrum is trivial") {
  auto m = circle_mesh(1.0, 8);
  auto ev = np_eigenvalues(assemble_np(m));
  for (double v : ev) CHECK(std::abs(v) < 1e-11);
  auto s = assemble_slp(m);
  CHECK(plemelj_defect(assemble_np(m), s) < 1e-12);
}
