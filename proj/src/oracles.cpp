#include "npspec/oracles.hpp"

#include <cmath>

namespace npspec::oracle {

std::vector<double> ellipse_eigenvalues(double r, int n_max) {
  if (!(r >= 1.0)) throw ParameterError("aspect ratio must be >= 1");
  if (n_max < 0) throw ParameterError("n_max must be >= 0");
  std::vector<double> out;
  const double q = (r - 1.0) / (r + 1.0);
  for (int n = 1; n <= n_max; ++n) {
    const double l = 0.5 * std::pow(q, n);
    out.push_back(l);
    out.push_back(-l);
  }
  return out;
}

Diag2 ellipse_pt(cplx lambda, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw ParameterError("ellipse axes must be positive");
  const cplx d1 = (2.0 * lambda - 1.0) * a + (2.0 * lambda + 1.0) * b;
  const cplx d2 = (2.0 * lambda - 1.0) * b + (2.0 * lambda + 1.0) * a;
  const double tol = 1e-14 * (a + b) * std::max(1.0, std::abs(lambda));
  if (std::abs(d1) <= tol || std::abs(d2) <= tol) throw PoleError("lambda is a pole of the ellipse polarization tensor");
  const double num = 2.0 * kPi * a * b * (a + b);
  return {num / d1, num / d2};
}

BipolarPoint bipolar(Vec2 z, double c) {
  if (!(c > 0.0)) throw ParameterError("focus distance must be positive");
  const cplx w(z.x, z.y);
  if (std::abs(w - c) == 0.0 || std::abs(w + c) == 0.0) throw ParameterError("point is at a focus");
  const cplx l = std::log((w + c) / (w - c));
  return {l.real(), l.imag()};
}

double alpha_disks_analytic(double t, Vec2 z, double a, double theta0) {
  if (!(theta0 > 0.0 && theta0 < kPi / 2)) throw ParameterError("theta0 must lie in (0, pi/2)");
  // interior corner angle 2 pi - 2 theta0
  const double b = corner_bound(2.0 * kPi - 2.0 * theta0);
  const double at = std::abs(t);
  if (t == 0.0) return 0.5 * (1.0 + std::abs(bipolar(z, a * std::sin(theta0)).psi2) / theta0);
  if (std::abs(at - b) <= 1e-12) return 0.75;
  if (at < b) return 0.5;
  return 0.0;
}

double corner_bound(double interior_angle) { return 0.5 * std::abs(1.0 - interior_angle / kPi); }

}  // namespace npspec::oracle
