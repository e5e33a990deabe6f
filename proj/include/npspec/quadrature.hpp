#pragma once

#include <span>
#include <limits>
#include <vector>

#include "npspec/linalg.hpp"

namespace npspec {

struct GaussRule {
  std::vector<double> nodes;    // ascending, in (-1, 1)
  std::vector<double> weights;  // positive, sum to 2
};

/// Gauss-Legendre rule on [-1, 1]; 1 <= n <= 64.
GaussRule gauss_legendre(int n);

/// Cached rule; the returned reference stays valid for the program lifetime.
const GaussRule& gauss_legendre_cached(int n);

/// Barycentric weights for interpolation through `nodes`.
std::vector<double> barycentric_weights(std::span<const double> nodes);

/// Matrix mapping values at `from` to polynomial interpolant values at `to`.
Eigen::MatrixXd interpolation_matrix(std::span<const double> from, std::span<const double> to);

/// Lagrange basis values l_k(x) for all k.
void lagrange_basis(std::span<const double> nodes, std::span<const double> bary, double x,
                    std::span<double> out);

/// Adaptive Gauss-Legendre integral of f over [a, b] (used for reference
/// values such as arclength; not on any hot path).
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol = 1e-15, int depth = 0) {
  const GaussRule& g = gauss_legendre_cached(16);
  double mag = 0.0;
  auto rule = [&](double lo, double hi) {
    double m = 0.5 * (lo + hi), h = 0.5 * (hi - lo), s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      double v = g.weights[i] * f(m + h * g.nodes[i]);
      s += v;
      mag += std::abs(v) * std::abs(h);
    }
    return s * h;
  };
  double whole = rule(a, b);
  double mid = 0.5 * (a + b);
  double split = rule(a, mid) + rule(mid, b);
  // below ~100 ulps of the integrand magnitude the difference is roundoff
  double floor = 100.0 * std::numeric_limits<double>::epsilon() * mag;
  if (depth > 30 || std::abs(whole - split) <= std::max(tol * std::max(1.0, std::abs(split)), floor))
    return split;
  return integrate_adaptive(f, a, mid, tol, depth + 1) + integrate_adaptive(f, mid, b, tol, depth + 1);
}

}  // namespace npspec
