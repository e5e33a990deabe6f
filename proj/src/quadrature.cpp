#include "npspec/quadrature.hpp"

#include <array>
#include <cmath>
#include <mutex>

#include "npspec/types.hpp"

namespace npspec {

GaussRule gauss_legendre(int n) {
  if (n < 1 || n > 64) throw ParameterError("gauss_legendre: n must lie in [1, 64]");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-17) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

const GaussRule& gauss_legendre_cached(int n) {
  static std::array<GaussRule, 65> cache;
  static std::array<std::once_flag, 65> flags;
  if (n < 1 || n > 64) throw ParameterError("gauss_legendre: n must lie in [1, 64]");
  std::call_once(flags[n], [n] { cache[n] = gauss_legendre(n); });
  return cache[n];
}

std::vector<double> barycentric_weights(std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> w(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) w[j] /= (nodes[j] - nodes[k]);
  return w;
}

void lagrange_basis(std::span<const double> nodes, std::span<const double> bary, double x,
                    std::span<double> out) {
  const std::size_t n = nodes.size();
  double denom = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double d = x - nodes[k];
    if (d == 0.0) {
      for (std::size_t j = 0; j < n; ++j) out[j] = (j == k) ? 1.0 : 0.0;
      return;
    }
    out[k] = bary[k] / d;
    denom += out[k];
  }
  for (std::size_t k = 0; k < n; ++k) out[k] /= denom;
}

Eigen::MatrixXd interpolation_matrix(std::span<const double> from, std::span<const double> to) {
  auto bary = barycentric_weights(from);
  Eigen::MatrixXd m(to.size(), from.size());
  std::vector<double> row(from.size());
  for (std::size_t i = 0; i < to.size(); ++i) {
    lagrange_basis(from, bary, to[i], row);
    for (std::size_t k = 0; k < from.size(); ++k) m(i, k) = row[k];
  }
  return m;
}

}  // namespace npspec
