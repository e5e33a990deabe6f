#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "npspec/simd/kernels.hpp"

using namespace npspec::simd;

TEST_CASE("np_row variants agree") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (std::size_t n : {1u, 3u, 4u, 17u, 256u}) {
    std::vector<double> sx(n), sy(n), w(n), a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) sx[k] = u(rng), sy[k] = u(rng), w[k] = std::abs(u(rng)) + 0.1;
    NpRowArgs args{2.5, 0.3, 0.6, 0.8, sx.data(), sy.data(), w.data(), n, a.data()};
    np_row_scalar(args);
    args.out = b.data();
#if defined(__x86_64__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) np_row_avx2(args);
    else np_row_scalar(args);
#else
    np_row_scalar(args);
#endif
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-14 * std::abs(a[k]) + 1e-300);
    args.out = b.data();
    np_row(args);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-14 * std::abs(a[k]) + 1e-300);
  }
}

TEST_CASE("dipole_flux variants agree") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n : {2u, 8u, 31u, 1000u}) {
    std::vector<double> x(n), y(n), nx(n), ny(n), a(n), b(n);
    for (std::size_t j = 0; j < n; ++j) {
      x[j] = u(rng), y[j] = u(rng);
      double t = 3.0 * u(rng);
      nx[j] = std::cos(t), ny[j] = std::sin(t);
    }
    DipoleArgs args{x.data(), y.data(), nx.data(), ny.data(), n, 3.0, 2.0, std::sqrt(0.5), std::sqrt(0.5), a.data()};
    dipole_flux_scalar(args);
    args.out = b.data();
    dipole_flux(args);
    for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(a[j] - b[j]) <= 1e-14 * std::abs(a[j]) + 1e-16);
  }
  CHECK((std::string(active_isa()) == "avx2" || std::string(active_isa()) == "scalar"));
}
