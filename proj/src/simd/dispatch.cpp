#include <cstdlib>

#include "npspec/simd/kernels.hpp"

namespace npspec::simd {

namespace {

bool use_avx2() {
  static const bool on = [] {
    const char* force = std::getenv("NPSPEC_FORCE_SCALAR");
    if (force && *force && *force != '0') return false;
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
  }();
  return on;
}

}  // namespace

void np_row(const NpRowArgs& a) {
#if defined(__x86_64__) || defined(_M_X64)
  if (use_avx2()) return np_row_avx2(a);
#endif
  np_row_scalar(a);
}

void dipole_flux(const DipoleArgs& a) {
#if defined(__x86_64__) || defined(_M_X64)
  if (use_avx2()) return dipole_flux_avx2(a);
#endif
  dipole_flux_scalar(a);
}

const char* active_isa() { return use_avx2() ? "avx2" : "scalar"; }

}  // namespace npspec::simd
