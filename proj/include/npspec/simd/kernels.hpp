#pragma once

#include <cstddef>

namespace npspec::simd {

/// Row of the double-layer adjoint kernel for one target:
///   out[k] = ((tx - sx[k]) nx + (ty - sy[k]) ny) / (2 pi |t - s_k|^2) * w[k].
/// Coincident points produce non-finite values; callers overwrite the diagonal.
struct NpRowArgs {
  double tx, ty, nx, ny;
  const double* sx;
  const double* sy;
  const double* w;
  std::size_t n;
  double* out;
};

/// Normal derivative of a dipole potential at many boundary points:
///   out[j] = n_j . grad q(x_j),  q(x) = d.(x - z) / (2 pi |x - z|^2).
struct DipoleArgs {
  const double* x;
  const double* y;
  const double* nx;
  const double* ny;
  std::size_t n;
  double zx, zy, dx, dy;
  double* out;
};

void np_row_scalar(const NpRowArgs& a);
void dipole_flux_scalar(const DipoleArgs& a);

#if defined(__x86_64__) || defined(_M_X64)
void np_row_avx2(const NpRowArgs& a);
void dipole_flux_avx2(const DipoleArgs& a);
#endif

/// Runtime-dispatched entry points. The AVX2 path is used when the CPU
/// supports AVX2 and FMA and NPSPEC_FORCE_SCALAR is unset.
void np_row(const NpRowArgs& a);
void dipole_flux(const DipoleArgs& a);

/// Name of the kernel family chosen by dispatch ("avx2" or "scalar").
const char* active_isa();

}  // namespace npspec::simd
