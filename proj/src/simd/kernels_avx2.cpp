#include "npspec/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstdlib>

#include "npspec/types.hpp"

namespace npspec::simd {

__attribute__((target("avx2,fma"))) void np_row_avx2(const NpRowArgs& a) {
  const __m256d c = _mm256_set1_pd(1.0 / (2.0 * kPi));
  const __m256d tx = _mm256_set1_pd(a.tx), ty = _mm256_set1_pd(a.ty);
  const __m256d nx = _mm256_set1_pd(a.nx), ny = _mm256_set1_pd(a.ny);
  std::size_t k = 0;
  for (; k + 4 <= a.n; k += 4) {
    __m256d dx = _mm256_sub_pd(tx, _mm256_loadu_pd(a.sx + k));
    __m256d dy = _mm256_sub_pd(ty, _mm256_loadu_pd(a.sy + k));
    __m256d r2 = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
    __m256d num = _mm256_fmadd_pd(dx, nx, _mm256_mul_pd(dy, ny));
    __m256d v = _mm256_div_pd(_mm256_mul_pd(c, num), r2);
    _mm256_storeu_pd(a.out + k, _mm256_mul_pd(v, _mm256_loadu_pd(a.w + k)));
  }
  if (k < a.n) {
    NpRowArgs rest = a;
    rest.sx += k, rest.sy += k, rest.w += k, rest.out += k, rest.n -= k;
    np_row_scalar(rest);
  }
}

__attribute__((target("avx2,fma"))) void dipole_flux_avx2(const DipoleArgs& a) {
  const __m256d c = _mm256_set1_pd(1.0 / (2.0 * kPi));
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d zx = _mm256_set1_pd(a.zx), zy = _mm256_set1_pd(a.zy);
  const __m256d dx = _mm256_set1_pd(a.dx), dy = _mm256_set1_pd(a.dy);
  std::size_t j = 0;
  for (; j + 4 <= a.n; j += 4) {
    __m256d rx = _mm256_sub_pd(_mm256_loadu_pd(a.x + j), zx);
    __m256d ry = _mm256_sub_pd(_mm256_loadu_pd(a.y + j), zy);
    __m256d nx = _mm256_loadu_pd(a.nx + j), ny = _mm256_loadu_pd(a.ny + j);
    __m256d r2 = _mm256_fmadd_pd(rx, rx, _mm256_mul_pd(ry, ry));
    __m256d rd = _mm256_fmadd_pd(rx, dx, _mm256_mul_pd(ry, dy));
    __m256d dn = _mm256_fmadd_pd(dx, nx, _mm256_mul_pd(dy, ny));
    __m256d rn = _mm256_fmadd_pd(rx, nx, _mm256_mul_pd(ry, ny));
    __m256d t1 = _mm256_div_pd(dn, r2);
    __m256d t2 = _mm256_div_pd(_mm256_mul_pd(two, _mm256_mul_pd(rd, rn)), _mm256_mul_pd(r2, r2));
    _mm256_storeu_pd(a.out + j, _mm256_mul_pd(c, _mm256_sub_pd(t1, t2)));
  }
  if (j < a.n) {
    DipoleArgs rest = a;
    rest.x += j, rest.y += j, rest.nx += j, rest.ny += j, rest.out += j, rest.n -= j;
    dipole_flux_scalar(rest);
  }
}

}  // namespace npspec::simd

#endif
