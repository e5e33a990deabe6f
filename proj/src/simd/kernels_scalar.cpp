#include "npspec/simd/kernels.hpp"

#include "npspec/types.hpp"

namespace npspec::simd {

void np_row_scalar(const NpRowArgs& a) {
  const double c = 1.0 / (2.0 * kPi);
  for (std::size_t k = 0; k < a.n; ++k) {
    double dx = a.tx - a.sx[k], dy = a.ty - a.sy[k];
    a.out[k] = c * (dx * a.nx + dy * a.ny) / (dx * dx + dy * dy) * a.w[k];
  }
}

void dipole_flux_scalar(const DipoleArgs& a) {
  const double c = 1.0 / (2.0 * kPi);
  for (std::size_t j = 0; j < a.n; ++j) {
    double rx = a.x[j] - a.zx, ry = a.y[j] - a.zy;
    double r2 = rx * rx + ry * ry;
    double rd = rx * a.dx + ry * a.dy;
    double dn = a.dx * a.nx[j] + a.dy * a.ny[j];
    double rn = rx * a.nx[j] + ry * a.ny[j];
    a.out[j] = c * (dn / r2 - 2.0 * rd * rn / (r2 * r2));
  }
}

}  // namespace npspec::simd
