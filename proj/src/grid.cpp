#include "sp2d/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace sp2d {

void detail::retain_freed_buffers() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  mallopt(M_TOP_PAD, 64 << 20);
#endif
}

double GridSpec::wavenumber(std::size_t i) const {
  return std::numbers::pi * static_cast<double>(mode(i)) / half_width;
}

GridSpec build_grid(double half_width, std::size_t n) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw InvalidGrid("half-width must be positive and finite");
  if (n < 8) throw InvalidGrid("grid needs at least 8 points per axis, got " + std::to_string(n));
  if (n % 2 != 0) throw InvalidGrid("grid size must be even, got " + std::to_string(n));
  GridSpec g;
  g.half_width = half_width;
  g.n = n;
  g.spacing = 2.0 * half_width / static_cast<double>(n);
  return g;
}

RealField abs2(const ScalarField& u) {
  RealField out(u.grid(), no_fill);
  for (std::size_t k = 0; k < u.size(); ++k) out[k] = std::norm(u[k]);
  return out;
}

RealField real_part(const ScalarField& u) {
  RealField out(u.grid(), no_fill);
  for (std::size_t k = 0; k < u.size(); ++k) out[k] = u[k].real();
  return out;
}

RealField imag_part(const ScalarField& u) {
  RealField out(u.grid(), no_fill);
  for (std::size_t k = 0; k < u.size(); ++k) out[k] = u[k].imag();
  return out;
}

ScalarField to_complex(const RealField& f) {
  ScalarField out(f.grid(), no_fill);
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = f[k];
  return out;
}

bool all_finite(const RealField& f) {
  for (double v : f.values())
    if (!std::isfinite(v)) return false;
  return true;
}

bool all_finite(const ScalarField& f) {
  for (const cplx& v : f.values())
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

}  // namespace sp2d
