#include "sp2d/initial_data.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sp2d/errors.hpp"

namespace sp2d {
namespace {

constexpr double kPi = std::numbers::pi;

void require_width(const GridSpec& g, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("profile width must be positive");
  if (sigma < 4.0 * g.spacing)
    throw ResolutionError("sigma = " + std::to_string(sigma) + " spans fewer than four cells (h = " +
                          std::to_string(g.spacing) + ")");
}

double boundary_max(const ScalarField& f) {
  const GridSpec& g = f.grid();
  double m = 0.0;
  for (std::size_t k = 0; k < g.n; ++k) {
    m = std::max({m, std::abs(f(k, 0)), std::abs(f(0, k)), std::abs(f(k, g.n - 1)), std::abs(f(g.n - 1, k))});
  }
  return m;
}

ScalarField gaussian_lobe(const GridSpec& g, double cx, double cy, double sigma, double c) {
  return ScalarField::generate(g, [&](double x, double y) {
    const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
    return cplx(c * std::exp(-r2 / (4.0 * sigma * sigma)));
  });
}

}  // namespace

ScalarField gaussian_amplitude(const GridSpec& g, double cx, double cy, double sigma, double mass) {
  if (mass < 0.0) throw InvalidArgument("mass must be >= 0");
  return gaussian_lobe(g, cx, cy, sigma, std::sqrt(mass / (2.0 * kPi * sigma * sigma)));
}

ScalarField ring_amplitude(const GridSpec& g, double cx, double cy, double sigma, double mass) {
  if (mass < 0.0) throw InvalidArgument("mass must be >= 0");
  const double c = std::sqrt(mass / (16.0 * kPi * sigma * sigma));
  return ScalarField::generate(g, [&](double x, double y) {
    const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
    return cplx(c * (r2 / (sigma * sigma)) * std::exp(-r2 / (4.0 * sigma * sigma)));
  });
}

ScalarField dipole_amplitude(const GridSpec& g, double cx, double cy, double offset, double sigma, double mass) {
  if (mass < 0.0) throw InvalidArgument("mass must be >= 0");
  if (offset == 0.0) throw InvalidArgument("dipole offset must be nonzero");
  const double overlap = 1.0 - std::exp(-offset * offset / (2.0 * sigma * sigma));
  const double c = std::sqrt(mass / (4.0 * kPi * sigma * sigma * overlap));
  ScalarField f = gaussian_lobe(g, cx - offset, cy, sigma, c);
  f -= gaussian_lobe(g, cx + offset, cy, sigma, c);
  return f;
}

ScalarField base_amplitude(const GridSpec& g, const DataSpec& spec) {
  require_width(g, spec.sigma);
  switch (spec.amplitude) {
    case AmplitudeKind::gaussian:
      return gaussian_amplitude(g, spec.center_x, spec.center_y, spec.sigma, spec.mass);
    case AmplitudeKind::ring:
      return ring_amplitude(g, spec.center_x, spec.center_y, spec.sigma, spec.mass);
    case AmplitudeKind::dipole:
      return dipole_amplitude(g, spec.center_x, spec.center_y, spec.offset, spec.sigma, spec.mass);
  }
  throw InvalidArgument("unknown amplitude profile");
}

ScalarField corrector_amplitude(const GridSpec& g, const DataSpec& spec) {
  if (spec.corrector_mass == 0.0) return ScalarField(g);
  require_width(g, spec.corrector_sigma);
  return gaussian_amplitude(g, spec.center_x, spec.center_y, spec.corrector_sigma, spec.corrector_mass);
}

InitialData make_initial_data(const GridSpec& g, const DataSpec& spec, double eps) {
  if (!(eps >= 0.0)) throw InvalidArgument("eps must be >= 0");
  InitialData d{base_amplitude(g, spec), RealField(g), {}};
  if (eps != 0.0 && spec.corrector_mass != 0.0) d.A.add_scaled(cplx(eps), corrector_amplitude(g, spec));
  const double edge = boundary_max(d.A);
  if (edge > 1e-10) throw ResolutionError("amplitude is " + std::to_string(edge) + " at the boundary; enlarge L");
  if (spec.phase == PhaseKind::neglog) {
    d.phase_tail = RadialTail{-spec.phase_scale, 0.0};
    d.Phi = sample_tail(g, d.phase_tail);
  }
  return d;
}

}  // namespace sp2d
