#pragma once

#include "sp2d/dynamics.hpp"
#include "sp2d/grid.hpp"

namespace sp2d {

enum class AmplitudeKind { gaussian, ring, dipole };
enum class PhaseKind { zero, neglog };

struct DataSpec {
  AmplitudeKind amplitude = AmplitudeKind::gaussian;
  double center_x = 0.0;
  double center_y = 0.0;
  double sigma = 1.0;  // standard deviation of |A|^2
  double mass = 1.0;
  // dipole lobes sit at center +- (offset, 0)
  double offset = 1.5;
  PhaseKind phase = PhaseKind::zero;
  double phase_scale = 1.0;
  // first-order amplitude perturbation, a centered Gaussian of this mass and width
  double corrector_mass = 0.0;
  double corrector_sigma = 0.8;
};

// |f|^2 of each profile integrates to the mass.
ScalarField gaussian_amplitude(const GridSpec& g, double cx, double cy, double sigma, double mass);
ScalarField ring_amplitude(const GridSpec& g, double cx, double cy, double sigma, double mass);
ScalarField dipole_amplitude(const GridSpec& g, double cx, double cy, double offset, double sigma, double mass);

ScalarField base_amplitude(const GridSpec& g, const DataSpec& spec);
ScalarField corrector_amplitude(const GridSpec& g, const DataSpec& spec);

// A = A_0 + eps A_1 with the configured phase; rejects data narrower than four cells or
// not decayed to 1e-10 at the boundary.
InitialData make_initial_data(const GridSpec& g, const DataSpec& spec, double eps = 0.0);

}  // namespace sp2d
