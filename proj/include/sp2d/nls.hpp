#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "sp2d/dynamics.hpp"
#include "sp2d/grid.hpp"

namespace sp2d {

struct WaveState {
  double t = 0.0;
  ScalarField u;
  std::optional<RealField> psi;
};

class WaveDiverged : public std::runtime_error {
 public:
  WaveDiverged(const std::string& what, WaveState last_good)
      : std::runtime_error(what), last_good_(std::move(last_good)) {}
  const WaveState& last_good() const { return last_good_; }

 private:
  WaveState last_good_;
};

// Exact free flow over dt: multiplier exp(-i eps |xi|^2 dt / 2).
ScalarField kinetic_step(const ScalarField& u, double dt, double eps);
// u * exp(-i lambda P dt / eps) with P computed once from |u|^2.
ScalarField potential_step(const ScalarField& u, double dt, double eps, double lambda,
                           PoissonPath path = PoissonPath::fft);

// Strang splitting: half potential, full kinetic, half potential.
std::vector<WaveState> evolve_nls(const ScalarField& u0, const SolverConfig& cfg);

ScalarField madelung_lift(const ScalarField& a, const RealField& phi, double eps);
ScalarField madelung_project(const ScalarField& u, const RealField& psi, double eps);

// Smallest eps for which a phase with gradient bound g keeps 8 samples per wavelength.
double min_resolved_epsilon(const GridSpec& grid, double max_phase_gradient);
void check_resolution(const GridSpec& grid, double eps, double max_phase_gradient);

}  // namespace sp2d
