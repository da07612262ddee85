#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sp2d/grid.hpp"
#include "sp2d/poisson.hpp"
#include "sp2d/spectral.hpp"

namespace sp2d {

enum class PoissonPath { fft, direct };

struct SolverConfig {
  double epsilon = 0.0;
  double lambda = 0.0;
  double dt = 1e-3;
  double T = 0.0;
  bool dealias = true;
  PoissonPath poisson_path = PoissonPath::fft;
  // Keep every k-th step in the returned trajectory (0 keeps only the endpoints).
  std::size_t sample_every = 0;
};

void validate(const SolverConfig& cfg);
std::size_t step_count(const SolverConfig& cfg);

struct HydroState {
  double t = 0.0;
  ScalarField a;
  VectorField2 v;
  RealField phi;
  // Analytic radial far field carried by phi (and by v through its gradient).
  RadialTail tail;
};

using Trajectory = std::vector<HydroState>;

class SolverDiverged : public std::runtime_error {
 public:
  SolverDiverged(const std::string& what, HydroState last_good)
      : std::runtime_error(what), last_good_(std::move(last_good)) {}
  const HydroState& last_good() const { return last_good_; }

 private:
  HydroState last_good_;
};

struct InitialData {
  ScalarField A;
  RealField Phi;
  RadialTail phase_tail;
};

HydroState initial_state(const InitialData& data);

struct HydroRates {
  ScalarField da;
  VectorField2 dv;
};

HydroRates hydro_rhs(const HydroState& state, const SolverConfig& cfg);

// Potential of |a|^2 through the configured path, normalized to vanish at the origin.
RealField hydro_potential(const RealField& density, const SolverConfig& cfg);
// Integrand of the phase reconstruction, |v|^2/2 + lambda P.
RealField phase_source(const HydroState& state, const SolverConfig& cfg);

// Lawson RK4 for the amplitude (the linear dispersive term is integrated exactly in
// Fourier space), classical RK4 for the velocity, trapezoid rule for the phase.
class HydroIntegrator {
 public:
  HydroIntegrator(SolverConfig cfg, double mass);

  // Advances the state in place by dt (which may be negative).
  void advance(HydroState& state, double dt);
  std::size_t propagator_applications() const { return propagator_applications_; }

 private:
  struct Evaluation {
    Spectrum na_hat;
    VectorField2 nv;
    RealField ndiv;
    RealField source;
  };
  Evaluation evaluate(const ScalarField& a, const Spectrum& a_hat, const VectorField2& v, const RadialTail& tail,
                      const RealField& div) const;
  void propagate(Spectrum& s, double tau);
  void check_cfl(const HydroState& state, double dt) const;

  SolverConfig cfg_;
  double tail_rate_;
  std::vector<FreePropagator> propagators_;
  std::size_t propagator_applications_ = 0;
  // Stage-one evaluation, spectrum and velocity divergence of the state produced by the last advance.
  std::optional<Evaluation> cached_;
  std::optional<Spectrum> cached_hat_;
  std::optional<RealField> cached_div_;
  double cached_t_ = 0.0;
};

HydroState hydro_step(const HydroState& state, const SolverConfig& cfg);
Trajectory evolve_hydro(const InitialData& data, const SolverConfig& cfg);

// Trapezoid accumulation over the trajectory samples, starting from Phi.
std::vector<RealField> reconstruct_phase(const Trajectory& traj, const RealField& Phi, const SolverConfig& cfg);

// Time derivative of a phase far field driven by -(c_dot grad(u) . grad(w) + lambda P),
// where lambda P contributes the Gaussian growth rate.
RadialTail tail_rate(const RadialTail& u, const RadialTail& w, double c_dot, double rate);

double curl_residual(const VectorField2& v, const RadialTail& tail);
// max over |x| = R of |phi - Phi| / log<x>
double phase_growth_ratio(const RealField& phi, const RealField& Phi, double radius);

}  // namespace sp2d
