#include "sp2d/nls.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sp2d/poisson.hpp"
#include "sp2d/spectral.hpp"

namespace sp2d {
namespace {

void require_positive_eps(double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("the wave solver needs eps > 0; use the hydrodynamic solver at eps = 0");
}

RealField density_potential(const ScalarField& u, bool smooth, PoissonPath path) {
  RealField rho = abs2(u);
  if (smooth) rho = dealias(rho);
  SolverConfig c;
  c.poisson_path = path;
  return hydro_potential(rho, c);
}

void apply_phase(ScalarField& u, const RealField& P, double factor) {
  for (std::size_t k = 0; k < u.size(); ++k) u[k] *= std::polar(1.0, factor * P[k]);
}

}  // namespace

ScalarField kinetic_step(const ScalarField& u, double dt, double eps) {
  require_positive_eps(eps);
  if (dt == 0.0) return u;
  return propagate_free(u, 0.5 * eps * dt);
}

ScalarField potential_step(const ScalarField& u, double dt, double eps, double lambda, PoissonPath path) {
  require_positive_eps(eps);
  if (lambda == 0.0 || dt == 0.0) return u;
  ScalarField out = u;
  apply_phase(out, density_potential(u, false, path), -lambda * dt / eps);
  return out;
}

std::vector<WaveState> evolve_nls(const ScalarField& u0, const SolverConfig& cfg) {
  require_positive_eps(cfg.epsilon);
  const std::size_t steps = step_count(cfg);
  const double half = -cfg.lambda * 0.5 * cfg.dt / cfg.epsilon;
  const bool coupled = cfg.lambda != 0.0;

  std::vector<WaveState> out;
  WaveState s{0.0, u0, std::nullopt};
  out.push_back(s);
  RealField P = coupled ? density_potential(s.u, cfg.dealias, cfg.poisson_path) : RealField(u0.grid());
  const FreePropagator kinetic(u0.grid(), 0.5 * cfg.epsilon * cfg.dt);
  for (std::size_t k = 1; k <= steps; ++k) {
    ScalarField u = s.u;
    if (coupled) apply_phase(u, P, half);
    Spectrum uh = forward(u);
    kinetic.apply(uh);
    u = inverse_complex(uh);
    if (coupled) {
      // |u| is invariant under the potential sub-flow, so this P also starts the next step.
      P = density_potential(u, cfg.dealias, cfg.poisson_path);
      apply_phase(u, P, half);
    }
    if (!all_finite(u)) throw WaveDiverged("non-finite wave field at t = " + std::to_string(s.t), s);
    s.u = std::move(u);
    s.t = static_cast<double>(k) * cfg.dt;
    const bool keep = (k == steps) || (cfg.sample_every > 0 && k % cfg.sample_every == 0);
    if (keep) out.push_back(s);
  }
  return out;
}

ScalarField madelung_lift(const ScalarField& a, const RealField& phi, double eps) {
  require_positive_eps(eps);
  a.require_same(ScalarField(phi.grid()));
  ScalarField u = a;
  for (std::size_t k = 0; k < u.size(); ++k) u[k] *= std::polar(1.0, phi[k] / eps);
  return u;
}

ScalarField madelung_project(const ScalarField& u, const RealField& psi, double eps) {
  require_positive_eps(eps);
  u.require_same(ScalarField(psi.grid()));
  ScalarField a = u;
  for (std::size_t k = 0; k < a.size(); ++k) a[k] *= std::polar(1.0, -psi[k] / eps);
  return a;
}

double min_resolved_epsilon(const GridSpec& grid, double max_phase_gradient) {
  // local wavelength 2 pi eps / |grad phi| must span at least 8 cells
  return 8.0 * grid.spacing * max_phase_gradient / (2.0 * std::numbers::pi);
}

void check_resolution(const GridSpec& grid, double eps, double max_phase_gradient) {
  const double floor = min_resolved_epsilon(grid, max_phase_gradient);
  if (eps < floor)
    throw ResolutionError("eps = " + std::to_string(eps) + " is below the resolution floor " + std::to_string(floor) +
                          " for this grid");
}

}  // namespace sp2d
