#include "sp2d/dynamics.hpp"

#include <cmath>
#include <initializer_list>
#include <numbers>
#include <string>

namespace sp2d {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double l2(const RealField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return std::sqrt(s * f.grid().cell_area());
}

double max_speed(const VectorField2& v) {
  double m = 0.0;
  for (std::size_t k = 0; k < v.x.size(); ++k) m = std::max(m, std::hypot(v.x[k], v.y[k]));
  return m;
}

RadialTail shifted(const RadialTail& t, double c, const RadialTail& rate) {
  RadialTail out = t;
  out.add_scaled(c, rate);
  return out;
}

Spectrum combined(const Spectrum& a, double ca, const Spectrum& b, double cb) {
  Spectrum out{a.grid, a.half, AlignedVector<cplx>(a.data.size())};
  for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] = ca * a.data[k] + cb * b.data[k];
  return out;
}

RealField combined(const RealField& a, std::initializer_list<std::pair<double, const RealField*>> terms) {
  RealField out = a;
  for (const auto& [c, f] : terms) out.add_scaled(c, *f);
  return out;
}

// Transport term -v.grad a - a div(v)/2 before dealiasing, the velocity rate
// -grad(|v|^2/2 + lambda P) with its divergence, and the phase source without its analytic far field. For curl-free v the
// gradient form equals -(v.grad)v - lambda grad P and keeps v an exact spectral gradient.
struct NonlinearTerms {
  ScalarField na;
  VectorField2 dv;
  RealField ddiv;
  RealField source;
};

NonlinearTerms nonlinear_terms(const ScalarField& a, const Spectrum& a_hat, const VectorField2& v,
                               const RadialTail& tail, const RealField& div, const SolverConfig& cfg);

}  // namespace

void validate(const SolverConfig& cfg) {
  if (!(cfg.epsilon >= 0.0) || !std::isfinite(cfg.epsilon)) throw InvalidArgument("epsilon must be >= 0");
  if (!std::isfinite(cfg.lambda)) throw InvalidArgument("lambda must be finite");
  if (!(cfg.dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (!(cfg.T >= 0.0)) throw InvalidArgument("T must be >= 0");
}

std::size_t step_count(const SolverConfig& cfg) {
  validate(cfg);
  const double q = cfg.T / cfg.dt;
  const double r = std::round(q);
  if (std::abs(q - r) > 1e-9 * std::max(1.0, q))
    throw InvalidArgument("T must be an integer multiple of dt");
  return static_cast<std::size_t>(r);
}

HydroState initial_state(const InitialData& data) {
  data.A.require_same(ScalarField(data.Phi.grid()));
  HydroState s;
  s.t = 0.0;
  s.a = data.A;
  s.v = gradient(data.Phi, data.phase_tail);
  s.phi = data.Phi;
  s.tail = data.phase_tail;
  return s;
}

RealField hydro_potential(const RealField& density, const SolverConfig& cfg) {
  if (cfg.poisson_path == PoissonPath::direct) return potential_logkernel_direct(density).P;
  return potential_only(density);
}

namespace {

NonlinearTerms nonlinear_terms(const ScalarField& a, const Spectrum& a_hat, const VectorField2& v,
                               const RadialTail& tail, const RealField& div, const SolverConfig& cfg) {
  const GridSpec& g = a.grid();
  RealField P(g);
  RadialTail ptail;
  if (cfg.lambda != 0.0) {
    RealField rho = abs2(a);
    if (cfg.dealias) rho = dealias(rho);
    P = hydro_potential(rho, cfg);
    ptail = potential_tail(quadrature_mass(rho));
  }
  GradientPair b = bernoulli_gradient(v, tail, v, tail, 0.5, P, ptail, cfg.lambda, cfg.dealias, true);
  NonlinearTerms nl{ScalarField(g, no_fill), std::move(b.gradient), std::move(b.laplacian), std::move(b.remainder)};
  nl.dv *= -1.0;
  nl.ddiv *= -1.0;
  const ComplexVectorField ga = gradient_from_spectrum(a_hat);
  for (std::size_t k = 0; k < nl.na.size(); ++k)
    nl.na[k] = -(v.x[k] * ga.x[k] + v.y[k] * ga.y[k]) - 0.5 * a[k] * div[k];
  return nl;
}

}  // namespace

RadialTail tail_rate(const RadialTail& u, const RadialTail& w, double c_dot, double rate) {
  RadialTail out;
  out.add_scaled(-c_dot, gradient_product(u, w));
  out.gaussian = rate;
  return out;
}

RealField phase_source(const HydroState& state, const SolverConfig& cfg) {
  RealField src(state.a.grid());
  if (cfg.lambda != 0.0) {
    RealField rho = abs2(state.a);
    if (cfg.dealias) rho = dealias(rho);
    src = hydro_potential(rho, cfg);
    src *= cfg.lambda;
  }
  for (std::size_t k = 0; k < src.size(); ++k)
    src[k] += 0.5 * (state.v.x[k] * state.v.x[k] + state.v.y[k] * state.v.y[k]);
  return src;
}

HydroIntegrator::HydroIntegrator(SolverConfig cfg, double mass)
    : cfg_(cfg), tail_rate_(cfg.lambda * mass / kTwoPi) {
  validate(cfg_);
}

HydroIntegrator::Evaluation HydroIntegrator::evaluate(const ScalarField& a, const Spectrum& a_hat,
                                                      const VectorField2& v, const RadialTail& tail,
                                                      const RealField& div) const {
  NonlinearTerms nl = nonlinear_terms(a, a_hat, v, tail, div, cfg_);
  Evaluation ev;
  ev.na_hat = forward(nl.na);
  if (cfg_.dealias) dealias(ev.na_hat);
  ev.nv = std::move(nl.dv);
  ev.ndiv = std::move(nl.ddiv);
  ev.source = std::move(nl.source);
  return ev;
}

void HydroIntegrator::propagate(Spectrum& s, double tau) {
  if (cfg_.epsilon == 0.0 || tau == 0.0) return;
  ++propagator_applications_;
  const double coef = 0.5 * cfg_.epsilon * tau;
  for (const FreePropagator& p : propagators_) {
    if (p.coefficient() == coef) {
      p.apply(s);
      return;
    }
  }
  // a step uses tau = dt and dt/2, of either sign
  if (propagators_.size() >= 4) propagators_.erase(propagators_.begin());
  propagators_.emplace_back(s.grid, coef);
  propagators_.back().apply(s);
}

void HydroIntegrator::check_cfl(const HydroState& state, double dt) const {
  const double vmax = max_speed(state.v);
  const double h = state.a.grid().spacing;
  if (vmax > 0.0 && std::abs(dt) > 0.5 * h / vmax) {
    throw StepRejected("time step " + std::to_string(std::abs(dt)) + " exceeds the advective limit " +
                           std::to_string(0.5 * h / vmax),
                       vmax);
  }
}

void HydroIntegrator::advance(HydroState& s, double dt) {
  check_cfl(s, dt);
  const double h2 = 0.5 * dt;

  const bool cached = cached_ && cached_t_ == s.t;
  Spectrum a_hat = cached ? std::move(*cached_hat_) : forward(s.a);
  const RealField div = cached ? std::move(*cached_div_) : divergence(s.v, s.tail);
  Evaluation k1 = cached ? std::move(*cached_) : evaluate(s.a, a_hat, s.v, s.tail, div);
  auto rate = [&](const RadialTail& t) { return tail_rate(t, t, 0.5, tail_rate_); };
  const RadialTail r1 = rate(s.tail);
  const RadialTail t2 = shifted(s.tail, h2, r1);
  const RadialTail r2 = rate(t2);
  const RadialTail t3 = shifted(s.tail, h2, r2);
  const RadialTail r3 = rate(t3);
  const RadialTail t4 = shifted(s.tail, dt, r3);
  const RadialTail r4 = rate(t4);
  cached_.reset();
  cached_hat_.reset();
  cached_div_.reset();

  // Stage 2
  Spectrum s2 = combined(a_hat, 1.0, k1.na_hat, h2);
  propagate(s2, h2);
  VectorField2 v2 = s.v;
  v2.add_scaled(h2, k1.nv);
  Evaluation k2 = evaluate(inverse_complex(s2), s2, v2, t2, combined(div, {{h2, &k1.ndiv}}));

  // Stage 3
  Spectrum a_half = a_hat;
  propagate(a_half, h2);
  Spectrum s3 = combined(a_half, 1.0, k2.na_hat, h2);
  VectorField2 v3 = s.v;
  v3.add_scaled(h2, k2.nv);
  Evaluation k3 = evaluate(inverse_complex(s3), s3, v3, t3, combined(div, {{h2, &k2.ndiv}}));

  // Stage 4
  Spectrum a_full = a_hat;
  propagate(a_full, dt);
  Spectrum k3_half = k3.na_hat;
  propagate(k3_half, h2);
  Spectrum s4 = combined(a_full, 1.0, k3_half, dt);
  VectorField2 v4 = s.v;
  v4.add_scaled(dt, k3.nv);
  Evaluation k4 = evaluate(inverse_complex(s4), s4, v4, t4, combined(div, {{dt, &k3.ndiv}}));

  // Combine: E(dt)(a + dt/6 k1) + dt/3 E(dt/2)(k2 + k3) + dt/6 k4
  Spectrum next = combined(a_hat, 1.0, k1.na_hat, dt / 6.0);
  propagate(next, dt);
  Spectrum mid = combined(k2.na_hat, 1.0, k3.na_hat, 1.0);
  propagate(mid, h2);
  for (std::size_t k = 0; k < next.data.size(); ++k)
    next.data[k] += dt / 3.0 * mid.data[k] + dt / 6.0 * k4.na_hat.data[k];
  RealField div_next =
      combined(div, {{dt / 6.0, &k1.ndiv}, {dt / 3.0, &k2.ndiv}, {dt / 3.0, &k3.ndiv}, {dt / 6.0, &k4.ndiv}});

  HydroState out;
  out.t = s.t + dt;
  out.a = inverse_complex(next);
  out.v = s.v;
  out.v.add_scaled(dt / 6.0, k1.nv);
  out.v.add_scaled(dt / 3.0, k2.nv);
  out.v.add_scaled(dt / 3.0, k3.nv);
  out.v.add_scaled(dt / 6.0, k4.nv);
  out.tail = shifted(s.tail, dt / 6.0, r1);
  out.tail.add_scaled(dt / 3.0, r2).add_scaled(dt / 3.0, r3).add_scaled(dt / 6.0, r4);

  if (!all_finite(out.a) || !all_finite(out.v.x) || !all_finite(out.v.y))
    throw SolverDiverged("non-finite values after step at t = " + std::to_string(s.t), s);

  Evaluation k_next = evaluate(out.a, next, out.v, out.tail, div_next);
  // trapezoid on the remainder; the far field advances with the tail
  out.phi = s.phi + sample_tail(s.phi.grid(), shifted(out.tail, -1.0, s.tail));
  for (std::size_t k = 0; k < out.phi.size(); ++k) out.phi[k] -= h2 * (k1.source[k] + k_next.source[k]);
  if (!all_finite(out.phi)) throw SolverDiverged("non-finite phase at t = " + std::to_string(s.t), s);

  cached_ = std::move(k_next);
  cached_hat_ = std::move(next);
  cached_div_ = std::move(div_next);
  cached_t_ = out.t;
  s = std::move(out);
}

HydroRates hydro_rhs(const HydroState& state, const SolverConfig& cfg) {
  NonlinearTerms nl =
      nonlinear_terms(state.a, forward(state.a), state.v, state.tail, divergence(state.v, state.tail), cfg);
  HydroRates r;
  r.da = cfg.dealias ? dealias(nl.na) : std::move(nl.na);
  if (cfg.epsilon != 0.0) r.da.add_scaled(cplx(0.0, 0.5 * cfg.epsilon), laplacian(state.a));
  r.dv = std::move(nl.dv);
  return r;
}

HydroState hydro_step(const HydroState& state, const SolverConfig& cfg) {
  HydroIntegrator integ(cfg, quadrature_mass(abs2(state.a)));
  HydroState s = state;
  integ.advance(s, cfg.dt);
  return s;
}

Trajectory evolve_hydro(const InitialData& data, const SolverConfig& cfg) {
  const std::size_t steps = step_count(cfg);
  HydroState s = initial_state(data);
  HydroIntegrator integ(cfg, quadrature_mass(abs2(s.a)));
  Trajectory traj;
  traj.push_back(s);
  for (std::size_t k = 1; k <= steps; ++k) {
    integ.advance(s, cfg.dt);
    const bool keep = (k == steps) || (cfg.sample_every > 0 && k % cfg.sample_every == 0);
    if (keep) traj.push_back(s);
  }
  return traj;
}

std::vector<RealField> reconstruct_phase(const Trajectory& traj, const RealField& Phi, const SolverConfig& cfg) {
  std::vector<RealField> out;
  if (traj.empty()) return out;
  out.push_back(Phi);
  RealField prev = phase_source(traj.front(), cfg);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    RealField cur = phase_source(traj[k], cfg);
    const double dt = traj[k].t - traj[k - 1].t;
    RealField phi = out.back();
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] -= 0.5 * dt * (prev[i] + cur[i]);
    out.push_back(std::move(phi));
    prev = std::move(cur);
  }
  return out;
}

double curl_residual(const VectorField2& v, const RadialTail& tail) {
  const double nv = std::sqrt(std::pow(l2(v.x), 2) + std::pow(l2(v.y), 2));
  if (nv == 0.0) return 0.0;
  return l2(curl(v, tail)) / nv;
}

double phase_growth_ratio(const RealField& phi, const RealField& Phi, double radius) {
  const GridSpec& g = phi.grid();
  if (radius >= g.half_width || !(radius > 0.0)) throw OutOfDomain("radius must lie in (0, L)");
  const RealField diff = phi - Phi;
  const double denom = 0.5 * std::log1p(radius * radius);
  constexpr int kAngles = 360;
  double worst = 0.0;
  for (int k = 0; k < kAngles; ++k) {
    const double th = kTwoPi * k / kAngles;
    worst = std::max(worst, std::abs(interpolate(diff, radius * std::cos(th), radius * std::sin(th))));
  }
  return worst / denom;
}

}  // namespace sp2d
