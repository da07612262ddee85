#include "sp2d/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "sp2d/poisson.hpp"
#include "sp2d/spectral.hpp"

namespace sp2d {
namespace {

template <class T>
double lp_impl(const Field<T>& f, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("L^p exponent must lie in [1, inf]");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const T& v : f.values()) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  for (const T& v : f.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * f.grid().cell_area(), 1.0 / p);
}

double sobolev_from_spectrum(Spectrum s, double sobolev_index) {
  const GridSpec& g = s.grid;
  double acc = 0.0;
  const std::size_t cols = s.cols();
  for (std::size_t r = 0; r < g.n; ++r) {
    const double k2 = g.wavenumber(r);
    for (std::size_t c = 0; c < cols; ++c) {
      const double k1 = g.wavenumber(c);
      // interior columns of a half spectrum stand for two conjugate modes
      const double mult = (s.half && c != 0 && c != g.n / 2) ? 2.0 : 1.0;
      acc += mult * std::pow(1.0 + k1 * k1 + k2 * k2, sobolev_index) * std::norm(s.data[r * cols + c]);
    }
  }
  return std::sqrt(acc * g.cell_area() / static_cast<double>(g.size()));
}

void require_hs_index(double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidArgument("Sobolev index must be >= 0");
}

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

// (int w|u1|^2 - int w|u0|^2) / span, differenced pointwise before summing
double weighted_rate(const RealField& w, const ScalarField& u0, const ScalarField& u1, double span) {
  double s = 0.0;
  for (std::size_t k = 0; k < u0.size(); ++k) s += w[k] * (std::norm(u1[k]) - std::norm(u0[k]));
  return s * u0.grid().cell_area() / span;
}

// eps Im int (grad w . grad u) conj(u)
double flux_term(const VectorField2& gw, const ScalarField& u, double eps) {
  if (eps == 0.0) return 0.0;
  const ComplexVectorField gu = gradient(u);
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k)
    s += std::imag((gw.x[k] * gu.x[k] + gw.y[k] * gu.y[k]) * std::conj(u[k]));
  return eps * s * u.grid().cell_area();
}

template <class S>
void require_three(const std::vector<S>& samples) {
  if (samples.size() != 3) throw InvalidArgument("weight identity needs samples at t - dt, t, t + dt");
  const double d1 = samples[1].t - samples[0].t, d2 = samples[2].t - samples[1].t;
  if (!(d1 > 0.0) || std::abs(d1 - d2) > 1e-9 * d1) throw InvalidArgument("samples must be equally spaced in time");
}

}  // namespace

double lp_norm(const ScalarField& f, double p) { return lp_impl(f, p); }
double lp_norm(const RealField& f, double p) { return lp_impl(f, p); }

double hs_norm(const ScalarField& f, double s) {
  require_hs_index(s);
  return sobolev_from_spectrum(forward(f), s);
}

double hs_norm(const RealField& f, double s) {
  require_hs_index(s);
  return sobolev_from_spectrum(forward(f), s);
}

double zhidkov_norm(const ScalarField& f, double s) {
  if (!(s > 1.0)) throw InvalidArgument("Zhidkov index must exceed 1");
  const ComplexVectorField g = gradient(f);
  const double hx = hs_norm(g.x, s - 1.0), hy = hs_norm(g.y, s - 1.0);
  return lp_norm(f, std::numeric_limits<double>::infinity()) + std::sqrt(hx * hx + hy * hy);
}

double zhidkov_norm(const RealField& f, double s, const RadialTail& tail) {
  if (!(s > 1.0)) throw InvalidArgument("Zhidkov index must exceed 1");
  const VectorField2 g = gradient(f, tail);
  const double hx = hs_norm(g.x, s - 1.0), hy = hs_norm(g.y, s - 1.0);
  return lp_norm(f, std::numeric_limits<double>::infinity()) + std::sqrt(hx * hx + hy * hy);
}

double mass(const ScalarField& f) {
  double s = 0.0;
  for (const cplx& v : f.values()) s += std::norm(v);
  return s * f.grid().cell_area();
}

double weighted_moment(const ScalarField& f, double alpha, int j) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("moment exponent alpha must lie in (0, 1]");
  if (j < 0) throw InvalidArgument("corrector index must be >= 0");
  const GridSpec& g = f.grid();
  const double e = std::ldexp(alpha, -j);
  double s = 0.0;
  for (std::size_t jj = 0; jj < g.n; ++jj) {
    const double y = g.coordinate(jj);
    for (std::size_t i = 0; i < g.n; ++i) {
      const double x = g.coordinate(i);
      s += std::pow(1.0 + std::hypot(x, y), e) * std::norm(f(i, jj));
    }
  }
  return s * g.cell_area();
}

double energy_functional(const ScalarField& u, double lambda, double eps) {
  const ComplexVectorField gu = gradient(u);
  double kinetic = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) kinetic += std::norm(gu.x[k]) + std::norm(gu.y[k]);
  kinetic *= 0.5 * eps * eps * u.grid().cell_area();
  if (lambda == 0.0) return kinetic;
  const RealField rho = abs2(u);
  const RealField Pn = newtonian_potential(rho);
  double pot = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) pot += Pn[k] * rho[k];
  return kinetic + 0.5 * lambda * pot * u.grid().cell_area();
}

double hydro_energy(const HydroState& s, double lambda, double eps) {
  const ComplexVectorField ga = gradient(s.a);
  double kinetic = 0.0;
  for (std::size_t k = 0; k < s.a.size(); ++k) {
    const cplx iav = cplx(0.0, 1.0) * s.a[k];
    kinetic += std::norm(eps * ga.x[k] + iav * s.v.x[k]) + std::norm(eps * ga.y[k] + iav * s.v.y[k]);
  }
  kinetic *= 0.5 * s.a.grid().cell_area();
  if (lambda == 0.0) return kinetic;
  const RealField rho = abs2(s.a);
  const RealField Pn = newtonian_potential(rho);
  double pot = 0.0;
  for (std::size_t k = 0; k < rho.size(); ++k) pot += Pn[k] * rho[k];
  return kinetic + 0.5 * lambda * pot * s.a.grid().cell_area();
}

RealField truncated_bracket_weight(const GridSpec& grid, double cutoff) {
  const double R = cutoff * grid.half_width;
  const double r0 = 0.75 * R;
  const double plateau = std::sqrt(1.0 + R * R);
  return RealField::generate(grid, [&](double x, double y) {
    const double r = std::hypot(x, y);
    const double s = smooth_step((r - r0) / (R - r0));
    return (1.0 - s) * std::sqrt(1.0 + r * r) + s * plateau;
  });
}

double weight_identity_residual(const std::vector<WaveState>& samples, const RealField& w, double eps) {
  require_three(samples);
  const double dt = samples[1].t - samples[0].t;
  const double lhs = weighted_rate(w, samples[0].u, samples[2].u, 2.0 * dt);
  const double rhs = flux_term(gradient(w), samples[1].u, eps);
  return std::abs(lhs - rhs);
}

double weight_identity_residual(const Trajectory& samples, const RealField& w, double eps) {
  require_three(samples);
  const double dt = samples[1].t - samples[0].t;
  const double lhs = weighted_rate(w, samples[0].a, samples[2].a, 2.0 * dt);
  const VectorField2 gw = gradient(w);
  const HydroState& mid = samples[1];
  double transport = 0.0;
  for (std::size_t k = 0; k < mid.a.size(); ++k)
    transport += (gw.x[k] * mid.v.x[k] + gw.y[k] * mid.v.y[k]) * std::norm(mid.a[k]);
  transport *= mid.a.grid().cell_area();
  return std::abs(lhs - flux_term(gw, mid.a, eps) - transport);
}

}  // namespace sp2d
