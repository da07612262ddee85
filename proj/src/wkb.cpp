#include "sp2d/wkb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include "sp2d/poisson.hpp"
#include "sp2d/spectral.hpp"

namespace sp2d {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void enumerate(int l, int part, int remaining, WeightedPartition& cur, std::vector<WeightedPartition>& out) {
  if (part > l) {
    if (remaining == 0) out.push_back(cur);
    return;
  }
  for (int s = remaining / part; s >= 0; --s) {
    cur[static_cast<std::size_t>(part - 1)] = s;
    enumerate(l, part + 1, remaining - s * part, cur, out);
  }
  cur[static_cast<std::size_t>(part - 1)] = 0;
}

// Rows give the coefficients of the least-squares polynomial as weights on the samples.
std::vector<std::vector<double>> fit_weights(const std::vector<double>& x, int degree) {
  const std::size_t m = static_cast<std::size_t>(degree) + 1;
  const std::size_t p = x.size();
  std::vector<std::vector<double>> V(p, std::vector<double>(m));
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < m; ++k) V[i][k] = std::pow(x[i], static_cast<double>(k));
  // augmented normal equations [V^T V | V^T]
  std::vector<std::vector<double>> A(m, std::vector<double>(m + p, 0.0));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c)
      for (std::size_t i = 0; i < p; ++i) A[r][c] += V[i][r] * V[i][c];
    for (std::size_t i = 0; i < p; ++i) A[r][m + i] = V[i][r];
  }
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    if (A[c][c] == 0.0) throw ConditioningError("singular Vandermonde system");
    const double d = A[c][c];
    for (double& v : A[c]) v /= d;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == c) continue;
      const double f = A[r][c];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < m + p; ++k) A[r][k] -= f * A[c][k];
    }
  }
  std::vector<std::vector<double>> W(m, std::vector<double>(p));
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t i = 0; i < p; ++i) W[r][i] = A[r][m + i];
  return W;
}

template <class T>
std::vector<Field<T>> fit_fields(const std::vector<const Field<T>*>& samples, const std::vector<double>& eps,
                                 const Field<T>* pinned, int order) {
  const GridSpec& g = samples.front()->grid();
  std::vector<Field<T>> out;
  if (pinned) {
    // (f^eps - f_0)/eps = c_0 + c_1 eps + ... gives f_1, f_2, ...
    const auto W = fit_weights(eps, order - 1);
    out.push_back(*pinned);
    for (std::size_t r = 0; r < W.size(); ++r) {
      Field<T> c(g);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const double w = W[r][i] / eps[i];
        for (std::size_t k = 0; k < c.size(); ++k) c[k] += w * ((*samples[i])[k] - (*pinned)[k]);
      }
      out.push_back(std::move(c));
    }
    return out;
  }
  const auto W = fit_weights(eps, order);
  for (std::size_t r = 0; r < W.size(); ++r) {
    Field<T> c(g);
    for (std::size_t i = 0; i < samples.size(); ++i) c.add_scaled(T(W[r][i]), *samples[i]);
    out.push_back(std::move(c));
  }
  return out;
}

double l2_norm(const ScalarField& f) {
  double s = 0.0;
  for (const cplx& v : f.values()) s += std::norm(v);
  return std::sqrt(s * f.grid().cell_area());
}

struct Joint {
  ScalarField a0, a1;
  VectorField2 v0, v1;
};

struct JointRates {
  Joint d;
  RealField s0, s1;
};

class CascadeSystem {
 public:
  CascadeSystem(const SolverConfig& cfg, double mass0, double mass1)
      : cfg_(cfg), rate0_(cfg.lambda * mass0 / kTwoPi), rate1_(cfg.lambda * mass1 / kTwoPi) {}

  RadialTail rate0(const RadialTail& t0) const { return tail_rate(t0, t0, 0.5, rate0_); }
  RadialTail rate1(const RadialTail& t0, const RadialTail& t1) const { return tail_rate(t0, t1, 1.0, rate1_); }

  JointRates rates(const Joint& s, const RadialTail& t0, const RadialTail& t1) const {
    const GridSpec& g = s.a0.grid();
    JointRates r;
    r.d = Joint{ScalarField(g), ScalarField(g), VectorField2(g), VectorField2(g)};
    r.s0 = RealField(g);
    r.s1 = RealField(g);

    RealField P0(g), P1(g);
    RadialTail pt0, pt1;
    if (cfg_.lambda != 0.0) {
      RealField rho0 = abs2(s.a0);
      RealField rho1(g);
      for (std::size_t k = 0; k < rho1.size(); ++k) rho1[k] = 2.0 * std::real(s.a0[k] * std::conj(s.a1[k]));
      if (cfg_.dealias) {
        rho0 = dealias(rho0);
        rho1 = dealias(rho1);
      }
      P0 = hydro_potential(rho0, cfg_);
      P1 = hydro_potential(rho1, cfg_);
      pt0 = potential_tail(quadrature_mass(rho0));
      pt1 = potential_tail(quadrature_mass(rho1));
    }
    GradientPair b0 = bernoulli_gradient(s.v0, t0, s.v0, t0, 0.5, P0, pt0, cfg_.lambda, cfg_.dealias);
    GradientPair b1 = bernoulli_gradient(s.v0, t0, s.v1, t1, 1.0, P1, pt1, cfg_.lambda, cfg_.dealias);
    r.d.v0 = std::move(b0.gradient);
    r.d.v0 *= -1.0;
    r.d.v1 = std::move(b1.gradient);
    r.d.v1 *= -1.0;
    r.s0 = std::move(b0.remainder);
    r.s1 = std::move(b1.remainder);

    const Spectrum a0h = forward(s.a0);
    const ComplexVectorField ga0 = gradient_from_spectrum(a0h);
    const ComplexVectorField ga1 = gradient(s.a1);
    Spectrum lap = a0h;
    for_each_mode(lap, [](cplx& v, double k1, double k2, bool, bool) { v *= -(k1 * k1 + k2 * k2); });
    const ScalarField lap_a0 = inverse_complex(lap);
    const RealField div0 = divergence(s.v0, t0);
    const RealField div1 = divergence(s.v1, t1);

    for (std::size_t k = 0; k < s.a0.size(); ++k) {
      const double v0x = s.v0.x[k], v0y = s.v0.y[k], v1x = s.v1.x[k], v1y = s.v1.y[k];
      r.d.a0[k] = -(v0x * ga0.x[k] + v0y * ga0.y[k]) - 0.5 * s.a0[k] * div0[k];
      r.d.a1[k] = -(v0x * ga1.x[k] + v0y * ga1.y[k]) - (v1x * ga0.x[k] + v1y * ga0.y[k]) -
                  0.5 * s.a1[k] * div0[k] - 0.5 * s.a0[k] * div1[k];
    }
    if (cfg_.dealias) {
      r.d.a0 = dealias(r.d.a0);
      r.d.a1 = dealias(r.d.a1);
    }
    r.d.a1.add_scaled(cplx(0.0, 0.5), lap_a0);
    return r;
  }

 private:
  SolverConfig cfg_;
  double rate0_, rate1_;
};

Joint shifted(const Joint& base, const Joint& d, double c) {
  Joint out = base;
  out.a0.add_scaled(cplx(c), d.a0);
  out.a1.add_scaled(cplx(c), d.a1);
  out.v0.add_scaled(c, d.v0);
  out.v1.add_scaled(c, d.v1);
  return out;
}

}  // namespace

std::vector<WeightedPartition> weighted_partitions(int l) {
  if (l < 1) throw InvalidArgument("weighted partitions need l >= 1");
  std::vector<WeightedPartition> out;
  WeightedPartition cur(static_cast<std::size_t>(l), 0);
  enumerate(l, 1, l, cur, out);
  return out;
}

ScalarField assemble_beta(int j, const std::vector<ScalarField>& a_terms, const std::vector<RealField>& phi_terms) {
  if (j < 0) throw InvalidArgument("beta index must be >= 0");
  if (a_terms.size() < static_cast<std::size_t>(j) + 1 || phi_terms.size() < static_cast<std::size_t>(j) + 2)
    throw InvalidArgument("beta_" + std::to_string(j) + " needs a_0..a_j and phi_0..phi_{j+1}");
  const GridSpec& g = a_terms[0].grid();
  ScalarField acc = a_terms[static_cast<std::size_t>(j)];
  for (int l = 1; l <= j; ++l) {
    const ScalarField& a = a_terms[static_cast<std::size_t>(j - l)];
    for (const WeightedPartition& sigma : weighted_partitions(l)) {
      for (std::size_t p = 0; p < g.size(); ++p) {
        cplx prod = 1.0;
        for (std::size_t k = 0; k < sigma.size(); ++k) {
          const int s = sigma[k];
          if (s == 0) continue;
          const cplx z(0.0, phi_terms[k + 2][p]);
          prod *= std::pow(z, s) / std::tgamma(s + 1.0);
        }
        acc[p] += a[p] * prod;
      }
    }
  }
  const RealField& phi1 = phi_terms[1];
  for (std::size_t p = 0; p < g.size(); ++p) acc[p] *= std::polar(1.0, phi1[p]);
  return acc;
}

ExpansionSet extract_correctors(const std::map<double, HydroState>& runs, int order) {
  if (order < 1) throw InvalidArgument("expansion order must be >= 1");
  if (runs.empty()) throw InvalidArgument("no runs supplied");
  const HydroState* limit = nullptr;
  std::vector<double> eps;
  std::vector<const ScalarField*> amps;
  std::vector<const RealField*> phases;
  const HydroState& first = runs.begin()->second;
  // descending eps
  for (auto it = runs.rbegin(); it != runs.rend(); ++it) {
    if (it->first < 0.0) throw InvalidArgument("eps values must be >= 0");
    if (!(it->second.a.grid() == first.a.grid())) throw InvalidArgument("runs live on different grids");
    if (std::abs(it->second.t - first.t) > 1e-12 * std::max(1.0, first.t))
      throw InvalidArgument("runs are sampled at different times");
    if (it->first == 0.0) {
      limit = &it->second;
      continue;
    }
    eps.push_back(it->first);
    amps.push_back(&it->second.a);
    phases.push_back(&it->second.phi);
  }
  for (std::size_t k = 1; k < eps.size(); ++k)
    if (eps[k - 1] / eps[k] < 1.5)
      throw ConditioningError("eps values " + std::to_string(eps[k - 1]) + " and " + std::to_string(eps[k]) +
                              " are too close for a stable fit");
  const std::size_t needed = limit ? static_cast<std::size_t>(order) : static_cast<std::size_t>(order) + 1;
  if (eps.size() < needed) throw InvalidArgument("not enough distinct eps values for the requested order");

  ExpansionSet ex;
  ex.eps0 = eps.front();
  ex.a_terms = fit_fields<cplx>(amps, eps, limit ? &limit->a : nullptr, order);
  ex.phi_terms = fit_fields<double>(phases, eps, limit ? &limit->phi : nullptr, order);
  for (int j = 0; j + 1 <= order; ++j) ex.beta_terms.push_back(assemble_beta(j, ex.a_terms, ex.phi_terms));
  return ex;
}

std::vector<CascadeState> first_order_cascade(const Trajectory& limit_run, const SolverConfig& cfg,
                                              const std::optional<ScalarField>& a1_initial) {
  if (limit_run.empty()) throw DependencyError("the cascade needs a stored eps = 0 run");
  if (cfg.epsilon != 0.0) throw DependencyError("the cascade linearizes around the eps = 0 system");
  validate(cfg);
  const HydroState& s0 = limit_run.front();
  const GridSpec& g = s0.a.grid();

  Joint cur{s0.a, a1_initial ? *a1_initial : ScalarField(g), s0.v, VectorField2(g)};
  cur.a0.require_same(cur.a1);
  double m1 = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) m1 += 2.0 * std::real(cur.a0[k] * std::conj(cur.a1[k]));
  m1 *= g.cell_area();
  const CascadeSystem sys(cfg, quadrature_mass(abs2(cur.a0)), m1);

  RadialTail tail0 = s0.tail, tail1;
  RealField phi0 = s0.phi, phi1(g);

  std::vector<std::size_t> sample_steps;
  for (const HydroState& s : limit_run) {
    const double q = (s.t - s0.t) / cfg.dt;
    if (std::abs(q - std::round(q)) > 1e-6) throw DependencyError("limit run samples are not on the step grid");
    sample_steps.push_back(static_cast<std::size_t>(std::llround(q)));
  }

  std::vector<CascadeState> out;
  auto record = [&](double t) { out.push_back({t, cur.a0, cur.v0, phi0, tail0, cur.a1, cur.v1, phi1, tail1}); };
  auto moved = [](const RadialTail& t, double c, const RadialTail& r) {
    RadialTail o = t;
    o.add_scaled(c, r);
    return o;
  };
  const double dt = cfg.dt;
  std::size_t next_sample = 0;
  if (sample_steps[0] == 0) {
    record(s0.t);
    next_sample = 1;
  }
  JointRates k1 = sys.rates(cur, tail0, tail1);
  const std::size_t total = sample_steps.back();
  for (std::size_t step = 1; step <= total; ++step) {
    const RadialTail p1 = sys.rate0(tail0), q1 = sys.rate1(tail0, tail1);
    const RadialTail t0b = moved(tail0, 0.5 * dt, p1), t1b = moved(tail1, 0.5 * dt, q1);
    const JointRates k2 = sys.rates(shifted(cur, k1.d, 0.5 * dt), t0b, t1b);
    const RadialTail p2 = sys.rate0(t0b), q2 = sys.rate1(t0b, t1b);
    const RadialTail t0c = moved(tail0, 0.5 * dt, p2), t1c = moved(tail1, 0.5 * dt, q2);
    const JointRates k3 = sys.rates(shifted(cur, k2.d, 0.5 * dt), t0c, t1c);
    const RadialTail p3 = sys.rate0(t0c), q3 = sys.rate1(t0c, t1c);
    const RadialTail t0d = moved(tail0, dt, p3), t1d = moved(tail1, dt, q3);
    const JointRates k4 = sys.rates(shifted(cur, k3.d, dt), t0d, t1d);
    const RadialTail p4 = sys.rate0(t0d), q4 = sys.rate1(t0d, t1d);
    Joint next = shifted(cur, k1.d, dt / 6.0);
    next = shifted(next, k2.d, dt / 3.0);
    next = shifted(next, k3.d, dt / 3.0);
    next = shifted(next, k4.d, dt / 6.0);
    cur = std::move(next);
    if (!all_finite(cur.a1) || !all_finite(cur.v1.x) || !all_finite(cur.v1.y))
      throw DependencyError("cascade produced non-finite values");
    RadialTail n0 = moved(tail0, dt / 6.0, p1), n1 = moved(tail1, dt / 6.0, q1);
    n0.add_scaled(dt / 3.0, p2).add_scaled(dt / 3.0, p3).add_scaled(dt / 6.0, p4);
    n1.add_scaled(dt / 3.0, q2).add_scaled(dt / 3.0, q3).add_scaled(dt / 6.0, q4);
    JointRates kn = sys.rates(cur, n0, n1);
    phi0 += sample_tail(g, moved(n0, -1.0, tail0));
    phi1 += sample_tail(g, moved(n1, -1.0, tail1));
    for (std::size_t k = 0; k < g.size(); ++k) {
      phi0[k] -= 0.5 * dt * (k1.s0[k] + kn.s0[k]);
      phi1[k] -= 0.5 * dt * (k1.s1[k] + kn.s1[k]);
    }
    tail0 = n0;
    tail1 = n1;
    k1 = std::move(kn);
    while (next_sample < sample_steps.size() && sample_steps[next_sample] == step) {
      record(limit_run[next_sample].t);
      ++next_sample;
    }
  }

  const ScalarField diff = out.back().a0 - limit_run.back().a;
  const double scale = std::max(l2_norm(limit_run.back().a), 1e-300);
  if (l2_norm(diff) > 1e-8 * scale) throw DependencyError("limit run does not match the supplied configuration");
  return out;
}

double wkb_error(const ScalarField& u, const ExpansionSet& expansion, int N, double eps) {
  if (N < 1 || static_cast<std::size_t>(N) > expansion.beta_terms.size())
    throw InvalidArgument("expansion does not hold the requested number of beta terms");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  const RealField& phi0 = expansion.phi_terms.at(0);
  ScalarField r = u;
  for (std::size_t k = 0; k < r.size(); ++k) r[k] *= std::polar(1.0, -phi0[k] / eps);
  double w = 1.0;
  for (int j = 0; j < N; ++j) {
    r.add_scaled(cplx(-w), expansion.beta_terms[static_cast<std::size_t>(j)]);
    w *= eps;
  }
  return l2_norm(r);
}

ConvergenceReport fit_convergence_rate(std::vector<std::pair<double, double>> pairs) {
  if (pairs.size() < 3) throw InvalidArgument("rate fit needs at least three (eps, error) pairs");
  for (const auto& [e, err] : pairs) {
    if (!(e > 0.0)) throw InvalidArgument("eps values must be positive");
    if (!(err > 0.0) || !std::isfinite(err)) throw InvalidArgument("errors must be positive");
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 1; k < pairs.size(); ++k)
    if (pairs[k].first == pairs[k - 1].first) throw InvalidArgument("eps values must be distinct");

  ConvergenceReport rep;
  const double n = static_cast<double>(pairs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [e, err] : pairs) {
    rep.eps_values.push_back(e);
    rep.errors.push_back(err);
    const double x = std::log(e), y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  rep.fitted_order = (n * sxy - sx * sy) / denom;
  rep.intercept = (sy - rep.fitted_order * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (const auto& [e, err] : pairs) {
    const double y = std::log(err);
    const double fit = rep.intercept + rep.fitted_order * std::log(e);
    ss_res += (y - fit) * (y - fit);
    ss_tot += (y - ybar) * (y - ybar);
  }
  rep.residual = std::sqrt(ss_res / n);
  rep.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  rep.flagged = rep.r_squared < 0.9;
  return rep;
}

void write_report_csv(const ConvergenceReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "eps,error,fitted_order,residual\n";
  char line[160];
  for (std::size_t k = 0; k < report.eps_values.size(); ++k) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", report.eps_values[k], report.errors[k],
                  report.fitted_order, report.residual);
    out << line;
  }
}

}  // namespace sp2d
