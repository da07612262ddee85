#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "sp2d/diagnostics.hpp"
#include "sp2d/initial_data.hpp"
#include "sp2d/nls.hpp"
#include "sp2d/wkb.hpp"

using namespace sp2d;

namespace {

double l2(const ScalarField& f) { return std::sqrt(mass(f)); }

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (const cplx& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs(const RealField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

// every ordered sum of l, folded into part counts
std::set<WeightedPartition> partitions_from_compositions(int l) {
  std::set<WeightedPartition> out;
  std::vector<int> parts;
  std::function<void(int)> rec = [&](int left) {
    if (left == 0) {
      WeightedPartition s(static_cast<std::size_t>(l), 0);
      for (int p : parts) ++s[static_cast<std::size_t>(p - 1)];
      out.insert(s);
      return;
    }
    for (int p = 1; p <= left; ++p) {
      parts.push_back(p);
      rec(left - p);
      parts.pop_back();
    }
  };
  rec(l);
  return out;
}

SolverConfig config(double eps, double lambda, double dt, double T) {
  SolverConfig c;
  c.epsilon = eps;
  c.lambda = lambda;
  c.dt = dt;
  c.T = T;
  return c;
}

ScalarField bump(const GridSpec& g, double cx, double cy, cplx scale) {
  return ScalarField::generate(g, [&](double x, double y) {
    return scale * std::exp(-0.5 * ((x - cx) * (x - cx) + (y - cy) * (y - cy)));
  });
}

RealField real_bump(const GridSpec& g, double cx, double cy, double scale) {
  return RealField::generate(g, [&](double x, double y) {
    return scale * std::exp(-0.3 * ((x - cx) * (x - cx) + (y - cy) * (y - cy)));
  });
}

HydroState synthetic_state(const GridSpec& g, const std::vector<ScalarField>& a, const std::vector<RealField>& phi,
                           double eps) {
  HydroState s;
  s.a = ScalarField(g);
  s.phi = RealField(g);
  s.v = VectorField2(g);
  double w = 1.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    s.a.add_scaled(cplx(w), a[j]);
    if (j < phi.size()) s.phi.add_scaled(w, phi[j]);
    w *= eps;
  }
  return s;
}

}  // namespace

TEST_CASE("weighted partitions of small l") {
  CHECK(weighted_partitions(1) == std::vector<WeightedPartition>{{1}});
  CHECK(weighted_partitions(3) == std::vector<WeightedPartition>{{3, 0, 0}, {1, 1, 0}, {0, 0, 1}});
  CHECK(weighted_partitions(5).size() == 7);
}

TEST_CASE("partition enumeration agrees with exhaustive compositions") {
  for (int l = 1; l <= 12; ++l) {
    const std::vector<WeightedPartition> e = weighted_partitions(l);
    const std::set<WeightedPartition> oracle = partitions_from_compositions(l);
    CHECK(e.size() == oracle.size());
    CHECK(std::set<WeightedPartition>(e.begin(), e.end()) == oracle);
    for (const WeightedPartition& s : e) {
      int sum = 0;
      for (std::size_t k = 0; k < s.size(); ++k) sum += static_cast<int>(k + 1) * s[k];
      CHECK(sum == l);
    }
    CHECK(std::is_sorted(e.rbegin(), e.rend()));
  }
}

TEST_CASE("beta terms of low order") {
  const GridSpec g = build_grid(6.0, 32);
  const std::vector<ScalarField> a{bump(g, 0.0, 0.0, 1.0), bump(g, 0.5, 0.0, cplx(0.2, 0.1)), bump(g, 0.0, -0.7, cplx(-0.3))};
  const std::vector<RealField> phi{real_bump(g, 0.0, 0.0, 1.0), real_bump(g, 0.3, 0.3, 0.8), real_bump(g, -1.0, 0.0, 0.6),
                                   real_bump(g, 0.0, 1.0, -0.4)};
  const cplx I(0.0, 1.0);
  const ScalarField b0 = assemble_beta(0, a, phi);
  const ScalarField b1 = assemble_beta(1, a, phi);
  const ScalarField b2 = assemble_beta(2, a, phi);
  double e0 = 0.0, e1 = 0.0, e2 = 0.0, mod = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const cplx f = std::polar(1.0, phi[1][k]);
    e0 = std::max(e0, std::abs(b0[k] - a[0][k] * f));
    e1 = std::max(e1, std::abs(b1[k] - f * (a[1][k] + I * a[0][k] * phi[2][k])));
    const cplx inner = a[2][k] + I * a[1][k] * phi[2][k] + a[0][k] * (I * phi[3][k] - 0.5 * phi[2][k] * phi[2][k]);
    e2 = std::max(e2, std::abs(b2[k] - f * inner));
    mod = std::max(mod, std::abs(std::abs(b0[k]) - std::abs(a[0][k])));
  }
  CHECK(e0 < 1e-15);
  CHECK(e1 < 1e-15);
  CHECK(e2 < 1e-15);
  CHECK(mod < 1e-15);
  std::vector<ScalarField> doubled = a;
  doubled[1] *= cplx(2.0);
  const ScalarField lin = assemble_beta(1, doubled, phi) - assemble_beta(1, a, phi);
  ScalarField expect = a[1];
  for (std::size_t k = 0; k < g.size(); ++k) expect[k] *= std::polar(1.0, phi[1][k]);
  CHECK(max_abs(lin - expect) < 1e-15);
  CHECK_THROWS(assemble_beta(2, a, {phi[0], phi[1], phi[2]}));
}

TEST_CASE("extraction recovers exact polynomials") {
  const GridSpec g = build_grid(6.0, 32);
  const std::vector<ScalarField> a{bump(g, 0.0, 0.0, 1.0), bump(g, 0.4, 0.0, cplx(0.3, -0.2))};
  const std::vector<RealField> phi{real_bump(g, 0.0, 0.0, 0.5), real_bump(g, 0.0, 0.5, -0.7)};
  std::map<double, HydroState> runs;
  for (double eps : {0.4, 0.2, 0.1}) runs[eps] = synthetic_state(g, a, phi, eps);
  const ExpansionSet ex = extract_correctors(runs, 1);
  CHECK(ex.eps0 == 0.4);
  CHECK(max_abs(ex.a_terms[0] - a[0]) < 1e-10);
  CHECK(max_abs(ex.a_terms[1] - a[1]) < 1e-10);
  CHECK(max_abs(ex.phi_terms[1] - phi[1]) < 1e-10);
  CHECK(ex.beta_terms.size() == 1);
}

TEST_CASE("order-one fit of a quadratic is off by O(eps0)") {
  const GridSpec g = build_grid(6.0, 32);
  const std::vector<ScalarField> a{bump(g, 0.0, 0.0, 1.0), bump(g, 0.4, 0.0, 0.5), bump(g, -0.4, 0.3, 2.0)};
  const std::vector<RealField> phi{real_bump(g, 0.0, 0.0, 0.5), real_bump(g, 0.0, 0.5, -0.7)};
  std::vector<double> err;
  for (double e0 : {0.4, 0.2}) {
    std::map<double, HydroState> runs;
    for (double eps : {e0, e0 / 2, e0 / 4}) runs[eps] = synthetic_state(g, a, phi, eps);
    err.push_back(l2(extract_correctors(runs, 1).a_terms[1] - a[1]) / l2(a[2]));
  }
  // least-squares slope of x^2 over x in {1, 1/2, 1/4}, scaled by eps0
  const std::vector<double> x{1.0, 0.5, 0.25};
  const double mx = (x[0] + x[1] + x[2]) / 3.0, my = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (double v : x) {
    sxy += (v - mx) * (v * v - my);
    sxx += (v - mx) * (v - mx);
  }
  CHECK(err[0] == doctest::Approx(0.4 * sxy / sxx).epsilon(1e-8));
  CHECK(err[0] / err[1] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("close eps values are rejected") {
  const GridSpec g = build_grid(6.0, 32);
  const std::vector<ScalarField> a{bump(g, 0.0, 0.0, 1.0)};
  const std::vector<RealField> phi{RealField(g)};
  std::map<double, HydroState> runs;
  for (double eps : {0.4, 0.3, 0.1}) runs[eps] = synthetic_state(g, a, phi, eps);
  CHECK_THROWS_AS(extract_correctors(runs, 1), ConditioningError);
}

TEST_CASE("extrapolated limit amplitude matches the eps = 0 run") {
  const GridSpec g = build_grid(12.0, 128);
  DataSpec spec;
  const InitialData d = make_initial_data(g, spec);
  std::map<double, HydroState> runs;
  for (double eps : {0.4, 0.2, 0.1}) runs[eps] = evolve_hydro(d, config(eps, 1.0, 2e-3, 0.3)).back();
  const HydroState limit = evolve_hydro(d, config(0.0, 1.0, 2e-3, 0.3)).back();
  const ExpansionSet ex = extract_correctors(runs, 2);
  const double err = l2(ex.a_terms[0] - limit.a);
  MESSAGE("unpinned a0 error " << err);
  CHECK(err < 5e-3);
}

TEST_CASE("cascade of a vanishing limit state stays zero") {
  const GridSpec g = build_grid(10.0, 64);
  InitialData d{ScalarField(g), RealField(g), {}};
  const SolverConfig c = config(0.0, 1.0, 1e-2, 0.1);
  const std::vector<CascadeState> out = first_order_cascade(evolve_hydro(d, c), c);
  CHECK(max_abs(out.back().a1) == 0.0);
  CHECK(max_abs(out.back().phi1) == 0.0);
  CHECK_THROWS_AS(first_order_cascade({}, c), DependencyError);
  CHECK_THROWS_AS(first_order_cascade(evolve_hydro(d, c), config(0.5, 1.0, 1e-2, 0.1)), DependencyError);
}

TEST_CASE("uncoupled cascade keeps the first-order mass pairing") {
  const GridSpec g = build_grid(10.0, 128);
  DataSpec spec;
  spec.phase = PhaseKind::neglog;
  const InitialData d = make_initial_data(g, spec);
  SolverConfig c = config(0.0, 0.0, 1e-2, 0.3);
  c.sample_every = 10;
  const std::vector<CascadeState> out = first_order_cascade(evolve_hydro(d, c), c);
  CHECK(out.size() == 4);
  for (const CascadeState& s : out) {
    double pairing = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) pairing += std::real(std::conj(s.a0[k]) * s.a1[k]);
    CHECK(std::abs(pairing * g.cell_area()) < 1e-6);
    CHECK(max_abs(s.phi1) == 0.0);
  }
  CHECK(l2(out.back().a1) > 1e-3);
}

TEST_CASE("WKB error cancels exactly and is gauge stable") {
  const GridSpec g = build_grid(6.0, 32);
  const double eps = 0.3;
  ExpansionSet ex;
  ex.a_terms = {bump(g, 0.0, 0.0, 1.0)};
  ex.phi_terms = {real_bump(g, 0.2, 0.0, 0.6), real_bump(g, 0.0, -0.2, 0.9)};
  ex.beta_terms = {assemble_beta(0, ex.a_terms, ex.phi_terms)};
  RealField total = ex.phi_terms[0];
  total.add_scaled(eps, ex.phi_terms[1]);
  const ScalarField u = madelung_lift(ex.a_terms[0], total, eps);
  CHECK(wkb_error(u, ex, 1, eps) < 1e-14);

  const ScalarField noisy = u + bump(g, 1.0, 1.0, 0.05);
  const double base = wkb_error(noisy, ex, 1, eps);
  ExpansionSet shifted = ex;
  for (double& v : shifted.phi_terms[0].values()) v += 0.77;
  ScalarField rotated = noisy;
  rotated *= std::polar(1.0, 0.77 / eps);
  CHECK(std::abs(wkb_error(rotated, shifted, 1, eps) - base) < 1e-12);
  CHECK_THROWS_AS(wkb_error(u, ex, 2, eps), InvalidArgument);
}

TEST_CASE("convergence rate fits") {
  std::vector<std::pair<double, double>> quad, mixed, flat;
  for (double e : {0.4, 0.2, 0.1, 0.05}) {
    quad.emplace_back(e, 3.0 * e * e);
    mixed.emplace_back(e, e + 10.0 * e * e * e);
    flat.emplace_back(e, 0.1);
  }
  const ConvergenceReport q = fit_convergence_rate(quad);
  CHECK(q.fitted_order == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(q.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
  CHECK(q.eps_values.front() == 0.4);

  // independent two-pass least squares
  double mx = 0.0, my = 0.0;
  for (const auto& [e, err] : mixed) {
    mx += std::log(e) / 4.0;
    my += std::log(err) / 4.0;
  }
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [e, err] : mixed) {
    sxy += (std::log(e) - mx) * (std::log(err) - my);
    sxx += (std::log(e) - mx) * (std::log(e) - mx);
  }
  const ConvergenceReport m = fit_convergence_rate(mixed);
  MESSAGE("eps + 10 eps^3 slope " << m.fitted_order);
  CHECK(m.fitted_order == doctest::Approx(sxy / sxx).epsilon(1e-12));
  CHECK(m.fitted_order > 1.0);

  const ConvergenceReport f = fit_convergence_rate(flat);
  CHECK(std::abs(f.fitted_order) < 1e-12);
  CHECK(f.flagged);

  CHECK_THROWS_AS(fit_convergence_rate({{0.4, 1.0}, {0.2, 0.5}}), InvalidArgument);
  CHECK_THROWS_AS(fit_convergence_rate({{0.4, 1.0}, {0.2, 0.0}, {0.1, 0.1}}), InvalidArgument);
}
