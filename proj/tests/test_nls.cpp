#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "sp2d/diagnostics.hpp"
#include "sp2d/initial_data.hpp"
#include "sp2d/nls.hpp"
#include "sp2d/poisson.hpp"

using namespace sp2d;
using std::numbers::pi;

namespace {

double l2(const ScalarField& f) { return std::sqrt(mass(f)); }

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (const cplx& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

ScalarField free_gaussian(const GridSpec& g, double s2, double eps, double t) {
  const cplx w = cplx(s2, eps * t);
  return ScalarField::generate(g, [&](double x, double y) { return (s2 / w) * std::exp(-(x * x + y * y) / (2.0 * w)); });
}

SolverConfig config(double eps, double lambda, double dt, double T) {
  SolverConfig c;
  c.epsilon = eps;
  c.lambda = lambda;
  c.dt = dt;
  c.T = T;
  return c;
}

ScalarField standard_gaussian(const GridSpec& g) { return gaussian_amplitude(g, 0.0, 0.0, 1.0, 1.0); }

}  // namespace

TEST_CASE("kinetic step on a plane wave") {
  const GridSpec g = build_grid(4.0, 32);
  const double k1 = pi * 3 / 4.0, k2 = -pi * 5 / 4.0;
  const ScalarField w = ScalarField::generate(g, [&](double x, double y) { return std::polar(1.0, k1 * x + k2 * y); });
  const double eps = 0.6, dt = 0.37;
  ScalarField expect = w;
  expect *= std::polar(1.0, -0.5 * eps * (k1 * k1 + k2 * k2) * dt);
  CHECK(max_abs(kinetic_step(w, dt, eps) - expect) < 1e-12);
  CHECK(max_abs(kinetic_step(w, 0.0, eps) - w) == 0.0);
  CHECK_THROWS_AS(kinetic_step(w, dt, 0.0), InvalidArgument);
}

TEST_CASE("kinetic step matches the free Gaussian") {
  const GridSpec g = build_grid(10.0, 128);
  const double eps = 0.7;
  const ScalarField u0 = free_gaussian(g, 2.0, eps, 0.0);
  CHECK(l2(kinetic_step(u0, 0.25, eps) - free_gaussian(g, 2.0, eps, 0.25)) < 1e-10);
}

TEST_CASE("potential step keeps the modulus and adds the potential phase") {
  const GridSpec g = build_grid(10.0, 128);
  const ScalarField a = standard_gaussian(g);
  const RealField phi = RealField::generate(g, [](double x, double y) { return 0.3 * std::exp(-0.2 * (x * x + y * y)) * x; });
  const double eps = 0.5, lambda = -1.2, dt = 0.01;
  const ScalarField u = madelung_lift(a, phi, eps);
  const ScalarField out = potential_step(u, dt, eps, lambda);
  const RealField P = potential_only(abs2(u));
  double dmod = 0.0, dphase = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dmod = std::max(dmod, std::abs(std::abs(out[k]) - std::abs(u[k])));
    if (std::abs(u[k]) > 1e-150) dphase = std::max(dphase, std::abs(std::arg(out[k] / u[k]) + lambda * P[k] * dt / eps));
  }
  CHECK(dmod < 1e-14);
  CHECK(dphase < 1e-12);
  CHECK(max_abs(potential_step(u, dt, eps, 0.0) - u) == 0.0);
}

TEST_CASE("uncoupled evolution is the free flow") {
  const GridSpec g = build_grid(10.0, 128);
  const double eps = 0.8;
  const std::vector<WaveState> out = evolve_nls(free_gaussian(g, 2.0, eps, 0.0), config(eps, 0.0, 1e-2, 0.5));
  CHECK(out.back().t == doctest::Approx(0.5));
  CHECK(l2(out.back().u - free_gaussian(g, 2.0, eps, 0.5)) < 1e-8);
}

TEST_CASE("splitting conserves mass") {
  const GridSpec g = build_grid(12.0, 128);
  const ScalarField u0 = standard_gaussian(g);
  const std::vector<WaveState> out = evolve_nls(u0, config(0.5, 1.0, 1e-3, 1.0));
  CHECK(std::abs(mass(out.back().u) / mass(u0) - 1.0) < 1e-12);
}

TEST_CASE("splitting is second order in time") {
  const GridSpec g = build_grid(12.0, 128);
  const ScalarField u0 = standard_gaussian(g);
  std::vector<ScalarField> ends;
  for (double dt : {0.02, 0.01, 0.005}) ends.push_back(evolve_nls(u0, config(1.0, 1.0, dt, 0.3)).back().u);
  const double slope = std::log2(l2(ends[0] - ends[1]) / l2(ends[1] - ends[2]));
  CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("lift and project") {
  const GridSpec g = build_grid(8.0, 64);
  const ScalarField a = gaussian_amplitude(g, 0.5, 0.0, 1.0, 1.0);
  const RealField phi = RealField::generate(g, [](double x, double y) { return std::sin(x) * std::cos(0.5 * y); });
  const double eps = 0.3;
  const ScalarField u = madelung_lift(a, phi, eps);
  CHECK(max_abs(madelung_project(u, phi, eps) - a) < 1e-14);
  CHECK(max_abs(madelung_lift(a, RealField(g), eps) - a) == 0.0);
  CHECK(max_abs(madelung_project(u, RealField(g), eps) - u) == 0.0);
  double dmod = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) dmod = std::max(dmod, std::abs(std::abs(u[k]) - std::abs(a[k])));
  CHECK(dmod < 1e-15);
}

TEST_CASE("lifted H^3 norm stays within the product bound") {
  const GridSpec g = build_grid(10.0, 128);
  const std::vector<ScalarField> amps{gaussian_amplitude(g, 0.0, 0.0, 1.0, 1.0), ring_amplitude(g, 0.0, 0.0, 1.0, 1.0),
                                      dipole_amplitude(g, 0.0, 0.0, 1.5, 1.0, 1.0)};
  const std::vector<RealField> phases{
      RealField(g), RealField::generate(g, [](double x, double y) { return -0.5 * std::log1p(x * x + y * y); }),
      RealField::generate(g, [](double x, double y) { return 2.0 * std::exp(-0.5 * (x * x + y * y)) * (1.0 + 0.3 * x); })};
  const std::vector<RadialTail> tails{{}, {-1.0, 0.0}, {}};
  const double s = 3.0;
  double worst = 0.0;
  for (std::size_t p = 0; p < phases.size(); ++p) {
    const VectorField2 grad = gradient(phases[p], tails[p]);
    const Jacobian H = jacobian(grad, tails[p]);
    double hess = 0.0;
    for (const RealField* c : {&H.xx, &H.xy, &H.yx, &H.yy}) hess += std::pow(hs_norm(*c, s - 2.0), 2);
    double gmax = 0.0;
    for (std::size_t k = 0; k < grad.x.size(); ++k) gmax = std::max(gmax, std::hypot(grad.x[k], grad.y[k]));
    for (const ScalarField& a : amps) {
      const double lhs = hs_norm(madelung_lift(a, phases[p], 1.0), s);
      const double rhs = hs_norm(a, s) * (1.0 + std::sqrt(hess)) * (1.0 + std::pow(gmax, std::ceil(s)));
      worst = std::max(worst, lhs / rhs);
    }
  }
  MESSAGE("largest ratio " << worst);
  CHECK(worst <= 50.0);
}

TEST_CASE("resolution guard") {
  const GridSpec g = build_grid(12.0, 128);
  const double floor = min_resolved_epsilon(g, 0.5);
  CHECK(floor == doctest::Approx(8.0 * g.spacing * 0.5 / (2.0 * pi)));
  CHECK_NOTHROW(check_resolution(g, 2.0 * floor, 0.5));
  CHECK_THROWS_AS(check_resolution(g, 0.5 * floor, 0.5), ResolutionError);
}
