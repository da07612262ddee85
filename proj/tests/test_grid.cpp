#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "sp2d/field_io.hpp"
#include "sp2d/grid.hpp"
#include "sp2d/spectral.hpp"

using namespace sp2d;
using std::numbers::pi;

namespace {

double max_abs_diff(const RealField& a, const RealField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double l2(const ScalarField& f) {
  double s = 0.0;
  for (const cplx& v : f.values()) s += std::norm(v);
  return std::sqrt(s * f.grid().cell_area());
}

double gauss(double x, double y) { return std::exp(-0.5 * (x * x + y * y)); }

ScalarField plane_wave(const GridSpec& g, int m1, int m2) {
  const double k1 = pi * m1 / g.half_width, k2 = pi * m2 / g.half_width;
  return ScalarField::generate(g, [&](double x, double y) { return std::polar(1.0, k1 * x + k2 * y); });
}

}  // namespace

TEST_CASE("build_grid spacing and wavenumbers") {
  const GridSpec g = build_grid(8.0, 64);
  CHECK(g.spacing == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g.spacing * g.n == doctest::Approx(16.0).epsilon(1e-15));
  CHECK(std::abs(g.wavenumber(32)) == doctest::Approx(4.0 * pi).epsilon(1e-15));
  double kmax = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) kmax = std::max(kmax, std::abs(g.wavenumber(i)));
  CHECK(kmax == doctest::Approx(4.0 * pi).epsilon(1e-15));
  CHECK(g.coordinate(g.origin_index()) == 0.0);
  CHECK(g.coordinate(0) == -8.0);
}

TEST_CASE("build_grid rejects bad shapes") {
  CHECK_THROWS_AS(build_grid(8.0, 63), InvalidGrid);
  CHECK_THROWS_AS(build_grid(8.0, 6), InvalidGrid);
  CHECK_THROWS_AS(build_grid(0.0, 64), InvalidGrid);
  CHECK_THROWS_AS(build_grid(-1.0, 64), InvalidGrid);
}

TEST_CASE("fields on different grids do not mix") {
  RealField a(build_grid(8.0, 64)), b(build_grid(8.0, 32));
  CHECK_THROWS_AS(a += b, InvalidArgument);
}

TEST_CASE("gradient of a resolved sine is exact") {
  const GridSpec g = build_grid(5.0, 64);
  const double k = 2.0 * pi / g.half_width;
  const RealField f = RealField::generate(g, [&](double x, double) { return std::sin(k * x); });
  const RealField expect = RealField::generate(g, [&](double x, double) { return k * std::cos(k * x); });
  const VectorField2 d = gradient(f);
  CHECK(max_abs_diff(d.x, expect) < 1e-12);
  CHECK(max_abs_diff(d.y, RealField(g)) < 1e-12);
  const RealField lap = laplacian(f);
  CHECK(max_abs_diff(lap, -k * k * f) < 1e-11);
}

TEST_CASE("derivatives of constants vanish") {
  const GridSpec g = build_grid(5.0, 32);
  const ScalarField c(g, cplx(2.0, -1.0));
  const ComplexVectorField d = gradient(c);
  CHECK(max_abs_diff(d.x, ScalarField(g)) < 1e-13);
  CHECK(max_abs_diff(laplacian(c), ScalarField(g)) < 1e-13);
}

TEST_CASE("Gaussian derivatives match fine-step finite differences") {
  const GridSpec g = build_grid(10.0, 128);
  const RealField f = RealField::generate(g, gauss);
  const double d = 1e-3;
  const RealField fd_x = RealField::generate(g, [&](double x, double y) {
    return (-gauss(x + 2 * d, y) + 8 * gauss(x + d, y) - 8 * gauss(x - d, y) + gauss(x - 2 * d, y)) / (12 * d);
  });
  const RealField fd_lap = RealField::generate(g, [&](double x, double y) {
    auto second = [&](double dx, double dy) {
      return (-gauss(x + 2 * dx, y + 2 * dy) + 16 * gauss(x + dx, y + dy) - 30 * gauss(x, y) +
              16 * gauss(x - dx, y - dy) - gauss(x - 2 * dx, y - 2 * dy)) /
             (12 * d * d);
    };
    return second(d, 0) + second(0, d);
  });
  CHECK(max_abs_diff(gradient(f).x, fd_x) < 1e-6);
  CHECK(max_abs_diff(laplacian(f), fd_lap) < 1e-5);
}

TEST_CASE("real-input gradient is real and the Laplacian is div grad") {
  const GridSpec g = build_grid(10.0, 64);
  const RealField f = RealField::generate(g, [](double x, double y) { return gauss(x - 0.5, 1.2 * y); });
  const ComplexVectorField gc = gradient(to_complex(f));
  double im = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) im = std::max({im, std::abs(gc.x[k].imag()), std::abs(gc.y[k].imag())});
  CHECK(im < 1e-12);
  const RealField div = divergence(gradient(f));
  CHECK(max_abs_diff(div, laplacian(f)) < 1e-12);
}

TEST_CASE("Parseval") {
  const GridSpec g = build_grid(6.0, 32);
  const ScalarField f = ScalarField::generate(g, [](double x, double y) { return cplx(gauss(x, y), x * gauss(x, y)); });
  const Spectrum s = forward(f);
  double spec = 0.0;
  for (const cplx& c : s.data) spec += std::norm(c);
  spec *= g.cell_area() / static_cast<double>(g.size());
  CHECK(std::sqrt(spec) == doctest::Approx(l2(f)).epsilon(1e-12));
}

TEST_CASE("Bessel multiplier") {
  const GridSpec g = build_grid(4.0, 32);
  const ScalarField w = plane_wave(g, 3, -2);
  const double k2 = std::pow(pi * 3 / 4.0, 2) + std::pow(pi * 2 / 4.0, 2);
  CHECK(max_abs_diff(bessel_multiplier(w, 0.0), w) < 1e-12);
  CHECK(max_abs_diff(bessel_multiplier(w, 2.0), (1.0 + k2) * w) < 1e-11);
  const ScalarField f = ScalarField::generate(g, [](double x, double y) { return cplx(gauss(x, y), gauss(y, x + 1)); });
  CHECK(max_abs_diff(bessel_multiplier(bessel_multiplier(f, 1.5), -1.5), f) < 1e-12);
  CHECK(max_abs_diff(bessel_multiplier(bessel_multiplier(f, 0.7), 1.1), bessel_multiplier(f, 1.8)) < 1e-12);
}

TEST_CASE("dealias projection") {
  const GridSpec g = build_grid(4.0, 48);
  CHECK(dealias_cutoff(48) == 16);
  const ScalarField low = plane_wave(g, 16, -5) + plane_wave(g, 2, 16);
  CHECK(max_abs_diff(dealias(low), low) < 1e-12);
  const ScalarField high = plane_wave(g, 17, 0);
  CHECK(max_abs_diff(dealias(high), ScalarField(g)) < 1e-12);
  const ScalarField mixed = ScalarField::generate(g, [](double x, double y) {
    return cplx(std::exp(-std::abs(x) - std::abs(y)), 0.0);
  });
  CHECK(l2(dealias(mixed)) <= l2(mixed));
}

TEST_CASE("radial tail derivatives match finite differences") {
  const GridSpec g = build_grid(10.0, 64);
  const RadialTail t{-0.7, 0.3, 0.2, -0.4, 0.5};
  const double d = 1e-4;
  for (double x : {0.3, 0.6, 1.2, 2.0, 7.5}) {
    const double y = 0.4 * x - 1.0;
    const double r2 = x * x + y * y;
    const double fd = (t.value(x + d, y) - t.value(x - d, y)) / (2 * d);
    CHECK(t.radial_factor(r2) * x == doctest::Approx(fd).epsilon(1e-7));
    const double dq = (t.radial_factor(r2 + d) - t.radial_factor(r2 - d)) / (2 * d);
    CHECK(t.radial_factor_derivative(r2) == doctest::Approx(dq).epsilon(1e-6));
  }
  const RealField f = sample_tail(g, t);
  const VectorField2 gr = gradient(f, t);
  CHECK(max_abs_diff(gr.x, sample_tail_gradient(g, t).x) < 1e-12);
  CHECK(max_abs_diff(curl(gr, t), RealField(g)) < 1e-12);
  CHECK(max_abs_diff(divergence(gr, t), laplacian(f, t)) < 1e-12);
}

TEST_CASE("gradient products of tails have the kinetic shapes") {
  const RadialTail u{0.8, -0.3}, w{-0.2, 1.1};
  const RadialTail p = gradient_product(u, w);
  for (double x : {0.1, 0.9, 3.0, 8.0}) {
    const double y = 1.0 - 0.3 * x;
    const double r2 = x * x + y * y;
    CHECK(p.value(x, y) == doctest::Approx(u.radial_factor(r2) * w.radial_factor(r2) * r2).epsilon(1e-14));
  }
}

TEST_CASE("field dump layout and round trip") {
  const GridSpec g = build_grid(3.0, 8);
  const ScalarField f = ScalarField::generate(g, [](double x, double y) { return cplx(x, -y); });
  const auto dir = std::filesystem::temp_directory_path() / "sp2d_test_grid";
  std::filesystem::create_directories(dir);
  const auto path = dir / "f.sp2d";
  write_field(path, f);
  CHECK(std::filesystem::file_size(path) == 4 + 4 + 4 + 8 + 1 + 16 * g.size());
  std::ifstream in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "SP2D");
  std::uint32_t version = 0, n = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  CHECK(version == 1);
  CHECK(n == 8);
  const ScalarField back = read_complex_field(path);
  CHECK(back.grid() == g);
  CHECK(max_abs_diff(back, f) == 0.0);
  CHECK_THROWS(read_real_field(path));

  const RealField r = real_part(f);
  write_field(dir / "r.sp2d", r);
  CHECK(max_abs_diff(read_real_field(dir / "r.sp2d"), r) == 0.0);
  std::filesystem::remove_all(dir);
}
