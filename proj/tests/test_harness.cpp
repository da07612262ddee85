#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "sp2d/diagnostics.hpp"
#include "sp2d/harness.hpp"
#include "sp2d/initial_data.hpp"

using namespace sp2d;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "sp2d_test_harness" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double max_abs(const RealField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

int cli(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  std::vector<std::string> full{"sp2d"};
  full.insert(full.end(), args.begin(), args.end());
  const int code = run_cli(full, out, err);
  if (out_text) *out_text = out.str();
  return code;
}

const char* kEvolve =
    "preset = evolve\n"
    "grid.L = 10\n"
    "grid.n = 128\n"
    "solver.epsilon = 0.5\n"
    "solver.dt = 5e-3\n"
    "solver.T = 0.05\n"
    "solver.sample_every = 5\n";

}  // namespace

TEST_CASE("key-value parsing") {
  const KeyValueConfig kv = KeyValueConfig::parse("# header\n grid.L = 12 # trailing\n\nsweep.eps = 0.4, 0.2,0.1\nflag = on\n");
  CHECK(kv.get_double("grid.L", 0.0) == 12.0);
  CHECK(kv.get_list("sweep.eps", {}) == std::vector<double>{0.4, 0.2, 0.1});
  CHECK(kv.get_bool("flag", false));
  CHECK(kv.get_int("missing", 7) == 7);
  CHECK(kv.unread_keys().empty());
  CHECK_THROWS_AS(KeyValueConfig::parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("just words\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("= 3\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("x = abc\n").get_double("x", 0.0), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("x = 1.5\n").get_int("x", 0), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("x = 1,,2\n").get_list("x", {}), ConfigError);
}

TEST_CASE("experiment configs reject unknown keys and values") {
  const ExperimentConfig c = experiment_from(KeyValueConfig::parse("preset = evolve\ngrid.n = 64\ndata.phase = neglog\n"));
  CHECK(c.n == 64);
  CHECK(c.data.phase == PhaseKind::neglog);
  CHECK(c.L == 12.0);
  CHECK_THROWS_AS(experiment_from(KeyValueConfig::parse("preset = evolve\ngrid.nn = 64\n")), ConfigError);
  CHECK_THROWS_AS(experiment_from(KeyValueConfig::parse("preset = nonsense\n")), ConfigError);
  CHECK_THROWS_AS(experiment_from(KeyValueConfig::parse("data.amplitude = square\n")), ConfigError);
  CHECK_THROWS_AS(experiment_from(KeyValueConfig::parse("solver.poisson_path = magic\n")), ConfigError);
  CHECK(preset_names().size() == 4);
}

TEST_CASE("initial data factory") {
  const GridSpec g = build_grid(12.0, 256);
  DataSpec spec;
  const InitialData d = make_initial_data(g, spec);
  CHECK(std::abs(mass(d.A) - 1.0) < 1e-10);
  CHECK(max_abs(d.Phi) == 0.0);
  CHECK(d.phase_tail.empty());
  const VectorField2 zero_grad = gradient(d.Phi, d.phase_tail);
  CHECK(max_abs(zero_grad.x) == 0.0);

  spec.phase = PhaseKind::neglog;
  const InitialData n = make_initial_data(g, spec);
  const VectorField2 gp = gradient(n.Phi, n.phase_tail);
  double gmax = 0.0, dev = 0.0;
  for (std::size_t j = 0; j < g.n; ++j)
    for (std::size_t i = 0; i < g.n; ++i) {
      const double x = g.coordinate(i), y = g.coordinate(j), r2 = x * x + y * y;
      gmax = std::max(gmax, std::hypot(gp.x(i, j), gp.y(i, j)));
      dev = std::max({dev, std::abs(gp.x(i, j) + x / (1.0 + r2)), std::abs(gp.y(i, j) + y / (1.0 + r2))});
    }
  CHECK(dev < 1e-10);
  // r / (1 + r^2) peaks at r = 1; the lattice touches r = 1 at (1, 0)
  CHECK(gmax == doctest::Approx(0.5).epsilon(2e-6));

  for (AmplitudeKind a : {AmplitudeKind::ring, AmplitudeKind::dipole}) {
    DataSpec s;
    s.amplitude = a;
    s.mass = 2.5;
    CHECK(std::abs(mass(make_initial_data(g, s).A) - 2.5) < 1e-10);
  }
  DataSpec narrow;
  narrow.sigma = 0.2;
  CHECK_THROWS_AS(make_initial_data(g, narrow), ResolutionError);
  DataSpec wide;
  wide.sigma = 3.0;
  CHECK_THROWS_AS(make_initial_data(g, wide), ResolutionError);
}

TEST_CASE("CLI exit codes") {
  const fs::path dir = scratch("cli");
  const fs::path ok = write_config(dir, "preset = poisson-check\ngrid.L = 6\ngrid.n = 32\ndata.sigma = 1.5\n");
  std::string text;
  CHECK(cli({"poisson-check", "--config", ok.string(), "--out", (dir / "ok").string()}, &text) == 0);
  CHECK(text.find("PASS direct_vs_fft") != std::string::npos);
  CHECK(fs::exists(dir / "ok" / "summary.json"));
  CHECK(cli({"no-such-preset", "--config", ok.string()}) == 2);
  CHECK(cli({"poisson-check"}) == 2);
  CHECK(cli({"poisson-check", "--config", (dir / "missing.cfg").string()}) == 2);
  const fs::path typo = dir / "typo.cfg";
  std::ofstream(typo) << "grid.L = 6\ngrid.nn = 32\n";
  CHECK(cli({"poisson-check", "--config", typo.string()}) == 2);

  const fs::path bad = dir / "bad.cfg";
  std::ofstream(bad) << "grid.L = 10\ngrid.n = 128\ndata.phase = neglog\ndata.phase_scale = 40\n"
                        "solver.dt = 0.05\nsolver.T = 0.1\nsolver.lambda = 0\n";
  CHECK(cli({"evolve", "--config", bad.string(), "--out", (dir / "bad").string()}) == 1);
  fs::remove_all(dir);
}

TEST_CASE("reruns are byte identical") {
  const fs::path dir = scratch("determinism");
  const fs::path cfg = write_config(dir, kEvolve);
  REQUIRE(cli({"evolve", "--config", cfg.string(), "--out", (dir / "a").string()}) == 0);
  REQUIRE(cli({"evolve", "--config", cfg.string(), "--out", (dir / "b").string()}) == 0);
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    const fs::path other = dir / "b" / e.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(slurp(e.path()) == slurp(other));
    if (e.path().extension() == ".csv") ++compared;
  }
  CHECK(compared >= 1);
  fs::remove_all(dir);
}

TEST_CASE("continuity smoke") {
  ExperimentConfig c = experiment_from(KeyValueConfig::parse(kEvolve));
  c.solver.lambda = 1.0;
  CHECK(continuity_smoke(c, 0.0) == 0.0);
  std::vector<double> ratios;
  for (double d : {1e-2, 1e-3, 1e-4}) ratios.push_back(continuity_smoke(c, d));
  for (double r : ratios) {
    CHECK(r > 0.5 * ratios.front());
    CHECK(r < 2.0 * ratios.front());
  }
  c.solver.lambda = 0.0;
  CHECK(continuity_smoke(c, 1e-3) == doctest::Approx(1.0).epsilon(1e-6));
  c.solver.epsilon = 0.0;
  CHECK_THROWS_AS(continuity_smoke(c, 1e-3), InvalidArgument);
}
