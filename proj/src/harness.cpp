#include "sp2d/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

#include "sp2d/diagnostics.hpp"
#include "sp2d/errors.hpp"
#include "sp2d/field_io.hpp"
#include "sp2d/nls.hpp"
#include "sp2d/wkb.hpp"

namespace sp2d {
namespace {

namespace fs = std::filesystem;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string format_number(double v, const char* fmt = "%.17g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string eps_label(double eps) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "eps_%g", eps);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path, std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
    out_ << "\n";
  }
  void row(const std::vector<double>& values) {
    for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << format_number(values[k]);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

double l2_distance(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::norm(a[k] - b[k]);
  return std::sqrt(s * a.grid().cell_area());
}

double l2_norm(const ScalarField& a) { return std::sqrt(mass(a)); }

double vector_l2(const VectorField2& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < v.x.size(); ++k) s += v.x[k] * v.x[k] + v.y[k] * v.y[k];
  return std::sqrt(s * v.grid().cell_area());
}

double max_speed(const VectorField2& v) {
  double m = 0.0;
  for (std::size_t k = 0; k < v.x.size(); ++k) m = std::max(m, std::hypot(v.x[k], v.y[k]));
  return m;
}

double gradient_mismatch(const HydroState& s) {
  const double nv = vector_l2(s.v);
  if (nv == 0.0) return 0.0;
  VectorField2 d = gradient(s.phi, s.tail);
  d -= s.v;
  return vector_l2(d) / nv;
}

SolverConfig with_eps(SolverConfig c, double eps) {
  c.epsilon = eps;
  return c;
}

std::size_t default_sampling(const SolverConfig& c) {
  if (c.sample_every > 0) return c.sample_every;
  return std::max<std::size_t>(1, step_count(c) / 10);
}

void write_manifest(const fs::path& path, const Trajectory& traj, const SolverConfig& cfg) {
  CsvWriter csv(path, {"t", "mass", "curl_residual", "energy"});
  for (const HydroState& s : traj)
    csv.row({s.t, mass(s.a), curl_residual(s.v, s.tail), hydro_energy(s, cfg.lambda, cfg.epsilon)});
}

AmplitudeKind parse_amplitude(const std::string& s) {
  if (s == "gaussian") return AmplitudeKind::gaussian;
  if (s == "ring") return AmplitudeKind::ring;
  if (s == "dipole") return AmplitudeKind::dipole;
  throw ConfigError("data.amplitude must be gaussian, ring or dipole, got '" + s + "'");
}

PhaseKind parse_phase(const std::string& s) {
  if (s == "zero") return PhaseKind::zero;
  if (s == "neglog") return PhaseKind::neglog;
  throw ConfigError("data.phase must be zero or neglog, got '" + s + "'");
}

void require_keys_consumed(const KeyValueConfig& kv) {
  const auto extra = kv.unread_keys();
  if (extra.empty()) return;
  std::string msg = "unknown config keys:";
  for (const auto& k : extra) msg += " " + k;
  throw ConfigError(msg);
}

void run_poisson_check(const ExperimentConfig& cfg, RunSummary& sum) {
  const GridSpec g = cfg.grid();
  const RealField rho = abs2(base_amplitude(g, cfg.data));
  const double m = quadrature_mass(rho);
  const PotentialResult fft = potential_freespace_fft(rho, cfg.self_cell);
  sum.metrics["mass"] = m;

  if (g.n <= 64) {
    const PotentialResult direct = potential_logkernel_direct(rho, cfg.self_cell);
    double err = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      err = std::max({err, std::abs(direct.P[k] - fft.P[k]), std::abs(direct.gradP.x[k] - fft.gradP.x[k]),
                      std::abs(direct.gradP.y[k] - fft.gradP.y[k])});
    }
    sum.checks.push_back(check_below("direct_vs_fft_max_error", err, 1e-6));
  }

  const RealField newton = newtonian_potential(rho, cfg.self_cell);
  const RealField shift = newton - fft.P;
  double mean = 0.0, sup = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    mean += shift[k];
    sup = std::max(sup, std::abs(newton[k]));
  }
  mean /= static_cast<double>(g.size());
  double var = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) var += (shift[k] - mean) * (shift[k] - mean);
  const double spread = std::sqrt(var / static_cast<double>(g.size()));
  const std::size_t o = g.origin_index();
  sum.checks.push_back(check_below("newtonian_shift_spread", spread / std::max(sup, 1e-300), 1e-8));
  sum.checks.push_back(check_below("newtonian_shift_offset", std::abs(mean - newton(o, o)), 1e-8));

  if (m > 0.0) {
    const double ratio = log_growth_ratio(fft, 0.8 * g.half_width) / (m / kTwoPi);
    sum.checks.push_back(check_at_most("growth_ratio_over_mass", ratio, 1.1));
  }

  const RealField lap = laplacian(fft.P, potential_tail(m));
  double inv = 0.0;
  const double frame = 0.9 * g.half_width;
  for (std::size_t j = 0; j < g.n; ++j)
    for (std::size_t i = 0; i < g.n; ++i)
      if (std::abs(g.coordinate(i)) < frame && std::abs(g.coordinate(j)) < frame)
        inv = std::max(inv, std::abs(lap(i, j) + rho(i, j)));
  sum.metrics["laplacian_inversion_error"] = inv;

  write_field(cfg.output_dir / "density.sp2d", rho);
  write_field(cfg.output_dir / "potential.sp2d", fft.P);
  write_field(cfg.output_dir / "potential_grad_x.sp2d", fft.gradP.x);
  write_field(cfg.output_dir / "potential_grad_y.sp2d", fft.gradP.y);
}

void run_evolve(const ExperimentConfig& cfg, RunSummary& sum) {
  const GridSpec g = cfg.grid();
  const InitialData data = make_initial_data(g, cfg.data, cfg.solver.epsilon);
  SolverConfig sc = cfg.solver;
  sc.sample_every = default_sampling(sc);
  const Trajectory traj = evolve_hydro(data, sc);
  write_manifest(cfg.output_dir / "hydro_manifest.csv", traj, sc);

  const double m0 = mass(traj.front().a);
  double drift = 0.0, curl = 0.0;
  for (const HydroState& s : traj) {
    drift = std::max(drift, std::abs(mass(s.a) / m0 - 1.0));
    curl = std::max(curl, curl_residual(s.v, s.tail));
  }
  const HydroState& fin = traj.back();
  sum.checks.push_back(check_below("mass_drift", drift, 1e-8));
  sum.checks.push_back(check_below("curl_residual", curl, 1e-6));
  if (vector_l2(fin.v) > 0.0) sum.checks.push_back(check_below("phase_gradient_mismatch", gradient_mismatch(fin), 1e-4));
  if (sc.lambda != 0.0 && fin.t > 0.0) {
    const double bound = fin.t * std::abs(sc.lambda) * m0 / kTwoPi;
    const double ratio = phase_growth_ratio(fin.phi, data.Phi, 0.8 * g.half_width);
    sum.metrics["phase_growth"] = ratio;
    sum.checks.push_back(check_at_most("phase_growth_over_bound", ratio / bound, 1.15));
  }
  sum.metrics["final_time"] = fin.t;
  write_field(cfg.output_dir / "a_final.sp2d", fin.a);
  write_field(cfg.output_dir / "phi_final.sp2d", fin.phi);
  write_field(cfg.output_dir / "v_x_final.sp2d", fin.v.x);
  write_field(cfg.output_dir / "v_y_final.sp2d", fin.v.y);
}

struct MadelungResult {
  double diff = 0.0, hydro_drift = 0.0, nls_drift = 0.0, energy_drift = 0.0, gauge = 0.0;
};

void run_madelung(const ExperimentConfig& cfg, RunSummary& sum) {
  const GridSpec g = cfg.grid();
  std::vector<MadelungResult> res(cfg.sweep.size());
  for (double eps : cfg.sweep)
    if (!(eps > 0.0)) throw InvalidArgument("madelung-compare needs eps > 0");
  parallel_for(cfg.sweep.size(), [&](std::size_t i) {
    const double eps = cfg.sweep[i];
    const fs::path dir = cfg.output_dir / eps_label(eps);
    fs::create_directories(dir);
    const InitialData data = make_initial_data(g, cfg.data, eps);
    SolverConfig sc = with_eps(cfg.solver, eps);
    sc.sample_every = default_sampling(sc);
    check_resolution(g, eps, max_speed(gradient(data.Phi, data.phase_tail)));

    const Trajectory traj = evolve_hydro(data, sc);
    write_manifest(dir / "hydro_manifest.csv", traj, sc);
    const ScalarField u0 = madelung_lift(data.A, data.Phi, eps);
    const std::vector<WaveState> waves = evolve_nls(u0, sc);
    CsvWriter csv(dir / "nls_manifest.csv", {"t", "mass", "energy"});
    const double m0 = mass(u0), e0 = energy_functional(u0, sc.lambda, eps);
    MadelungResult& r = res[i];
    for (const WaveState& w : waves) {
      const double m = mass(w.u), e = energy_functional(w.u, sc.lambda, eps);
      csv.row({w.t, m, e});
      r.nls_drift = std::max(r.nls_drift, std::abs(m / m0 - 1.0));
      r.energy_drift = std::max(r.energy_drift, std::abs(e - e0) / std::max(std::abs(e0), 1e-300));
    }
    for (const HydroState& s : traj)
      r.hydro_drift = std::max(r.hydro_drift, std::abs(mass(s.a) / mass(traj.front().a) - 1.0));
    const HydroState& fin = traj.back();
    const ScalarField lifted = madelung_lift(fin.a, fin.phi, eps);
    r.diff = l2_distance(waves.back().u, lifted);

    // a constant phase rotation of the data rotates the solution
    const cplx rot = std::polar(1.0, 0.7);
    ScalarField u0r = u0;
    u0r *= rot;
    SolverConfig ends = sc;
    ends.sample_every = 0;
    ScalarField expect = waves.back().u;
    expect *= rot;
    r.gauge = l2_distance(evolve_nls(u0r, ends).back().u, expect) / l2_norm(expect);

    write_field(dir / "u_nls_final.sp2d", waves.back().u);
    write_field(dir / "u_lifted_final.sp2d", lifted);
  });

  CsvWriter csv(cfg.output_dir / "madelung.csv",
                {"eps", "l2_difference", "hydro_mass_drift", "nls_mass_drift", "energy_drift", "gauge_error"});
  for (std::size_t i = 0; i < res.size(); ++i) {
    const MadelungResult& r = res[i];
    const std::string tag = "[" + eps_label(cfg.sweep[i]) + "]";
    csv.row({cfg.sweep[i], r.diff, r.hydro_drift, r.nls_drift, r.energy_drift, r.gauge});
    sum.checks.push_back(check_below("madelung_l2" + tag, r.diff, 1e-3));
    sum.checks.push_back(check_below("hydro_mass_drift" + tag, r.hydro_drift, 1e-8));
    sum.checks.push_back(check_below("nls_mass_drift" + tag, r.nls_drift, 1e-12));
    sum.checks.push_back(check_below("energy_drift" + tag, r.energy_drift, 1e-4));
    sum.checks.push_back(check_below("gauge_covariance" + tag, r.gauge, 1e-12));
  }
}

void run_wkb(const ExperimentConfig& cfg, RunSummary& sum) {
  const GridSpec g = cfg.grid();
  std::vector<double> eps = cfg.sweep;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  if (eps.size() < 3) throw InvalidArgument("wkb-sweep needs at least three eps values");
  if (!(eps.back() > 0.0)) throw InvalidArgument("sweep eps values must be positive");
  if (cfg.order < 1 || cfg.order > static_cast<int>(eps.size()))
    throw InvalidArgument("sweep.order must lie in [1, number of eps values]");

  const InitialData limit_data = make_initial_data(g, cfg.data, 0.0);
  const double grad_bound = max_speed(gradient(limit_data.Phi, limit_data.phase_tail));
  check_resolution(g, eps.back(), grad_bound);

  // member 0 is the eps = 0 limit run
  std::vector<double> members{0.0};
  members.insert(members.end(), eps.begin(), eps.end());
  std::vector<Trajectory> hydro(members.size());
  std::vector<ScalarField> waves(members.size());
  parallel_for(members.size(), [&](std::size_t i) {
    const double e = members[i];
    const InitialData data = make_initial_data(g, cfg.data, e);
    SolverConfig sc = with_eps(cfg.solver, e);
    sc.sample_every = default_sampling(sc);
    hydro[i] = evolve_hydro(data, sc);
    if (e > 0.0) {
      SolverConfig ends = sc;
      ends.sample_every = 0;
      waves[i] = evolve_nls(madelung_lift(data.A, data.Phi, e), ends).back().u;
    }
  });
  const Trajectory& limit = hydro[0];
  check_resolution(g, eps.back(), max_speed(limit.back().v));
  write_manifest(cfg.output_dir / "limit_manifest.csv", limit, with_eps(cfg.solver, 0.0));

  std::map<double, HydroState> runs;
  for (std::size_t i = 0; i < members.size(); ++i) runs[members[i]] = hydro[i].back();
  const ExpansionSet ex = extract_correctors(runs, cfg.order);

  std::vector<std::pair<double, double>> first, second;
  for (std::size_t i = 1; i < members.size(); ++i) {
    first.emplace_back(members[i], wkb_error(waves[i], ex, 1, members[i]));
    if (cfg.order >= 2) second.emplace_back(members[i], wkb_error(waves[i], ex, 2, members[i]));
  }
  const ConvergenceReport rep1 = fit_convergence_rate(first);
  write_report_csv(rep1, cfg.output_dir / "wkb_rate_n1.csv");
  sum.metrics["wkb_order_n1"] = rep1.fitted_order;
  sum.metrics["wkb_r_squared_n1"] = rep1.r_squared;
  sum.checks.push_back(check_at_least("wkb_order_n1", rep1.fitted_order, 0.9));
  if (cfg.order >= 2) {
    const ConvergenceReport rep2 = fit_convergence_rate(second);
    write_report_csv(rep2, cfg.output_dir / "wkb_rate_n2.csv");
    sum.metrics["wkb_order_n2"] = rep2.fitted_order;
    CsvWriter csv(cfg.output_dir / "wkb_errors.csv", {"eps", "error_n1", "error_n2"});
    for (std::size_t k = 0; k < first.size(); ++k) {
      csv.row({first[k].first, first[k].second, second[k].second});
      sum.checks.push_back(check_below("wkb_n2_over_n1[" + eps_label(first[k].first) + "]",
                                       second[k].second / first[k].second, 1.0));
    }
  }

  // the three largest eps without the limit run
  std::map<double, HydroState> unpinned;
  for (std::size_t i = 1; i <= 3; ++i) unpinned[members[i]] = hydro[i].back();
  const ExpansionSet free_fit = extract_correctors(unpinned, 2);
  sum.checks.push_back(check_below("a0_unpinned_l2", l2_distance(free_fit.a_terms[0], limit.back().a), 5e-3));

  const ScalarField a1_initial = corrector_amplitude(g, cfg.data);
  SolverConfig limit_cfg = with_eps(cfg.solver, 0.0);
  limit_cfg.sample_every = default_sampling(limit_cfg);
  const std::vector<CascadeState> cascade = first_order_cascade(limit, limit_cfg, a1_initial);
  const ScalarField& a1_cascade = cascade.back().a1;
  const double a1_norm = l2_norm(a1_cascade);
  if (a1_norm > 0.0)
    sum.checks.push_back(check_below("cascade_vs_extrapolated_a1", l2_distance(a1_cascade, ex.a_terms[1]) / a1_norm, 5e-2));

  CsvWriter csv(cfg.output_dir / "moments.csv", {"t", "moment_a0", "moment_a1", "pairing_a0_a1"});
  const double m0 = weighted_moment(cascade.front().a0, 1.0, 0);
  const double m1 = weighted_moment(cascade.front().a1, 1.0, 1);
  double g0 = 0.0, g1 = 0.0;
  for (const CascadeState& c : cascade) {
    const double w0 = weighted_moment(c.a0, 1.0, 0), w1 = weighted_moment(c.a1, 1.0, 1);
    double pair = 0.0;
    for (std::size_t k = 0; k < c.a0.size(); ++k) pair += std::real(std::conj(c.a0[k]) * c.a1[k]);
    csv.row({c.t, w0, w1, pair * g.cell_area()});
    g0 = std::max(g0, w0 / m0);
    if (m1 > 0.0) g1 = std::max(g1, w1 / m1);
  }
  sum.checks.push_back(check_at_most("moment_growth_j0", g0, 3.0));
  if (m1 > 0.0) sum.checks.push_back(check_at_most("moment_growth_j1", g1, 3.0));

  write_field(cfg.output_dir / "a1_cascade.sp2d", a1_cascade);
  write_field(cfg.output_dir / "a1_extrapolated.sp2d", ex.a_terms[1]);
  write_field(cfg.output_dir / "phi1_extrapolated.sp2d", ex.phi_terms[1]);
  for (std::size_t j = 0; j < ex.beta_terms.size(); ++j)
    write_field(cfg.output_dir / ("beta_" + std::to_string(j) + ".sp2d"), ex.beta_terms[j]);
}

}  // namespace

CheckResult check_below(const std::string& name, double value, double bound) {
  return {name, value, "<", bound, 0.0, value < bound};
}
CheckResult check_at_most(const std::string& name, double value, double bound) {
  return {name, value, "<=", bound, 0.0, value <= bound};
}
CheckResult check_at_least(const std::string& name, double value, double bound) {
  return {name, value, ">=", bound, 0.0, value >= bound};
}
CheckResult check_within(const std::string& name, double value, double lo, double hi) {
  return {name, value, "in", lo, hi, value >= lo && value <= hi};
}

bool RunSummary::passed() const {
  if (!errors.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"poisson-check", "evolve", "madelung-compare", "wkb-sweep"};
  return names;
}

ExperimentConfig experiment_from(const KeyValueConfig& kv) {
  ExperimentConfig c;
  c.preset = kv.get_string("preset", "");
  c.L = kv.get_double("grid.L", c.L);
  const long n = kv.get_int("grid.n", static_cast<long>(c.n));
  if (n <= 0) throw ConfigError("grid.n must be positive");
  c.n = static_cast<std::size_t>(n);
  c.solver.epsilon = kv.get_double("solver.epsilon", c.solver.epsilon);
  c.solver.lambda = kv.get_double("solver.lambda", c.solver.lambda);
  c.solver.dt = kv.get_double("solver.dt", c.solver.dt);
  c.solver.T = kv.get_double("solver.T", c.solver.T);
  c.solver.dealias = kv.get_bool("solver.dealias", c.solver.dealias);
  const std::string path = kv.get_string("solver.poisson_path", "fft");
  if (path == "fft") {
    c.solver.poisson_path = PoissonPath::fft;
  } else if (path == "direct") {
    c.solver.poisson_path = PoissonPath::direct;
  } else {
    throw ConfigError("solver.poisson_path must be fft or direct");
  }
  const long every = kv.get_int("solver.sample_every", 0);
  if (every < 0) throw ConfigError("solver.sample_every must be >= 0");
  c.solver.sample_every = static_cast<std::size_t>(every);

  c.data.amplitude = parse_amplitude(kv.get_string("data.amplitude", "gaussian"));
  const auto center = kv.get_list("data.center", {0.0, 0.0});
  if (center.size() != 2) throw ConfigError("data.center expects two numbers");
  c.data.center_x = center[0];
  c.data.center_y = center[1];
  c.data.sigma = kv.get_double("data.sigma", c.data.sigma);
  c.data.mass = kv.get_double("data.mass", c.data.mass);
  c.data.offset = kv.get_double("data.offset", c.data.offset);
  c.data.phase = parse_phase(kv.get_string("data.phase", "zero"));
  c.data.phase_scale = kv.get_double("data.phase_scale", c.data.phase_scale);
  c.data.corrector_mass = kv.get_double("data.corrector_mass", c.data.corrector_mass);
  c.data.corrector_sigma = kv.get_double("data.corrector_sigma", c.data.corrector_sigma);

  const std::string rule = kv.get_string("poisson.self_cell", "disk");
  if (rule == "disk") {
    c.self_cell = SelfCellRule::equal_area_disk;
  } else if (rule == "lattice") {
    c.self_cell = SelfCellRule::lattice;
  } else {
    throw ConfigError("poisson.self_cell must be disk or lattice");
  }
  c.sweep = kv.get_list("sweep.eps", c.sweep);
  c.order = static_cast<int>(kv.get_int("sweep.order", c.order));
  c.output_dir = kv.get_string("output.dir", c.output_dir.string());
  require_keys_consumed(kv);

  if (!c.preset.empty() &&
      std::find(preset_names().begin(), preset_names().end(), c.preset) == preset_names().end())
    throw ConfigError("unknown preset '" + c.preset + "'");
  return c;
}

ExperimentConfig load_experiment(const fs::path& path) { return experiment_from(KeyValueConfig::load(path)); }

RunSummary run_experiment(const ExperimentConfig& cfg) {
  RunSummary sum;
  sum.preset = cfg.preset;
  fs::create_directories(cfg.output_dir);
  try {
    if (cfg.preset == "poisson-check") {
      run_poisson_check(cfg, sum);
    } else if (cfg.preset == "evolve") {
      run_evolve(cfg, sum);
    } else if (cfg.preset == "madelung-compare") {
      run_madelung(cfg, sum);
    } else if (cfg.preset == "wkb-sweep") {
      run_wkb(cfg, sum);
    } else {
      throw ConfigError("unknown preset '" + cfg.preset + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    sum.errors.emplace_back(e.what());
  }
  write_summary(sum, cfg.output_dir / "summary.json");
  return sum;
}

void write_summary(const RunSummary& summary, const fs::path& path) {
  nlohmann::json j;
  j["preset"] = summary.preset;
  j["passed"] = summary.passed();
  j["checks"] = nlohmann::json::array();
  for (const CheckResult& c : summary.checks) {
    nlohmann::json e{{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"bound", c.bound}, {"pass", c.pass}};
    if (c.relation == "in") e["upper"] = c.upper;
    j["checks"].push_back(e);
  }
  j["metrics"] = summary.metrics;
  j["errors"] = summary.errors;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

double continuity_smoke(const ExperimentConfig& cfg, double delta, double s) {
  if (!(cfg.solver.epsilon > 0.0)) throw InvalidArgument("continuity smoke runs the wave solver and needs eps > 0");
  if (delta == 0.0) return 0.0;
  const GridSpec g = cfg.grid();
  const InitialData data = make_initial_data(g, cfg.data, cfg.solver.epsilon);
  const ScalarField u0 = madelung_lift(data.A, data.Phi, cfg.solver.epsilon);
  ScalarField bump = gaussian_amplitude(g, 0.5 * cfg.data.sigma, -0.25 * cfg.data.sigma, cfg.data.sigma, 1.0);
  bump *= cplx(1.0 / hs_norm(bump, s - 1.0));
  ScalarField u1 = u0;
  u1.add_scaled(cplx(delta), bump);
  SolverConfig sc = cfg.solver;
  sc.sample_every = 0;
  const ScalarField a = evolve_nls(u0, sc).back().u;
  const ScalarField b = evolve_nls(u1, sc).back().u;
  return hs_norm(b - a, s - 1.0) / std::abs(delta);
}

std::size_t worker_limit() {
  std::size_t limit = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SP2D_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) limit = static_cast<std::size_t>(v);
  }
  return limit;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_limit(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"2D semiclassical Schrodinger-Poisson experiments"};
  app.name("sp2d");
  std::string preset, config_path, out_dir;
  app.add_option("preset", preset, "poisson-check | evolve | madelung-compare | wkb-sweep")->required();
  app.add_option("--config", config_path, "flat key = value config file")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return 2;
  }
  if (std::find(preset_names().begin(), preset_names().end(), preset) == preset_names().end()) {
    err << "unknown preset '" << preset << "'\n" << app.help();
    return 2;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_experiment(config_path);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  if (!cfg.preset.empty() && cfg.preset != preset) {
    err << "config is for preset '" << cfg.preset << "', not '" << preset << "'\n";
    return 2;
  }
  cfg.preset = preset;
  if (!out_dir.empty()) cfg.output_dir = out_dir;

  RunSummary sum;
  try {
    sum = run_experiment(cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  for (const CheckResult& c : sum.checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << format_number(c.value, "%.6e") << " " << c.relation << " "
        << format_number(c.bound, "%g");
    if (c.relation == "in") out << " .. " << format_number(c.upper, "%g");
    out << "\n";
  }
  for (const auto& e : sum.errors) out << "ERROR " << e << "\n";
  return sum.passed() ? 0 : 1;
}

}  // namespace sp2d
