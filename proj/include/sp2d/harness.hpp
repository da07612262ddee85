#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sp2d/config.hpp"
#include "sp2d/dynamics.hpp"
#include "sp2d/initial_data.hpp"
#include "sp2d/poisson.hpp"

namespace sp2d {

struct ExperimentConfig {
  std::string preset;
  double L = 12.0;
  std::size_t n = 256;
  SolverConfig solver{1.0, 1.0, 2e-4, 0.3, true, PoissonPath::fft, 0};
  DataSpec data;
  SelfCellRule self_cell = SelfCellRule::equal_area_disk;
  std::vector<double> sweep{0.4, 0.2, 0.1, 0.05};
  int order = 2;
  std::filesystem::path output_dir = "sp2d-out";

  GridSpec grid() const { return build_grid(L, n); }
};

// Unknown keys are rejected so that typos do not silently fall back to defaults.
ExperimentConfig experiment_from(const KeyValueConfig& kv);
ExperimentConfig load_experiment(const std::filesystem::path& path);

const std::vector<std::string>& preset_names();

struct CheckResult {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<", "<=", ">=" or "in"
  double bound = 0.0;
  double upper = 0.0;  // only for "in"
  bool pass = false;
};

CheckResult check_below(const std::string& name, double value, double bound);
CheckResult check_at_most(const std::string& name, double value, double bound);
CheckResult check_at_least(const std::string& name, double value, double bound);
CheckResult check_within(const std::string& name, double value, double lo, double hi);

struct RunSummary {
  std::string preset;
  std::vector<CheckResult> checks;
  std::map<std::string, double> metrics;
  std::vector<std::string> errors;

  bool passed() const;
};

// Runs the preset, writing dumps, CSV manifests and summary.json under output_dir.
// Solver failures are recorded in the summary rather than thrown.
RunSummary run_experiment(const ExperimentConfig& cfg);
void write_summary(const RunSummary& summary, const std::filesystem::path& path);

// ||u_1(T) - u_2(T)||_{H^{s-1}} / delta for wave runs from u_0 and u_0 + delta b, with b a
// fixed off-center bump of unit H^{s-1} norm.
double continuity_smoke(const ExperimentConfig& cfg, double delta, double s = 2.0);

// SP2D_THREADS if set, otherwise the hardware concurrency.
std::size_t worker_limit();
// Calls fn(0..count-1) on up to worker_limit() threads and rethrows the first failure.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

// sp2d <preset> --config <path> [--out <dir>]; returns 0 when every check passes,
// 1 on a failed check or solver error, 2 on usage or configuration errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sp2d
