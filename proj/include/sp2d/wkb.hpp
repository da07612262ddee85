#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "sp2d/dynamics.hpp"
#include "sp2d/grid.hpp"

namespace sp2d {

// sigma_k counts how often the part k occurs; sum_k k sigma_k = l.
using WeightedPartition = std::vector<int>;

// Descending lexicographic order, e.g. l = 3 gives (3,0,0), (1,1,0), (0,0,1).
std::vector<WeightedPartition> weighted_partitions(int l);

// beta_j = e^{i phi_1} (a_j + sum_{l=1}^{j} a_{j-l} sum_{sigma of l} prod_k (i phi_{k+1})^{sigma_k} / sigma_k!)
// phi_terms is indexed from phi_0, so it must hold at least j + 2 entries.
ScalarField assemble_beta(int j, const std::vector<ScalarField>& a_terms, const std::vector<RealField>& phi_terms);

struct ExpansionSet {
  double eps0 = 0.0;
  std::vector<ScalarField> a_terms;
  std::vector<RealField> phi_terms;
  std::vector<ScalarField> beta_terms;
};

// Pointwise polynomial fit of degree N in eps. A run at eps = 0 pins the constant
// terms to the limit solution; the remaining runs are fitted by least squares.
ExpansionSet extract_correctors(const std::map<double, HydroState>& runs, int order);

struct CascadeState {
  double t = 0.0;
  ScalarField a0;
  VectorField2 v0;
  RealField phi0;
  RadialTail tail0;
  ScalarField a1;
  VectorField2 v1;
  RealField phi1;
  RadialTail tail1;
};

// Linearization of the hydrodynamic system around its eps = 0 solution, integrated
// jointly with that solution by RK4 and sampled at the limit run's sample times.
std::vector<CascadeState> first_order_cascade(const Trajectory& limit_run, const SolverConfig& cfg,
                                              const std::optional<ScalarField>& a1_initial = std::nullopt);

// || u e^{-i phi_0/eps} - sum_{j<N} eps^j beta_j ||_{L^2}
double wkb_error(const ScalarField& u, const ExpansionSet& expansion, int N, double eps);

struct ConvergenceReport {
  std::vector<double> eps_values;
  std::vector<double> errors;
  double fitted_order = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS misfit of the log-log line
  double r_squared = 0.0;
  bool flagged = false;   // fit explains little of the spread (or there is none)
};

ConvergenceReport fit_convergence_rate(std::vector<std::pair<double, double>> pairs);
void write_report_csv(const ConvergenceReport& report, const std::filesystem::path& path);

}  // namespace sp2d
