#pragma once

#include <string>
#include <vector>

#include "sp2d/dynamics.hpp"
#include "sp2d/grid.hpp"
#include "sp2d/nls.hpp"

namespace sp2d {

struct NormReport {
  std::string name;
  double value = 0.0;
  double parameter = 0.0;
  int index = 0;
};

double lp_norm(const ScalarField& f, double p);
double lp_norm(const RealField& f, double p);
double hs_norm(const ScalarField& f, double s);
double hs_norm(const RealField& f, double s);
// ||f||_inf + ||grad f||_{H^{s-1}}
double zhidkov_norm(const ScalarField& f, double s);
double zhidkov_norm(const RealField& f, double s, const RadialTail& tail = {});

double mass(const ScalarField& f);
double weighted_moment(const ScalarField& f, double alpha, int j);

// (eps^2/2) ||grad u||^2 + (lambda/2) int Newtonian(|u|^2) |u|^2; eps = 1 gives the
// unscaled functional.
double energy_functional(const ScalarField& u, double lambda, double eps = 1.0);

// Energy of the lifted wave a e^{i phi/eps}: (1/2)||eps grad a + i a v||^2 plus the
// potential term. Stays meaningful at eps = 0.
double hydro_energy(const HydroState& s, double lambda, double eps);

// <x> = (1 + |x|^2)^{1/2}, smoothly flattened to a constant between 0.75 R and R with
// R = cutoff * L, so its gradient is bounded and vanishes near the edges.
RealField truncated_bracket_weight(const GridSpec& grid, double cutoff = 0.9);

// |centered difference of int w|u|^2 - eps Im int (grad w . grad u) conj(u)| at the middle sample.
double weight_identity_residual(const std::vector<WaveState>& samples, const RealField& w, double eps);
// Hydrodynamic form: the right side also carries int (grad w . v) |a|^2.
double weight_identity_residual(const Trajectory& samples, const RealField& w, double eps);

}  // namespace sp2d
