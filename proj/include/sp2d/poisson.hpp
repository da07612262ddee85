#pragma once

#include <utility>
#include <vector>

#include "sp2d/grid.hpp"
#include "sp2d/spectral.hpp"

namespace sp2d {

// Value used for the log kernel on the singular cell, i.e. an approximation of the
// cell average of log|z|. The disk rule replaces the square cell by the disk of equal
// area; the lattice rule is the constant that makes the punctured trapezoid sum of
// log|z| exact for smooth integrands up to O(h^4).
enum class SelfCellRule { equal_area_disk, lattice };

double log_self_cell(double h, SelfCellRule rule);

struct PotentialResult {
  RealField P;  // zero at the origin sample
  VectorField2 gradP;
  double mass = 0.0;
};

using Hessian = Jacobian;

PotentialResult potential_logkernel_direct(const RealField& f, SelfCellRule rule = SelfCellRule::equal_area_disk);
PotentialResult potential_freespace_fft(const RealField& f, SelfCellRule rule = SelfCellRule::equal_area_disk);
VectorField2 grad_potential(const RealField& f);
Hessian hessian_riesz(const RealField& f);
RealField newtonian_potential(const RealField& f, SelfCellRule rule = SelfCellRule::equal_area_disk);

// P alone through the fast path, without the kernel-route gradient.
RealField potential_only(const RealField& f, SelfCellRule rule = SelfCellRule::equal_area_disk);

double quadrature_mass(const RealField& f);

// Far field of P for a density of the given total mass: -(mass/2pi) G(|x|) + const.
RadialTail potential_tail(double mass);
// Spectral gradient of P with its logarithmic far field handled analytically.
VectorField2 spectral_potential_gradient(const RealField& P, double mass);

double log_growth_ratio(const PotentialResult& result, double radius);

struct NeutralitySample {
  double radius;
  double energy;
};
std::vector<NeutralitySample> neutrality_diagnostic(const RealField& f, const std::vector<double>& radii);

// Bilinear interpolation of a periodic grid field at an arbitrary point inside [-L, L)^2.
double interpolate(const RealField& f, double x, double y);

}  // namespace sp2d
