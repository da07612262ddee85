#pragma once

#include <array>
#include <vector>

#include "sp2d/grid.hpp"

namespace sp2d {

// DFT coefficients of a field. Real fields use the half layout: n rows over x2 and
// n/2 + 1 columns over x1. Forward transforms are unnormalized, inverses divide by n^2.
struct Spectrum {
  GridSpec grid;
  bool half = false;
  AlignedVector<cplx> data;

  std::size_t cols() const { return half ? grid.n / 2 + 1 : grid.n; }
  std::size_t rows() const { return grid.n; }
};

Spectrum forward(const ScalarField& f);
Spectrum forward(const RealField& f);
ScalarField inverse_complex(const Spectrum& s);
// The input is consumed as scratch by the complex-to-real transform.
RealField inverse_real(Spectrum s);

// Visits every stored mode: fn(value, k1, k2, nyquist1, nyquist2), with k the angular
// wavenumbers and nyquist flags set on the unpaired n/2 modes.
template <class F>
void for_each_mode(Spectrum& s, F&& fn) {
  const GridSpec& g = s.grid;
  const std::size_t cols = s.cols();
  std::vector<double> k(g.n);
  for (std::size_t i = 0; i < g.n; ++i) k[i] = g.wavenumber(i);
  for (std::size_t r = 0; r < g.n; ++r) {
    const double k2 = k[r];
    const bool nyq2 = (r == g.n / 2);
    cplx* row = s.data.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) fn(row[c], k[c], k2, c == g.n / 2, nyq2);
  }
}

// Analytic far field of the form bracket * log<x> + gaussian * G(|x|), where
// G(r) = Ein(r^2/2)/2 is 2*pi times the logarithmic potential of a unit Gaussian
// (shifted so G(0) = 0). The kinetic coefficients multiply r^2 q_a q_b for the radial
// factors q of the first two shapes, which is how products of their gradients grow.
// Spectral derivatives act on the remainder after removing the tail, which keeps
// non-periodic log-growing phases and 1/r velocities differentiable.
struct RadialTail {
  static constexpr std::size_t kShapes = 5;

  double bracket = 0.0;
  double gaussian = 0.0;
  double kinetic_bb = 0.0;
  double kinetic_bg = 0.0;
  double kinetic_gg = 0.0;

  std::array<double, kShapes> coefficients() const { return {bracket, gaussian, kinetic_bb, kinetic_bg, kinetic_gg}; }
  bool empty() const { return bracket == 0.0 && gaussian == 0.0 && kinetic_bb == 0.0 && kinetic_bg == 0.0 && kinetic_gg == 0.0; }
  RadialTail base() const { return {bracket, gaussian}; }
  RadialTail& add_scaled(double c, const RadialTail& o);
  double value(double x, double y) const;
  // Gradient equals q(r^2) * x; the Hessian is q I + 2 q' x x^T.
  double radial_factor(double r2) const;
  double radial_factor_derivative(double r2) const;
};

// Tail of grad(u) . grad(w) for the log and Gaussian parts of u and w.
RadialTail gradient_product(const RadialTail& u, const RadialTail& w);

double gaussian_log_profile(double r);

RealField sample_tail(const GridSpec& g, const RadialTail& t);
VectorField2 sample_tail_gradient(const GridSpec& g, const RadialTail& t);

struct Jacobian {
  // component d_b v_a stored as a_b
  RealField xx, xy, yx, yy;
};

ComplexVectorField gradient(const ScalarField& f);
ComplexVectorField gradient_from_spectrum(const Spectrum& fhat);
VectorField2 gradient(const RealField& f, const RadialTail& tail = {});
ScalarField laplacian(const ScalarField& f);
RealField laplacian(const RealField& f, const RadialTail& tail = {});
RealField divergence(const VectorField2& v, const RadialTail& tail = {});
RealField curl(const VectorField2& v, const RadialTail& tail = {});
Jacobian jacobian(const VectorField2& v, const RadialTail& tail = {});

// Value and gradient of c_dot (u . w) + c_p P, where u and w carry the tails tu and tw
// and P grows like ptail. The gradient is spectral on the part left after removing
// the analytic far field, which is optionally dealiased, so it is curl free to
// roundoff. remainder holds the value minus that far field; laplacian, when requested,
// is the divergence of gradient.
struct GradientPair {
  RealField value;
  RealField remainder;
  VectorField2 gradient;
  RealField laplacian;
};
GradientPair bernoulli_gradient(const VectorField2& u, const RadialTail& tu, const VectorField2& w,
                                const RadialTail& tw, double c_dot, const RealField& P, const RadialTail& ptail,
                                double c_p, bool smooth, bool with_laplacian = false);

// Multiplies the spectrum by (1 + |xi|^2)^{s/2}.
ScalarField bessel_multiplier(const ScalarField& f, double s);

std::size_t dealias_cutoff(std::size_t n);
void dealias(Spectrum& s);
ScalarField dealias(const ScalarField& f);
RealField dealias(const RealField& f);

// Multiplies each mode by exp(-i * coef * |xi|^2).
void apply_free_propagator(Spectrum& s, double coef);
ScalarField propagate_free(const ScalarField& f, double coef);

// The same multiplier tabulated once for repeated use.
class FreePropagator {
 public:
  FreePropagator(const GridSpec& g, double coef);
  void apply(Spectrum& s) const;
  double coefficient() const { return coef_; }

 private:
  GridSpec grid_;
  double coef_;
  AlignedVector<cplx> factors_;
};

}  // namespace sp2d
