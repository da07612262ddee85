#include "sp2d/spectral.hpp"

#include <fftw3.h>

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace sp2d {
namespace {

struct PlanSet {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

// Plans are built once per size with FFTW_ESTIMATE so that reruns pick the same
// algorithm; execution through the new-array interface is thread safe.
const PlanSet& plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, PlanSet> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  const int ni = static_cast<int>(n);
  AlignedVector<cplx> h(n * (n / 2 + 1));
  AlignedVector<double> r(n * n);
  PlanSet p;
  p.r2c = fftw_plan_dft_r2c_2d(ni, ni, r.data(), as_fftw(h.data()), FFTW_ESTIMATE);
  p.c2r = fftw_plan_dft_c2r_2d(ni, ni, as_fftw(h.data()), r.data(), FFTW_ESTIMATE);
  return cache.emplace(n, p).first->second;
}

constexpr double kSeriesSwitch = 1.0;

// d-th derivative of (1 - e^{-s/2}) / s = (1/2) sum_k (-1/2)^k s^k / (k+1)!
double gaussian_factor(double s, int d) {
  if (s < kSeriesSwitch) {
    double sum = 0.0;
    for (int k = d; k < 26; ++k) {
      double c = std::pow(-0.5, k) / std::tgamma(k + 2.0);
      for (int m = 0; m < d; ++m) c *= k - m;
      sum += c * std::pow(s, k - d);
    }
    return 0.5 * sum;
  }
  const double e = std::exp(-0.5 * s), em1 = std::expm1(-0.5 * s);
  if (d == 0) return -em1 / s;
  if (d == 1) return (0.5 * s * e + em1) / (s * s);
  return -e / (4.0 * s) - e / (s * s) - 2.0 * em1 / (s * s * s);
}

struct ShapeSample {
  std::array<double, RadialTail::kShapes> value{}, q{}, dq{};
};

double gaussian_log_value(double r2);

// Values, radial factors and their s-derivatives of every tail shape at s = r^2.
ShapeSample shapes_at(double s) {
  ShapeSample out;
  const double ib = 1.0 / (1.0 + s);
  const double A[2] = {ib, gaussian_factor(s, 0)};
  const double A1[2] = {-ib * ib, gaussian_factor(s, 1)};
  const double A2[2] = {2.0 * ib * ib * ib, gaussian_factor(s, 2)};
  out.value[0] = 0.5 * std::log1p(s);
  out.value[1] = gaussian_log_value(s);
  for (int k = 0; k < 2; ++k) {
    out.q[k] = A[k];
    out.dq[k] = A1[k];
  }
  const int pairs[3][2] = {{0, 0}, {0, 1}, {1, 1}};
  for (int m = 0; m < 3; ++m) {
    const int u = pairs[m][0], w = pairs[m][1];
    const double ab = A[u] * A[w], d1 = A1[u] * A[w] + A[u] * A1[w];
    const double d2 = A2[u] * A[w] + 2.0 * A1[u] * A1[w] + A[u] * A2[w];
    out.value[2 + m] = s * ab;
    out.q[2 + m] = 2.0 * ab + 2.0 * s * d1;
    out.dq[2 + m] = 4.0 * d1 + 2.0 * s * d2;
  }
  return out;
}

// i k_axis times the spectrum, with the unpaired Nyquist mode of that axis removed.
Spectrum derivative(const Spectrum& f, int axis) {
  const GridSpec& g = f.grid;
  const std::size_t cols = f.cols();
  Spectrum out{g, f.half, AlignedVector<cplx>(f.data.size())};
  std::vector<double> k(g.n);
  for (std::size_t i = 0; i < g.n; ++i) k[i] = (i == g.n / 2) ? 0.0 : g.wavenumber(i);
  for (std::size_t r = 0; r < g.n; ++r) {
    const cplx* in = f.data.data() + r * cols;
    cplx* o = out.data.data() + r * cols;
    if (axis == 0) {
      for (std::size_t c = 0; c < cols; ++c) o[c] = cplx(-k[c] * in[c].imag(), k[c] * in[c].real());
    } else {
      const double kr = k[r];
      for (std::size_t c = 0; c < cols; ++c) o[c] = cplx(-kr * in[c].imag(), kr * in[c].real());
    }
  }
  return out;
}

// Radial shape functions of every tail part sampled once per grid.
struct TailProfiles {
  std::array<AlignedVector<double>, RadialTail::kShapes> value, q, dq;
};

const TailProfiles& profiles_for(const GridSpec& g) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, double>, std::unique_ptr<TailProfiles>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{g.n, g.half_width}];
  if (slot) return *slot;
  auto p = std::make_unique<TailProfiles>();
  const std::size_t N = g.size();
  for (std::size_t m = 0; m < RadialTail::kShapes; ++m) {
    p->value[m].resize(N);
    p->q[m].resize(N);
    p->dq[m].resize(N);
  }
  for (std::size_t j = 0; j < g.n; ++j) {
    const double y = g.coordinate(j);
    for (std::size_t i = 0; i < g.n; ++i) {
      const double x = g.coordinate(i);
      const std::size_t k = j * g.n + i;
      const ShapeSample sh = shapes_at(x * x + y * y);
      for (std::size_t m = 0; m < RadialTail::kShapes; ++m) {
        p->value[m][k] = sh.value[m];
        p->q[m][k] = sh.q[m];
        p->dq[m][k] = sh.dq[m];
      }
    }
  }
  slot = std::move(p);
  return *slot;
}

// Weighted sum of the nonzero shapes of one profile kind at every node.
AlignedVector<double> combine(const std::array<AlignedVector<double>, RadialTail::kShapes>& prof,
                              const RadialTail& t, double c) {
  const auto coef = t.coefficients();
  AlignedVector<double> out(prof[0].size(), 0.0);
  for (std::size_t m = 0; m < RadialTail::kShapes; ++m) {
    if (coef[m] == 0.0) continue;
    const double w = c * coef[m];
    const double* src = prof[m].data();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += w * src[k];
  }
  return out;
}

// Adds c * tail to f, or its Laplacian when laplace is set.
void add_tail_scalar(RealField& f, const RadialTail& t, double c, bool laplace) {
  const GridSpec& g = f.grid();
  const TailProfiles& p = profiles_for(g);
  if (!laplace) {
    const AlignedVector<double> v = combine(p.value, t, c);
    for (std::size_t k = 0; k < v.size(); ++k) f[k] += v[k];
    return;
  }
  const AlignedVector<double> q = combine(p.q, t, c), dq = combine(p.dq, t, c);
  for (std::size_t j = 0; j < g.n; ++j) {
    const double y = g.coordinate(j);
    for (std::size_t i = 0; i < g.n; ++i) {
      const double x = g.coordinate(i);
      const std::size_t k = j * g.n + i;
      f[k] += 2.0 * q[k] + 2.0 * (x * x + y * y) * dq[k];
    }
  }
}

void add_tail_gradient(VectorField2& v, const RadialTail& t, double c) {
  const GridSpec& g = v.grid();
  const AlignedVector<double> q = combine(profiles_for(g).q, t, c);
  for (std::size_t j = 0; j < g.n; ++j) {
    const double y = g.coordinate(j);
    for (std::size_t i = 0; i < g.n; ++i) {
      const std::size_t k = j * g.n + i;
      v.x[k] += q[k] * g.coordinate(i);
      v.y[k] += q[k] * y;
    }
  }
}

VectorField2 remove_tail_gradient(const VectorField2& v, const RadialTail& tail) {
  if (tail.empty()) return v;
  VectorField2 out = v;
  add_tail_gradient(out, tail, -1.0);
  return out;
}

RealField remove_tail(const RealField& f, const RadialTail& tail) {
  RealField out = f;
  if (!tail.empty()) add_tail_scalar(out, tail, -1.0, false);
  return out;
}

}  // namespace

// Complex transforms run as two real transforms of the real and imaginary parts: the
// estimated real plans are markedly faster than the estimated complex ones and stay
// deterministic, unlike measured plans.
Spectrum forward(const ScalarField& f) {
  const GridSpec& g = f.grid();
  const std::size_t n = g.n, hc = n / 2 + 1;
  const Spectrum re = forward(real_part(f));
  const Spectrum im = forward(imag_part(f));
  Spectrum s{g, false, AlignedVector<cplx>(f.size())};
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t rm = (n - r) % n;
    cplx* out = s.data.data() + r * n;
    const cplx* R = re.data.data() + r * hc;
    const cplx* I = im.data.data() + r * hc;
    for (std::size_t c = 0; c < hc; ++c) out[c] = cplx(R[c].real() - I[c].imag(), R[c].imag() + I[c].real());
    const cplx* Rm = re.data.data() + rm * hc;
    const cplx* Im = im.data.data() + rm * hc;
    for (std::size_t c = hc; c < n; ++c) {
      // conj(R(-k)) + i conj(I(-k))
      const cplx a = Rm[n - c], b = Im[n - c];
      out[c] = cplx(a.real() + b.imag(), -a.imag() + b.real());
    }
  }
  return s;
}

Spectrum forward(const RealField& f) {
  const std::size_t n = f.grid().n;
  Spectrum s{f.grid(), true, AlignedVector<cplx>(n * (n / 2 + 1))};
  fftw_execute_dft_r2c(plans_for(n).r2c, const_cast<double*>(f.data()), as_fftw(s.data.data()));
  return s;
}

ScalarField inverse_complex(const Spectrum& s) {
  if (s.half) throw InvalidArgument("half spectrum cannot be inverted to a complex field");
  const GridSpec& g = s.grid;
  const std::size_t n = g.n, hc = n / 2 + 1;
  Spectrum re{g, true, AlignedVector<cplx>(n * hc)}, im{g, true, AlignedVector<cplx>(n * hc)};
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t rm = (n - r) % n;
    const cplx* in = s.data.data() + r * n;
    const cplx* inm = s.data.data() + rm * n;
    cplx* R = re.data.data() + r * hc;
    cplx* I = im.data.data() + r * hc;
    for (std::size_t c = 0; c < hc; ++c) {
      const cplx a = in[c], b = std::conj(inm[c == 0 ? 0 : n - c]);
      R[c] = 0.5 * (a + b);
      const cplx d = 0.5 * (a - b);
      I[c] = cplx(d.imag(), -d.real());
    }
  }
  const RealField x = inverse_real(std::move(re));
  const RealField y = inverse_real(std::move(im));
  ScalarField out(g, no_fill);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = cplx(x[k], y[k]);
  return out;
}

RealField inverse_real(Spectrum s) {
  if (!s.half) throw InvalidArgument("full spectrum passed to the real inverse");
  RealField out(s.grid, no_fill);
  fftw_execute_dft_c2r(plans_for(s.grid.n).c2r, as_fftw(s.data.data()), out.data());
  out *= 1.0 / static_cast<double>(s.grid.size());
  return out;
}

double gaussian_log_profile(double r) {
  // Ein(z)/2 with z = r^2/2; Ein(z) = gamma + log z + E1(z).
  const double z = 0.5 * r * r;
  double ein;
  if (z <= 4.0) {
    double term = z, sum = 0.0;
    for (int k = 1; k < 60; ++k) {
      sum += term / k;
      term *= -z / (k + 1);
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    ein = sum;
  } else {
    ein = std::numbers::egamma + std::log(z) - std::expint(-z);
  }
  return 0.5 * ein;
}

RadialTail& RadialTail::add_scaled(double c, const RadialTail& o) {
  bracket += c * o.bracket;
  gaussian += c * o.gaussian;
  kinetic_bb += c * o.kinetic_bb;
  kinetic_bg += c * o.kinetic_bg;
  kinetic_gg += c * o.kinetic_gg;
  return *this;
}

namespace {

double weighted(const std::array<double, RadialTail::kShapes>& coef,
                const std::array<double, RadialTail::kShapes>& shape) {
  double out = 0.0;
  for (std::size_t m = 0; m < RadialTail::kShapes; ++m)
    if (coef[m] != 0.0) out += coef[m] * shape[m];
  return out;
}

double gaussian_log_value(double r2) { return gaussian_log_profile(std::sqrt(r2)); }

}  // namespace

double RadialTail::value(double x, double y) const { return weighted(coefficients(), shapes_at(x * x + y * y).value); }

double RadialTail::radial_factor(double r2) const { return weighted(coefficients(), shapes_at(r2).q); }

double RadialTail::radial_factor_derivative(double r2) const { return weighted(coefficients(), shapes_at(r2).dq); }

RadialTail gradient_product(const RadialTail& u, const RadialTail& w) {
  RadialTail out;
  out.kinetic_bb = u.bracket * w.bracket;
  out.kinetic_bg = u.bracket * w.gaussian + u.gaussian * w.bracket;
  out.kinetic_gg = u.gaussian * w.gaussian;
  return out;
}

RealField sample_tail(const GridSpec& g, const RadialTail& t) {
  RealField out(g);
  if (!t.empty()) add_tail_scalar(out, t, 1.0, false);
  return out;
}

VectorField2 sample_tail_gradient(const GridSpec& g, const RadialTail& t) {
  VectorField2 out(g);
  if (!t.empty()) add_tail_gradient(out, t, 1.0);
  return out;
}

ComplexVectorField gradient_from_spectrum(const Spectrum& fhat) {
  return {inverse_complex(derivative(fhat, 0)), inverse_complex(derivative(fhat, 1))};
}

ComplexVectorField gradient(const ScalarField& f) { return gradient_from_spectrum(forward(f)); }

VectorField2 gradient(const RealField& f, const RadialTail& tail) {
  const Spectrum base = tail.empty() ? forward(f) : forward(remove_tail(f, tail));
  VectorField2 out(inverse_real(derivative(base, 0)), inverse_real(derivative(base, 1)));
  if (!tail.empty()) add_tail_gradient(out, tail, 1.0);
  return out;
}

ScalarField laplacian(const ScalarField& f) {
  Spectrum s = forward(f);
  for_each_mode(s, [](cplx& v, double k1, double k2, bool, bool) { v *= -(k1 * k1 + k2 * k2); });
  return inverse_complex(s);
}

RealField laplacian(const RealField& f, const RadialTail& tail) {
  Spectrum s = tail.empty() ? forward(f) : forward(remove_tail(f, tail));
  for_each_mode(s, [](cplx& v, double k1, double k2, bool, bool) { v *= -(k1 * k1 + k2 * k2); });
  RealField out = inverse_real(std::move(s));
  if (!tail.empty()) add_tail_scalar(out, tail, 1.0, true);
  return out;
}

Jacobian jacobian(const VectorField2& v, const RadialTail& tail) {
  const GridSpec& g = v.grid();
  const VectorField2 w = remove_tail_gradient(v, tail);
  const Spectrum sx = forward(w.x);
  const Spectrum sy = forward(w.y);
  auto d1 = [](const Spectrum& s) { return inverse_real(derivative(s, 0)); };
  auto d2 = [](const Spectrum& s) { return inverse_real(derivative(s, 1)); };
  Jacobian J{d1(sx), d2(sx), d1(sy), d2(sy)};
  if (!tail.empty()) {
    const TailProfiles& p = profiles_for(g);
    const AlignedVector<double> qs = combine(p.q, tail, 1.0), dqs = combine(p.dq, tail, 2.0);
    for (std::size_t j = 0; j < g.n; ++j) {
      const double y = g.coordinate(j);
      for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.coordinate(i);
        const std::size_t k = j * g.n + i;
        const double q = qs[k], dq = dqs[k];
        J.xx(i, j) += q + dq * x * x;
        J.xy(i, j) += dq * x * y;
        J.yx(i, j) += dq * x * y;
        J.yy(i, j) += q + dq * y * y;
      }
    }
  }
  return J;
}

RealField divergence(const VectorField2& v, const RadialTail& tail) {
  const GridSpec& g = v.grid();
  const VectorField2 w = remove_tail_gradient(v, tail);
  Spectrum sx = forward(w.x);
  const Spectrum sy = forward(w.y);
  std::size_t k = 0;
  const std::size_t cols = sx.cols();
  for (std::size_t r = 0; r < g.n; ++r) {
    const double k2 = (r == g.n / 2) ? 0.0 : g.wavenumber(r);
    for (std::size_t c = 0; c < cols; ++c, ++k) {
      const double k1 = (c == g.n / 2) ? 0.0 : g.wavenumber(c);
      sx.data[k] = cplx(0.0, k1) * sx.data[k] + cplx(0.0, k2) * sy.data[k];
    }
  }
  RealField out = inverse_real(std::move(sx));
  if (!tail.empty()) add_tail_scalar(out, tail, 1.0, true);
  return out;
}

RealField curl(const VectorField2& v, const RadialTail& tail) {
  const GridSpec& g = v.grid();
  const VectorField2 w = remove_tail_gradient(v, tail);
  const Spectrum sx = forward(w.x);
  Spectrum sy = forward(w.y);
  std::size_t k = 0;
  const std::size_t cols = sy.cols();
  for (std::size_t r = 0; r < g.n; ++r) {
    const double k2 = (r == g.n / 2) ? 0.0 : g.wavenumber(r);
    for (std::size_t c = 0; c < cols; ++c, ++k) {
      const double k1 = (c == g.n / 2) ? 0.0 : g.wavenumber(c);
      sy.data[k] = cplx(0.0, k1) * sy.data[k] - cplx(0.0, k2) * sx.data[k];
    }
  }
  return inverse_real(std::move(sy));
}

GradientPair bernoulli_gradient(const VectorField2& u, const RadialTail& tu, const VectorField2& w,
                                const RadialTail& tw, double c_dot, const RealField& P, const RadialTail& ptail,
                                double c_p, bool smooth, bool with_laplacian) {
  const GridSpec& g = u.grid();
  u.x.require_same(P);
  w.x.require_same(P);
  const bool with_p = c_p != 0.0;
  RadialTail far;
  far.add_scaled(c_dot, gradient_product(tu, tw));
  if (with_p) far.add_scaled(c_p, ptail);
  GradientPair out{RealField(g, no_fill), RealField(), VectorField2(), RealField()};
  for (std::size_t k = 0; k < out.value.size(); ++k) {
    const double dot = c_dot * (u.x[k] * w.x[k] + u.y[k] * w.y[k]);
    out.value[k] = with_p ? dot + c_p * P[k] : dot;
  }
  out.remainder = remove_tail(out.value, far);
  Spectrum s = forward(out.remainder);
  if (smooth) dealias(s);
  out.gradient = VectorField2(inverse_real(derivative(s, 0)), inverse_real(derivative(s, 1)));
  if (!far.empty()) add_tail_gradient(out.gradient, far, 1.0);
  if (with_laplacian) {
    for_each_mode(s, [](cplx& v, double k1, double k2, bool nyq1, bool nyq2) {
      v *= -((nyq1 ? 0.0 : k1 * k1) + (nyq2 ? 0.0 : k2 * k2));
    });
    out.laplacian = inverse_real(std::move(s));
    if (!far.empty()) add_tail_scalar(out.laplacian, far, 1.0, true);
  }
  return out;
}

ScalarField bessel_multiplier(const ScalarField& f, double s) {
  Spectrum sp = forward(f);
  for_each_mode(sp, [s](cplx& v, double k1, double k2, bool, bool) {
    v *= std::pow(1.0 + k1 * k1 + k2 * k2, 0.5 * s);
  });
  return inverse_complex(sp);
}

std::size_t dealias_cutoff(std::size_t n) { return n / 3; }

void dealias(Spectrum& s) {
  const GridSpec& g = s.grid;
  const long cut = static_cast<long>(dealias_cutoff(g.n));
  const std::size_t cols = s.cols();
  for (std::size_t r = 0; r < g.n; ++r) {
    const bool row_out = std::labs(g.mode(r)) > cut;
    for (std::size_t c = 0; c < cols; ++c) {
      if (row_out || std::labs(g.mode(c)) > cut) s.data[r * cols + c] = 0.0;
    }
  }
}

ScalarField dealias(const ScalarField& f) {
  Spectrum s = forward(f);
  dealias(s);
  return inverse_complex(s);
}

RealField dealias(const RealField& f) {
  Spectrum s = forward(f);
  dealias(s);
  return inverse_real(std::move(s));
}

void apply_free_propagator(Spectrum& s, double coef) {
  if (s.half) throw InvalidArgument("free propagator needs a full complex spectrum");
  for_each_mode(s, [coef](cplx& v, double k1, double k2, bool, bool) {
    v *= std::polar(1.0, -coef * (k1 * k1 + k2 * k2));
  });
}

FreePropagator::FreePropagator(const GridSpec& g, double coef) : grid_(g), coef_(coef) {
  Spectrum unit{g, false, AlignedVector<cplx>(g.size(), cplx(1.0))};
  apply_free_propagator(unit, coef);
  factors_ = std::move(unit.data);
}

void FreePropagator::apply(Spectrum& s) const {
  if (s.half || !(s.grid == grid_)) throw InvalidArgument("propagator table does not match the spectrum");
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    const cplx a = s.data[k], b = factors_[k];
    s.data[k] = cplx(a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real());
  }
}

ScalarField propagate_free(const ScalarField& f, double coef) {
  Spectrum s = forward(f);
  apply_free_propagator(s, coef);
  return inverse_complex(s);
}

}  // namespace sp2d
