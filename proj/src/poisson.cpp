#include "sp2d/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

namespace sp2d {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Kernel samples times h^2 on the doubled grid, wrap ordered: offset m in [-n, n-1]
// per axis lives at index m mod 2n.
struct KernelTables {
  GridSpec padded;
  Spectrum log_hat;
  Spectrum gx_hat;
  Spectrum gy_hat;
};

using KernelKey = std::tuple<std::size_t, std::uint64_t, int>;

std::uint64_t bits_of(double v) {
  std::uint64_t b;
  std::memcpy(&b, &v, sizeof b);
  return b;
}

std::shared_ptr<const KernelTables> build_tables(const GridSpec& g, SelfCellRule rule) {
  const std::size_t n = g.n;
  const std::size_t m = 2 * n;
  const double h = g.spacing;
  const double area = g.cell_area();
  auto tables = std::make_shared<KernelTables>();
  tables->padded = build_grid(2.0 * g.half_width, m);

  RealField klog(tables->padded), kx(tables->padded), ky(tables->padded);
  for (std::size_t j = 0; j < m; ++j) {
    const long oj = j < n ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(m);
    for (std::size_t i = 0; i < m; ++i) {
      const long oi = i < n ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(m);
      const double zx = oi * h, zy = oj * h;
      const double r2 = zx * zx + zy * zy;
      if (oi == 0 && oj == 0) {
        klog(i, j) = -log_self_cell(h, rule) / kTwoPi * area;
        continue;
      }
      klog(i, j) = -0.5 * std::log(r2) / kTwoPi * area;
      kx(i, j) = -zx / r2 / kTwoPi * area;
      ky(i, j) = -zy / r2 / kTwoPi * area;
    }
  }
  // Self-cell correction of the punctured gradient sum, h^2/(4 pi) grad f, folded in
  // as a central difference.
  const double c = h / (4.0 * kTwoPi);
  kx(m - 1, 0) += c;
  kx(1, 0) -= c;
  ky(0, m - 1) += c;
  ky(0, 1) -= c;

  tables->log_hat = forward(klog);
  tables->gx_hat = forward(kx);
  tables->gy_hat = forward(ky);
  return tables;
}

std::shared_ptr<const KernelTables> tables_for(const GridSpec& g, SelfCellRule rule) {
  static std::mutex mutex;
  static std::map<KernelKey, std::shared_ptr<const KernelTables>> cache;
  const KernelKey key{g.n, bits_of(g.half_width), static_cast<int>(rule)};
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto built = build_tables(g, rule);
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(key, std::move(built)).first->second;
}

RealField pad(const RealField& f, const GridSpec& padded) {
  const std::size_t n = f.grid().n;
  RealField out(padded);
  for (std::size_t j = 0; j < n; ++j)
    std::copy_n(f.data() + j * n, n, out.data() + j * padded.n);
  return out;
}

RealField restrict_to(const RealField& padded, const GridSpec& g) {
  RealField out(g, no_fill);
  for (std::size_t j = 0; j < g.n; ++j)
    std::copy_n(padded.data() + j * padded.grid().n, g.n, out.data() + j * g.n);
  return out;
}

RealField convolve(Spectrum fhat, const Spectrum& khat, const GridSpec& g) {
  for (std::size_t k = 0; k < fhat.data.size(); ++k) {
    const cplx a = fhat.data[k], b = khat.data[k];
    fhat.data[k] = cplx(a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real());
  }
  return restrict_to(inverse_real(std::move(fhat)), g);
}

void subtract_origin(RealField& P) {
  const std::size_t o = P.grid().origin_index();
  const double shift = P(o, o);
  for (double& v : P.values()) v -= shift;
}

double at_or_zero(const RealField& f, long i, long j) {
  const long n = static_cast<long>(f.grid().n);
  if (i < 0 || j < 0 || i >= n || j >= n) return 0.0;
  return f(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
}

}  // namespace

double log_self_cell(double h, SelfCellRule rule) {
  switch (rule) {
    case SelfCellRule::equal_area_disk:
      return std::log(h / std::sqrt(std::numbers::pi)) - 0.5;
    case SelfCellRule::lattice: {
      const double g = std::tgamma(0.25);
      return std::log(h) - std::log(g * g / (2.0 * std::sqrt(std::numbers::pi)));
    }
  }
  throw InvalidArgument("unknown self-cell rule");
}

double quadrature_mass(const RealField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_area();
}

PotentialResult potential_logkernel_direct(const RealField& f, SelfCellRule rule) {
  const GridSpec& g = f.grid();
  const long n = static_cast<long>(g.n);
  const double h = g.spacing;
  const double area = g.cell_area();
  const long span = 2 * n - 1;

  // Offsets in [-(n-1), n-1] per axis.
  std::vector<double> logd(static_cast<std::size_t>(span * span));
  std::vector<double> gxd(logd.size()), gyd(logd.size());
  for (long b = -(n - 1); b <= n - 1; ++b) {
    for (long a = -(n - 1); a <= n - 1; ++a) {
      const std::size_t k = static_cast<std::size_t>((b + n - 1) * span + (a + n - 1));
      if (a == 0 && b == 0) {
        logd[k] = log_self_cell(h, rule);
        continue;
      }
      const double zx = a * h, zy = b * h;
      const double r2 = zx * zx + zy * zy;
      logd[k] = 0.5 * std::log(r2);
      gxd[k] = zx / r2;
      gyd[k] = zy / r2;
    }
  }
  auto offset = [&](long a, long b) { return static_cast<std::size_t>((b + n - 1) * span + (a + n - 1)); };

  const long o = static_cast<long>(g.origin_index());
  PotentialResult res{RealField(g), VectorField2(g), quadrature_mass(f)};
  for (long j = 0; j < n; ++j) {
    for (long i = 0; i < n; ++i) {
      double p = 0.0, gx = 0.0, gy = 0.0;
      for (long l = 0; l < n; ++l) {
        for (long k = 0; k < n; ++k) {
          const double fy = f(static_cast<std::size_t>(k), static_cast<std::size_t>(l));
          if (fy == 0.0) continue;
          const std::size_t d = offset(i - k, j - l);
          p += (logd[d] - logd[offset(k - o, l - o)]) * fy;
          gx += gxd[d] * fy;
          gy += gyd[d] * fy;
        }
      }
      const auto ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
      res.P(ii, jj) = -p * area / kTwoPi;
      res.gradP.x(ii, jj) = -gx * area / kTwoPi + h / (4.0 * kTwoPi) * (at_or_zero(f, i + 1, j) - at_or_zero(f, i - 1, j));
      res.gradP.y(ii, jj) = -gy * area / kTwoPi + h / (4.0 * kTwoPi) * (at_or_zero(f, i, j + 1) - at_or_zero(f, i, j - 1));
    }
  }
  return res;
}

RealField newtonian_potential(const RealField& f, SelfCellRule rule) {
  auto t = tables_for(f.grid(), rule);
  return convolve(forward(pad(f, t->padded)), t->log_hat, f.grid());
}

RealField potential_only(const RealField& f, SelfCellRule rule) {
  RealField P = newtonian_potential(f, rule);
  subtract_origin(P);
  return P;
}

PotentialResult potential_freespace_fft(const RealField& f, SelfCellRule rule) {
  const GridSpec& g = f.grid();
  auto t = tables_for(g, rule);
  const Spectrum fhat = forward(pad(f, t->padded));
  PotentialResult res;
  res.P = convolve(fhat, t->log_hat, g);
  subtract_origin(res.P);
  res.gradP = VectorField2(convolve(fhat, t->gx_hat, g), convolve(fhat, t->gy_hat, g));
  res.mass = quadrature_mass(f);
  return res;
}

VectorField2 grad_potential(const RealField& f) {
  const GridSpec& g = f.grid();
  auto t = tables_for(g, SelfCellRule::equal_area_disk);
  const Spectrum fhat = forward(pad(f, t->padded));
  return {convolve(fhat, t->gx_hat, g), convolve(fhat, t->gy_hat, g)};
}

Hessian hessian_riesz(const RealField& f) {
  const GridSpec& g = f.grid();
  const GridSpec padded = build_grid(2.0 * g.half_width, 2 * g.n);
  const Spectrum fhat = forward(pad(f, padded));
  // d_a d_b P = -xi_a xi_b / |xi|^2 fhat. The zero mode carries the angular average
  // -delta_ab / 2 so that the trace reproduces -f including the mean.
  auto component = [&](int a, int b) {
    Spectrum s = fhat;
    for_each_mode(s, [a, b](cplx& v, double k1, double k2, bool nyq1, bool nyq2) {
      const double q = k1 * k1 + k2 * k2;
      if (q == 0.0) {
        v *= (a == b) ? -0.5 : 0.0;
        return;
      }
      const double ka = a == 0 ? k1 : k2;
      const double kb = b == 0 ? k1 : k2;
      if (a != b && (nyq1 || nyq2)) {
        v = 0.0;
        return;
      }
      v *= -ka * kb / q;
    });
    return restrict_to(inverse_real(std::move(s)), g);
  };
  Hessian H;
  H.xx = component(0, 0);
  H.xy = component(0, 1);
  H.yx = H.xy;
  H.yy = component(1, 1);
  return H;
}

RadialTail potential_tail(double mass) { return RadialTail{0.0, -mass / kTwoPi}; }

VectorField2 spectral_potential_gradient(const RealField& P, double mass) {
  return gradient(P, potential_tail(mass));
}

double interpolate(const RealField& f, double x, double y) {
  const GridSpec& g = f.grid();
  const double fx = (x + g.half_width) / g.spacing;
  const double fy = (y + g.half_width) / g.spacing;
  const long last = static_cast<long>(g.n) - 2;
  const long i = std::clamp(static_cast<long>(std::floor(fx)), 0L, last);
  const long j = std::clamp(static_cast<long>(std::floor(fy)), 0L, last);
  const double tx = fx - static_cast<double>(i);
  const double ty = fy - static_cast<double>(j);
  const auto i0 = static_cast<std::size_t>(i), j0 = static_cast<std::size_t>(j);
  return (1 - tx) * (1 - ty) * f(i0, j0) + tx * (1 - ty) * f(i0 + 1, j0) + (1 - tx) * ty * f(i0, j0 + 1) +
         tx * ty * f(i0 + 1, j0 + 1);
}

double log_growth_ratio(const PotentialResult& result, double radius) {
  const GridSpec& g = result.P.grid();
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
  if (radius >= g.half_width) throw OutOfDomain("sampling radius must lie inside the domain");
  const double denom = 0.5 * std::log1p(radius * radius);
  constexpr int kAngles = 360;
  double worst = 0.0;
  for (int a = 0; a < kAngles; ++a) {
    const double th = kTwoPi * a / kAngles;
    worst = std::max(worst, std::abs(interpolate(result.P, radius * std::cos(th), radius * std::sin(th))));
  }
  return worst / denom;
}

std::vector<NeutralitySample> neutrality_diagnostic(const RealField& f, const std::vector<double>& radii) {
  const GridSpec& g = f.grid();
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0) || radii[k] >= g.half_width) throw OutOfDomain("radii must lie in (0, L)");
    if (k > 0 && !(radii[k] > radii[k - 1])) throw InvalidArgument("radii must be increasing");
  }
  const VectorField2 G = grad_potential(f);
  std::vector<NeutralitySample> out;
  out.reserve(radii.size());
  for (double R : radii) {
    double e = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      const double y = g.coordinate(j);
      for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.coordinate(i);
        if (x * x + y * y <= R * R) e += G.x(i, j) * G.x(i, j) + G.y(i, j) * G.y(i, j);
      }
    }
    out.push_back({R, e * g.cell_area()});
  }
  return out;
}

}  // namespace sp2d
