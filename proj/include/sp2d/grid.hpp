#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "sp2d/errors.hpp"

namespace sp2d {

using cplx = std::complex<double>;

// Periodic square [-L, L)^2 sampled at x_i = -L + i h, h = 2L/n.
struct GridSpec {
  double half_width = 0.0;
  std::size_t n = 0;
  double spacing = 0.0;

  std::size_t size() const { return n * n; }
  double coordinate(std::size_t i) const { return -half_width + static_cast<double>(i) * spacing; }
  // Index of the sample sitting exactly on x = 0.
  std::size_t origin_index() const { return n / 2; }
  // Signed mode number in [-n/2, n/2) for FFT index i.
  long mode(std::size_t i) const {
    const long m = static_cast<long>(i);
    const long half = static_cast<long>(n / 2);
    return m < half ? m : m - static_cast<long>(n);
  }
  double wavenumber(std::size_t i) const;
  double cell_area() const { return spacing * spacing; }

  bool operator==(const GridSpec&) const = default;
};

GridSpec build_grid(double half_width, std::size_t n);

namespace detail {
// Field buffers are large and short-lived; this keeps them in the reusable heap instead
// of fresh mappings whose pages fault in on every allocation.
void retain_freed_buffers();
}  // namespace detail

template <class T, std::size_t Align = 64>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Align>&) noexcept {}
  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Align>;
  };
  T* allocate(std::size_t count) {
    static const bool once = (detail::retain_freed_buffers(), true);
    (void)once;
    return static_cast<T*>(::operator new(count * sizeof(T), std::align_val_t(Align)));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, std::align_val_t(Align)); }
  // Sizing constructors leave arithmetic and complex elements unset; explicit fills still apply.
  template <class U>
  void construct(U* p) noexcept(std::is_nothrow_default_constructible_v<U>) {
    if constexpr (!std::is_arithmetic_v<U> && !std::is_same_v<U, std::complex<double>>) ::new (static_cast<void*>(p)) U();
  }
  template <class U, class... Args>
  void construct(U* p, Args&&... args) {
    ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
  }
  template <class U>
  bool operator==(const AlignedAllocator<U, Align>&) const noexcept { return true; }
};

template <class T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

struct NoFill {};
inline constexpr NoFill no_fill{};

// Grid samples stored row-major with x1 varying fastest: index = i2 * n + i1.
template <class T>
class Field {
 public:
  using value_type = T;

  Field() = default;
  explicit Field(const GridSpec& grid, T fill = T{}) : grid_(grid), values_(grid.size(), fill) {}
  Field(const GridSpec& grid, NoFill) : grid_(grid), values_(grid.size()) {}

  template <class F>
  static Field generate(const GridSpec& grid, F&& fn) {
    Field out(grid);
    for (std::size_t j = 0; j < grid.n; ++j) {
      const double y = grid.coordinate(j);
      for (std::size_t i = 0; i < grid.n; ++i) out.values_[j * grid.n + i] = fn(grid.coordinate(i), y);
    }
    return out;
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  T& operator[](std::size_t k) { return values_[k]; }
  const T& operator[](std::size_t k) const { return values_[k]; }
  T& operator()(std::size_t i1, std::size_t i2) { return values_[i2 * grid_.n + i1]; }
  const T& operator()(std::size_t i1, std::size_t i2) const { return values_[i2 * grid_.n + i1]; }

  Field& operator+=(const Field& o) {
    require_same(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  Field& operator-=(const Field& o) {
    require_same(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
  }
  Field& operator*=(T s) {
    for (auto& v : values_) v *= s;
    return *this;
  }
  // this += s * o
  Field& add_scaled(T s, const Field& o) {
    require_same(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * o.values_[k];
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(T s, Field a) { return a *= s; }

  void require_same(const Field& o) const {
    if (!(o.grid_ == grid_)) throw InvalidArgument("fields live on different grids");
  }

 private:
  GridSpec grid_;
  AlignedVector<T> values_;
};

using RealField = Field<double>;
using ScalarField = Field<cplx>;

template <class T>
struct VectorField {
  Field<T> x;
  Field<T> y;

  VectorField() = default;
  explicit VectorField(const GridSpec& g) : x(g), y(g) {}
  VectorField(Field<T> a, Field<T> b) : x(std::move(a)), y(std::move(b)) { x.require_same(y); }

  const GridSpec& grid() const { return x.grid(); }
  VectorField& operator+=(const VectorField& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  VectorField& operator*=(T s) {
    x *= s;
    y *= s;
    return *this;
  }
  VectorField& add_scaled(T s, const VectorField& o) {
    x.add_scaled(s, o.x);
    y.add_scaled(s, o.y);
    return *this;
  }
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
};

using VectorField2 = VectorField<double>;
using ComplexVectorField = VectorField<cplx>;

RealField abs2(const ScalarField& u);
RealField real_part(const ScalarField& u);
RealField imag_part(const ScalarField& u);
ScalarField to_complex(const RealField& f);
bool all_finite(const RealField& f);
bool all_finite(const ScalarField& f);

}  // namespace sp2d
