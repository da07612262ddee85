#include "sp2d/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace sp2d {
namespace {

constexpr std::array<char, 4> kMagic = {'S', 'P', '2', 'D'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::vector<char>& buf, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

template <class T>
T take(const std::vector<char>& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw std::runtime_error("field dump truncated");
  char bytes[sizeof(T)];
  std::memcpy(bytes, buf.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  pos += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::vector<char> header(const GridSpec& g, std::uint8_t kind) {
  std::vector<char> buf(kMagic.begin(), kMagic.end());
  put(buf, kVersion);
  put(buf, static_cast<std::uint32_t>(g.n));
  put(buf, g.half_width);
  put(buf, kind);
  return buf;
}

void flush(const std::filesystem::path& path, const std::vector<char>& buf) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

struct Parsed {
  GridSpec grid;
  std::uint8_t kind;
  std::vector<char> buf;
  std::size_t pos;
};

Parsed parse(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Parsed p;
  p.buf.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  if (p.buf.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), p.buf.begin()))
    throw std::runtime_error(path.string() + " is not a field dump");
  p.pos = kMagic.size();
  if (take<std::uint32_t>(p.buf, p.pos) != kVersion) throw std::runtime_error("unsupported dump version");
  const auto n = take<std::uint32_t>(p.buf, p.pos);
  const auto L = take<double>(p.buf, p.pos);
  p.kind = take<std::uint8_t>(p.buf, p.pos);
  p.grid = build_grid(L, n);
  return p;
}

}  // namespace

void write_field(const std::filesystem::path& path, const RealField& f) {
  std::vector<char> buf = header(f.grid(), 0);
  buf.reserve(buf.size() + 8 * f.size());
  for (double v : f.values()) put(buf, v);
  flush(path, buf);
}

void write_field(const std::filesystem::path& path, const ScalarField& f) {
  std::vector<char> buf = header(f.grid(), 1);
  buf.reserve(buf.size() + 16 * f.size());
  for (const cplx& v : f.values()) {
    put(buf, v.real());
    put(buf, v.imag());
  }
  flush(path, buf);
}

RealField read_real_field(const std::filesystem::path& path) {
  Parsed p = parse(path);
  if (p.kind != 0) throw std::runtime_error(path.string() + " holds a complex field");
  RealField f(p.grid);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = take<double>(p.buf, p.pos);
  return f;
}

ScalarField read_complex_field(const std::filesystem::path& path) {
  Parsed p = parse(path);
  if (p.kind != 1) throw std::runtime_error(path.string() + " holds a real field");
  ScalarField f(p.grid);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double re = take<double>(p.buf, p.pos);
    const double im = take<double>(p.buf, p.pos);
    f[k] = cplx(re, im);
  }
  return f;
}

}  // namespace sp2d
