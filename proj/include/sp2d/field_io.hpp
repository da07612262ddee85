#pragma once

#include <filesystem>

#include "sp2d/grid.hpp"

namespace sp2d {

// Binary layout: "SP2D", u32 version = 1, u32 n, f64 L, u8 kind (0 real, 1 complex),
// then n*n row-major samples as little-endian f64 (re, im interleaved when complex).
void write_field(const std::filesystem::path& path, const RealField& f);
void write_field(const std::filesystem::path& path, const ScalarField& f);
RealField read_real_field(const std::filesystem::path& path);
ScalarField read_complex_field(const std::filesystem::path& path);

}  // namespace sp2d
