#pragma once

#include <array>
#include <cstddef>

namespace latticeblocks::lattice {

using Vec3i = std::array<int, 3>;
using Vec3d = std::array<double, 3>;

/// D3Q19 velocity set in lattice units (dx = dt = 1).
///
/// Direction order is frozen: 0 is the rest direction, 1..6 are the faces
/// (+x, -x, +y, -y, +z, -z) and 7..18 the edges, grouped in +/- pairs so that
/// opposite(i) = i + 1 for odd i and i - 1 for even i >= 2. Message payloads and
/// the staged device buffers depend on this order.
struct D3Q19 {
  static constexpr std::size_t Q = 19;

  static constexpr std::array<Vec3i, Q> e{{
      {0, 0, 0},                                                               //
      {1, 0, 0},   {-1, 0, 0},  {0, 1, 0},   {0, -1, 0},  {0, 0, 1},  {0, 0, -1},  //
      {1, 1, 0},   {-1, -1, 0}, {1, -1, 0},  {-1, 1, 0},                          //
      {1, 0, 1},   {-1, 0, -1}, {1, 0, -1},  {-1, 0, 1},                          //
      {0, 1, 1},   {0, -1, -1}, {0, 1, -1},  {0, -1, 1},
  }};

  // w_i = 1 / weight_denominator[i]
  static constexpr std::array<int, Q> weight_denominator{
      3, 18, 18, 18, 18, 18, 18, 36, 36, 36, 36, 36, 36, 36, 36, 36, 36, 36, 36};

  static constexpr std::array<double, Q> w = [] {
    std::array<double, Q> out{};
    for (std::size_t i = 0; i < Q; ++i) out[i] = 1.0 / weight_denominator[i];
    return out;
  }();

  static constexpr std::array<std::size_t, Q> opposite = [] {
    std::array<std::size_t, Q> out{};
    out[0] = 0;
    for (std::size_t i = 1; i < Q; ++i) out[i] = (i % 2 == 1) ? i + 1 : i - 1;
    return out;
  }();

  // Lattice speed of sound squared.
  static constexpr double cs2 = 1.0 / 3.0;
};

constexpr int dot(const Vec3i& a, const Vec3i& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

constexpr double dot(const Vec3i& a, const Vec3d& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace latticeblocks::lattice
