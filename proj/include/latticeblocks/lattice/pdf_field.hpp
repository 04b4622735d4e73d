#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "latticeblocks/errors.hpp"
#include "latticeblocks/lattice/stencil.hpp"

namespace latticeblocks::lattice {

struct Extent3 {
  int x = 0;
  int y = 0;
  int z = 0;

  int operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  std::size_t cells() const { return std::size_t(x) * std::size_t(y) * std::size_t(z); }
  bool empty() const { return x <= 0 || y <= 0 || z <= 0; }
  bool operator==(const Extent3&) const = default;
  std::string str() const { return std::to_string(x) + "x" + std::to_string(y) + "x" + std::to_string(z); }
};

enum class Layout : std::uint8_t { AoS, SoA };

inline const char* to_string(Layout l) { return l == Layout::AoS ? "AoS" : "SoA"; }

enum class CellKind : std::uint8_t { Fluid, Wall };

/// Cell indexing for a block with exactly one ghost layer on every face.
/// Local coordinates run from -1 to n inclusive; x varies fastest.
class CellGrid {
 public:
  CellGrid() = default;
  explicit CellGrid(Extent3 interior)
      : interior_(interior), sx_(interior.x + 2), sy_(interior.y + 2), sz_(interior.z + 2) {}

  const Extent3& interior() const { return interior_; }
  std::size_t total() const { return std::size_t(sx_) * std::size_t(sy_) * std::size_t(sz_); }

  std::size_t index(int x, int y, int z) const {
    return std::size_t(x + 1) + std::size_t(sx_) * (std::size_t(y + 1) + std::size_t(sy_) * std::size_t(z + 1));
  }

  std::ptrdiff_t offset(const Vec3i& e) const {
    return std::ptrdiff_t(e[0]) + std::ptrdiff_t(sx_) * (std::ptrdiff_t(e[1]) + std::ptrdiff_t(sy_) * e[2]);
  }

  Vec3i coords(std::size_t index) const {
    const int x = int(index % sx_);
    const int y = int((index / sx_) % sy_);
    const int z = int(index / (std::size_t(sx_) * sy_));
    return {x - 1, y - 1, z - 1};
  }

  bool is_interior(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < interior_.x && y < interior_.y && z < interior_.z;
  }

 private:
  Extent3 interior_{};
  int sx_ = 0, sy_ = 0, sz_ = 0;
};

template <Layout L>
constexpr std::size_t slot(std::size_t cell, std::size_t dir, std::size_t ncells) {
  if constexpr (L == Layout::AoS) {
    return cell * D3Q19::Q + dir;
  } else {
    return dir * ncells + cell;
  }
}

inline std::size_t slot(Layout layout, std::size_t cell, std::size_t dir, std::size_t ncells) {
  return layout == Layout::AoS ? slot<Layout::AoS>(cell, dir, ncells) : slot<Layout::SoA>(cell, dir, ncells);
}

/// A PDF pulled by an interior fluid cell from a wall cell. The wall slot is
/// overwritten with the reflected post-collision value before the pull.
struct BounceLink {
  std::size_t wall_cell;
  std::size_t fluid_cell;
  std::uint8_t dir;  // pulled direction, points from the wall into the fluid
  Vec3d wall_velocity;
};

/// Per-cell geometry flags, ghost layer included.
class CellFlags {
 public:
  CellFlags() = default;
  explicit CellFlags(const CellGrid& grid)
      : grid_(grid), kind_(grid.total(), CellKind::Fluid), wall_velocity_(grid.total(), Vec3d{0, 0, 0}) {}

  const CellGrid& grid() const { return grid_; }
  CellKind kind(std::size_t cell) const { return kind_[cell]; }
  CellKind kind(int x, int y, int z) const { return kind_[grid_.index(x, y, z)]; }
  const Vec3d& wall_velocity(std::size_t cell) const { return wall_velocity_[cell]; }
  std::span<const CellKind> kinds() const { return kind_; }

  void set(int x, int y, int z, CellKind kind, Vec3d wall_velocity = {0, 0, 0}) {
    const auto c = grid_.index(x, y, z);
    kind_[c] = kind;
    wall_velocity_[c] = kind == CellKind::Wall ? wall_velocity : Vec3d{0, 0, 0};
  }

  /// All pulls by interior fluid cells that read a wall cell, in cell-major,
  /// direction-ascending order.
  std::vector<BounceLink> bounce_links() const;

  std::size_t interior_fluid_cells() const;

 private:
  CellGrid grid_;
  std::vector<CellKind> kind_;
  std::vector<Vec3d> wall_velocity_;
};

/// Two-grid storage of centered PDFs (f - f_eq(rho0, 0)) for one block.
template <typename T>
class PdfField {
 public:
  PdfField() = default;
  PdfField(Extent3 extent, Layout layout);

  const Extent3& extent() const { return grid_.interior(); }
  const CellGrid& grid() const { return grid_; }
  Layout layout() const { return layout_; }
  bool empty() const { return grid_.interior().empty(); }

  std::size_t slot(std::size_t cell, std::size_t dir) const {
    return lattice::slot(layout_, cell, dir, grid_.total());
  }

  T& at(int x, int y, int z, std::size_t dir) { return src_[slot(grid_.index(x, y, z), dir)]; }
  T at(int x, int y, int z, std::size_t dir) const { return src_[slot(grid_.index(x, y, z), dir)]; }

  std::span<T> src() { return src_; }
  std::span<const T> src() const { return src_; }
  std::span<T> dst() { return dst_; }
  std::span<const T> dst() const { return dst_; }

  void swap() { std::swap(src_, dst_); }

  CellFlags& flags() {
    links_valid_ = false;
    return flags_;
  }
  const CellFlags& flags() const { return flags_; }

  /// Cached CellFlags::bounce_links(); refreshed after any mutable flags() access.
  const std::vector<BounceLink>& bounce_links() const {
    if (!links_valid_) {
      links_ = flags_.bounce_links();
      links_valid_ = true;
    }
    return links_;
  }

 private:
  CellGrid grid_;
  Layout layout_ = Layout::AoS;
  std::vector<T> src_;
  std::vector<T> dst_;
  CellFlags flags_;
  mutable std::vector<BounceLink> links_;
  mutable bool links_valid_ = false;
};

template <typename T>
PdfField<T>::PdfField(Extent3 extent, Layout layout) : grid_(extent), layout_(layout) {
  if (extent.empty()) throw UsageError("PdfField extent must be positive on every axis, got " + extent.str());
  src_.assign(grid_.total() * D3Q19::Q, T(0));
  dst_.assign(grid_.total() * D3Q19::Q, T(0));
  flags_ = CellFlags(grid_);
}

extern template class PdfField<float>;
extern template class PdfField<double>;

}  // namespace latticeblocks::lattice
