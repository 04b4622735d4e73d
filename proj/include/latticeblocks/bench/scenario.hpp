#pragma once

#include <cstdint>
#include <vector>

#include "latticeblocks/bench/config.hpp"
#include "latticeblocks/domain/patch.hpp"
#include "latticeblocks/lattice/pdf_field.hpp"

namespace latticeblocks::bench {

struct CellInit {
  lattice::CellKind kind = lattice::CellKind::Fluid;
  lattice::Vec3d wall_velocity{0, 0, 0};
};

/// Geometry of the scenario at global cell (x, y, z); coordinates outside the
/// domain on a non-periodic axis are resting walls, periodic axes wrap.
CellInit cell_at(const RunConfig& config, int x, int y, int z);

/// Initial field of one block: flags for interior and ghost cells, centered
/// PDFs zero except for the seeded perturbation.
template <typename T>
lattice::PdfField<T> make_block_field(const RunConfig& config, const domain::Block& block, lattice::Layout layout);

std::uint64_t splitmix64(std::uint64_t x);

/// Contribution of one PDF value to the field checksum; the checksum is the
/// wrapping sum of these over all fluid cells and directions.
std::uint64_t checksum_term(std::uint64_t global_cell, std::size_t dir, double value);

/// Final state in global coordinates, AoS, interior cells only.
struct GlobalField {
  lattice::Extent3 extent{};
  std::vector<double> values;         // cells * 19
  std::vector<std::uint8_t> fluid;    // cells

  std::size_t cell(int x, int y, int z) const {
    return (std::size_t(z) * std::size_t(extent.y) + std::size_t(y)) * std::size_t(extent.x) + std::size_t(x);
  }
  double at(int x, int y, int z, std::size_t dir) const { return values[cell(x, y, z) * 19 + dir]; }
};

/// Largest |a - b| over fluid cells; the extents and fluid masks must agree.
double max_abs_diff(const GlobalField& a, const GlobalField& b);

/// Mean x velocity of every fluid row of a Couette channel (index j is the
/// j-th fluid row above the bottom wall).
std::vector<double> couette_profile(const GlobalField& field, double rho0);

}  // namespace latticeblocks::bench
