#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latticeblocks/bytes.hpp"
#include "latticeblocks/domain/selector.hpp"
#include "latticeblocks/lattice/pdf_field.hpp"

namespace latticeblocks::domain {

using lattice::Extent3;

struct BlockId {
  std::uint64_t value = 0;

  auto operator<=>(const BlockId&) const = default;
  std::string str() const { return "block#" + std::to_string(value); }
};

/// Half-open box [min, max) in global cell coordinates.
struct Aabb {
  std::array<int, 3> min{0, 0, 0};
  std::array<int, 3> max{0, 0, 0};

  Extent3 extent() const { return {max[0] - min[0], max[1] - min[1], max[2] - min[2]}; }
  bool contains(int x, int y, int z) const {
    return x >= min[0] && y >= min[1] && z >= min[2] && x < max[0] && y < max[1] && z < max[2];
  }
  bool operator==(const Aabb&) const = default;
};

/// Management data of one Block, replicated on every process.
struct Block {
  BlockId id;
  Aabb aabb;
  int rank = 0;
  Selector hs;
  Selector bs;
  std::array<int, 3> grid_position{0, 0, 0};
};

struct Neighbor {
  std::size_t side;  // stencil direction 1..18 pointing from the block towards the neighbour
  BlockId id;
  int rank;
  bool local;
};

/// The single Patch covering the domain, split into a Cartesian grid of Blocks.
class Patch {
 public:
  Patch() = default;
  Patch(Extent3 extent, std::array<int, 3> grid, std::array<bool, 3> periodic, int process_count,
        std::vector<Block> blocks);

  const Extent3& extent() const { return extent_; }
  const std::array<int, 3>& grid() const { return grid_; }
  const std::array<bool, 3>& periodic() const { return periodic_; }
  int process_count() const { return process_count_; }
  std::span<const Block> blocks() const { return blocks_; }

  const Block& block(BlockId id) const;
  const Block& block_at(std::array<int, 3> grid_position) const;
  std::vector<BlockId> blocks_of(int rank) const;

  /// Face and edge neighbours that exist, in side order. Non-periodic domain
  /// boundaries are omitted; periodic axes wrap, possibly onto the block itself.
  std::vector<Neighbor> neighbors_of(BlockId id, int local_rank) const;

  /// Byte image of all management data; identical on every process.
  Bytes serialize() const;

 private:
  Extent3 extent_{};
  std::array<int, 3> grid_{1, 1, 1};
  std::array<bool, 3> periodic_{false, false, false};
  int process_count_ = 1;
  std::vector<Block> blocks_;
};

/// Near-uniform split of one axis: low-index blocks take the remainder cells.
std::vector<int> split_axis(int cells, int parts);

/// Splits `extent` into `grid` Blocks in lexicographic order (x fastest) and
/// hands them to processes in rank order, `blocks_per_process[r]` each. Every
/// block of rank r gets hs = process_hs[r].
Patch decompose(Extent3 extent, std::array<int, 3> grid, std::array<bool, 3> periodic,
                std::span<const Selector> process_hs, std::span<const int> blocks_per_process,
                Selector bs = selectors::bs_pure_lbm());

}  // namespace latticeblocks::domain
