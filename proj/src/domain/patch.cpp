#include "latticeblocks/domain/patch.hpp"

#include <numeric>

#include "latticeblocks/errors.hpp"
#include "latticeblocks/lattice/stencil.hpp"

namespace latticeblocks::domain {

using lattice::D3Q19;

std::vector<int> split_axis(int cells, int parts) {
  if (parts <= 0 || parts > cells) {
    throw ConfigError("cannot split " + std::to_string(cells) + " cells into " + std::to_string(parts) + " blocks");
  }
  std::vector<int> sizes(parts, cells / parts);
  for (int i = 0; i < cells % parts; ++i) ++sizes[i];
  return sizes;
}

Patch::Patch(Extent3 extent, std::array<int, 3> grid, std::array<bool, 3> periodic, int process_count,
             std::vector<Block> blocks)
    : extent_(extent), grid_(grid), periodic_(periodic), process_count_(process_count), blocks_(std::move(blocks)) {}

const Block& Patch::block(BlockId id) const {
  if (id.value >= blocks_.size()) throw UsageError("unknown " + id.str());
  return blocks_[id.value];
}

const Block& Patch::block_at(std::array<int, 3> p) const {
  return blocks_[std::size_t(p[0]) + std::size_t(grid_[0]) * (std::size_t(p[1]) + std::size_t(grid_[1]) * p[2])];
}

std::vector<BlockId> Patch::blocks_of(int rank) const {
  std::vector<BlockId> out;
  for (const auto& b : blocks_) {
    if (b.rank == rank) out.push_back(b.id);
  }
  return out;
}

std::vector<Neighbor> Patch::neighbors_of(BlockId id, int local_rank) const {
  const auto& self = block(id);
  std::vector<Neighbor> out;
  for (std::size_t side = 1; side < D3Q19::Q; ++side) {
    std::array<int, 3> p = self.grid_position;
    bool exists = true;
    for (int a = 0; a < 3; ++a) {
      p[a] += D3Q19::e[side][a];
      if (p[a] < 0 || p[a] >= grid_[a]) {
        if (!periodic_[a]) {
          exists = false;
          break;
        }
        p[a] = (p[a] + grid_[a]) % grid_[a];
      }
    }
    if (!exists) continue;
    const auto& other = block_at(p);
    out.push_back({side, other.id, other.rank, other.rank == local_rank});
  }
  return out;
}

Bytes Patch::serialize() const {
  ByteWriter w;
  for (int a = 0; a < 3; ++a) w.put(std::int32_t(extent_[a]));
  for (int a = 0; a < 3; ++a) w.put(std::int32_t(grid_[a]));
  for (int a = 0; a < 3; ++a) w.put(std::uint8_t(periodic_[a]));
  w.put(std::int32_t(process_count_));
  w.put(std::uint64_t(blocks_.size()));
  for (const auto& b : blocks_) {
    w.put(b.id.value);
    for (int a = 0; a < 3; ++a) w.put(std::int32_t(b.aabb.min[a]));
    for (int a = 0; a < 3; ++a) w.put(std::int32_t(b.aabb.max[a]));
    w.put(std::int32_t(b.rank));
    w.put_string(b.hs.name());
    w.put_string(b.bs.name());
  }
  return w.take();
}

Patch decompose(Extent3 extent, std::array<int, 3> grid, std::array<bool, 3> periodic,
                std::span<const Selector> process_hs, std::span<const int> blocks_per_process, Selector bs) {
  if (extent.empty()) throw ConfigError("patch extent must be positive, got " + extent.str());
  if (process_hs.empty()) throw ConfigError("at least one process is required");
  if (blocks_per_process.size() != process_hs.size()) {
    throw ConfigError("blocks-per-process list has " + std::to_string(blocks_per_process.size()) +
                      " entries for " + std::to_string(process_hs.size()) + " processes");
  }
  const std::array<std::vector<int>, 3> sizes{split_axis(extent.x, grid[0]), split_axis(extent.y, grid[1]),
                                              split_axis(extent.z, grid[2])};
  const long total = long(grid[0]) * grid[1] * grid[2];
  const long assigned = std::accumulate(blocks_per_process.begin(), blocks_per_process.end(), 0L);
  if (assigned != total) {
    throw ConfigError("block assignment covers " + std::to_string(assigned) + " blocks but the grid has " +
                      std::to_string(total));
  }
  for (int n : blocks_per_process) {
    if (n < 0) throw ConfigError("negative block count in assignment");
  }

  std::array<std::vector<int>, 3> starts;
  for (int a = 0; a < 3; ++a) {
    starts[a].resize(sizes[a].size() + 1, 0);
    std::partial_sum(sizes[a].begin(), sizes[a].end(), starts[a].begin() + 1);
  }

  std::vector<Block> blocks;
  blocks.reserve(std::size_t(total));
  int rank = 0;
  int used_by_rank = 0;
  for (int bz = 0; bz < grid[2]; ++bz) {
    for (int by = 0; by < grid[1]; ++by) {
      for (int bx = 0; bx < grid[0]; ++bx) {
        while (used_by_rank == blocks_per_process[rank]) {
          ++rank;
          used_by_rank = 0;
        }
        Block b;
        b.id = BlockId{blocks.size()};
        b.grid_position = {bx, by, bz};
        b.aabb.min = {starts[0][bx], starts[1][by], starts[2][bz]};
        b.aabb.max = {starts[0][bx + 1], starts[1][by + 1], starts[2][bz + 1]};
        b.rank = rank;
        b.hs = process_hs[rank];
        b.bs = bs;
        blocks.push_back(b);
        ++used_by_rank;
      }
    }
  }
  return Patch(extent, grid, periodic, int(process_hs.size()), std::move(blocks));
}

}  // namespace latticeblocks::domain
