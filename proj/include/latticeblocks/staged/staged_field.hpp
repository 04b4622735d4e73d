#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "latticeblocks/bytes.hpp"
#include "latticeblocks/comm/direction.hpp"
#include "latticeblocks/lattice/params.hpp"
#include "latticeblocks/lattice/pdf_field.hpp"
#include "latticeblocks/staged/arena.hpp"

namespace latticeblocks::staged {

using comm::CommDirection;
using lattice::CellFlags;
using lattice::CellGrid;
using lattice::Extent3;

/// A block's PDFs resident in a StagedArena, always in SoA layout, with one
/// device buffer per face and edge (6 + 12) and matching host staging buffers.
///
/// Buffer `side` holds, after pack_ghost(), the PDFs leaving through that side
/// in wire order; unpack_ghost() copies whatever buffer `side` holds into the
/// ghost layer on that side. Local exchange between two staged blocks is a
/// swap of the two facing buffers.
template <typename T>
class StagedField {
 public:
  /// Uploads `initial` (any layout) and its geometry, counted as host-to-device,
  /// then packs the side buffers for the first communication.
  StagedField(StagedArena& arena, const lattice::PdfField<T>& initial);

  StagedField(StagedField&&) noexcept = default;
  StagedField& operator=(StagedField&&) noexcept = default;

  StagedArena& arena() const { return *arena_; }
  const Extent3& extent() const { return grid_.interior(); }
  const CellGrid& grid() const { return grid_; }
  const CellFlags& flags() const { return flags_; }

  /// Boundary PDFs -> device buffers, all 18 sides.
  void pack_ghost();
  /// Device buffers -> ghost layer, all 18 sides.
  void unpack_ghost();
  /// Moving-wall bounce-back evaluated on the host: the reflected PDFs are
  /// staged out, corrected and staged back into the wall slots.
  void host_boundary(const lattice::LbmParams& params);
  /// SoA pull-stream-collide on the device, then src/dst swap.
  void collide_stream_pull(const lattice::LbmParams& params);

  /// Device buffer `side` -> host staging buffer -> appended to `out`.
  void stage_out(CommDirection side, ByteWriter& out);
  Bytes stage_out(CommDirection side);
  /// Bytes -> host staging buffer -> device buffer `side`.
  void stage_in(CommDirection side, std::span<const std::byte> bytes);

  std::size_t buffer_bytes(CommDirection side) const { return buffers_[comm::index(side) - 1].bytes(); }
  std::size_t wall_links() const { return link_dirs_.size(); }

  /// Exchanges buffer identities; both fields must live in the same arena.
  static void swap_buffers(StagedField& a, CommDirection side_a, StagedField& b, CommDirection side_b);

  /// Full copy back to the host (SoA), counted as device-to-host.
  lattice::PdfField<T> download();

 private:
  StagedArena* arena_;
  CellGrid grid_;
  CellFlags flags_;
  DeviceBuffer<T> src_;
  DeviceBuffer<T> dst_;
  DeviceBuffer<lattice::CellKind> kinds_;
  std::array<DeviceBuffer<T>, comm::kDirectionCount> buffers_;
  std::array<Bytes, comm::kDirectionCount> host_staging_;

  DeviceBuffer<std::uint64_t> link_fluid_slots_;
  DeviceBuffer<std::uint64_t> link_wall_slots_;
  DeviceBuffer<T> link_values_;
  std::vector<std::uint8_t> link_dirs_;
  std::vector<lattice::Vec3d> link_velocities_;
  Bytes host_link_staging_;
};

/// One staged work step: unpack ghosts, host-side boundary handling, device
/// kernel, pack ghosts for the next communication.
template <typename T>
void run_staged_sweep(StagedField<T>& field, const lattice::LbmParams& params);

/// Predicted per-step counter increments of run_staged_sweep (no communication).
TransferCounters predicted_sweep_traffic(const Extent3& extent, std::size_t wall_links, std::size_t scalar_size);

extern template class StagedField<float>;
extern template class StagedField<double>;

}  // namespace latticeblocks::staged
