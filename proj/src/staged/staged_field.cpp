#include "latticeblocks/staged/staged_field.hpp"

#include <cstring>

#include "latticeblocks/lattice/kernels.hpp"

namespace latticeblocks::staged {

using comm::all_directions;
using comm::boundary_region;
using comm::ghost_region;
using comm::outgoing_pdfs;
using lattice::D3Q19;
using lattice::Layout;
using lattice::slot;

namespace {

constexpr std::size_t buffer_index(CommDirection d) { return comm::index(d) - 1; }

template <typename T>
std::span<const std::byte> as_bytes_of(const std::vector<T>& v) {
  return std::as_bytes(std::span<const T>(v));
}

}  // namespace

template <typename T>
StagedField<T>::StagedField(StagedArena& arena, const lattice::PdfField<T>& initial)
    : arena_(&arena), grid_(initial.grid()), flags_(initial.flags()) {
  if (initial.empty()) throw UsageError("cannot stage an empty field");
  const auto soa = initial.layout() == Layout::SoA ? initial : lattice::layout_convert(initial, Layout::SoA);
  const std::size_t scalars = grid_.total() * D3Q19::Q;

  src_ = arena.allocate<T>(scalars);
  dst_ = arena.allocate<T>(scalars);
  arena.stage_in(src_, std::as_bytes(soa.src()));
  arena.stage_in(dst_, std::as_bytes(soa.dst()));

  kinds_ = arena.allocate<lattice::CellKind>(grid_.total());
  arena.stage_in(kinds_, std::as_bytes(flags_.kinds()));

  for (auto d : all_directions()) {
    const auto n = comm::payload_scalars(extent(), d);
    buffers_[buffer_index(d)] = arena.allocate<T>(n);
    host_staging_[buffer_index(d)].resize(n * sizeof(T));
  }

  const auto links = flags_.bounce_links();
  std::vector<std::uint64_t> fluid_slots, wall_slots;
  for (const auto& link : links) {
    fluid_slots.push_back(slot<Layout::SoA>(link.fluid_cell, D3Q19::opposite[link.dir], grid_.total()));
    wall_slots.push_back(slot<Layout::SoA>(link.wall_cell, link.dir, grid_.total()));
    link_dirs_.push_back(link.dir);
    link_velocities_.push_back(link.wall_velocity);
  }
  link_fluid_slots_ = arena.allocate<std::uint64_t>(links.size());
  link_wall_slots_ = arena.allocate<std::uint64_t>(links.size());
  link_values_ = arena.allocate<T>(links.size());
  arena.stage_in(link_fluid_slots_, as_bytes_of(fluid_slots));
  arena.stage_in(link_wall_slots_, as_bytes_of(wall_slots));
  host_link_staging_.resize(links.size() * sizeof(T));
  pack_ghost();
}

template <typename T>
void StagedField<T>::pack_ghost() {
  const std::size_t ncells = grid_.total();
  std::uint64_t copied = 0;
  arena_->launch([&](const DeviceAccess& access) {
    const T* src = src_.get(access);
    for (auto d : all_directions()) {
      T* out = buffers_[buffer_index(d)].get(access);
      const auto pdfs = outgoing_pdfs(d);
      std::size_t k = 0;
      boundary_region(extent(), d).for_each([&](int x, int y, int z) {
        const auto c = grid_.index(x, y, z);
        for (auto i : pdfs) out[k++] = src[slot<Layout::SoA>(c, i, ncells)];
      });
      copied += k * sizeof(T);
    }
  });
  arena_->count_on_device(copied);
}

template <typename T>
void StagedField<T>::unpack_ghost() {
  const std::size_t ncells = grid_.total();
  std::uint64_t copied = 0;
  arena_->launch([&](const DeviceAccess& access) {
    T* src = src_.get(access);
    for (auto d : all_directions()) {
      const T* in = buffers_[buffer_index(d)].get(access);
      const auto pdfs = outgoing_pdfs(comm::opposite(d));
      std::size_t k = 0;
      ghost_region(extent(), d).for_each([&](int x, int y, int z) {
        const auto c = grid_.index(x, y, z);
        for (auto i : pdfs) src[slot<Layout::SoA>(c, i, ncells)] = in[k++];
      });
      copied += k * sizeof(T);
    }
  });
  arena_->count_on_device(copied);
}

template <typename T>
void StagedField<T>::host_boundary(const lattice::LbmParams& params) {
  const std::size_t n = link_dirs_.size();
  if (n == 0) return;

  arena_->launch([&](const DeviceAccess& access) {
    const T* src = src_.get(access);
    const std::uint64_t* from = link_fluid_slots_.get(access);
    T* values = link_values_.get(access);
    for (std::size_t k = 0; k < n; ++k) values[k] = src[from[k]];
  });
  arena_->count_on_device(n * sizeof(T));

  arena_->stage_out(link_values_, host_link_staging_);
  std::vector<T> values(n);
  std::memcpy(values.data(), host_link_staging_.data(), host_link_staging_.size());
  for (std::size_t k = 0; k < n; ++k) {
    values[k] = values[k] + lattice::bounce_back_term<T>(link_dirs_[k], link_velocities_[k], params.rho0);
  }
  std::memcpy(host_link_staging_.data(), values.data(), host_link_staging_.size());
  arena_->stage_in(link_values_, host_link_staging_);

  arena_->launch([&](const DeviceAccess& access) {
    T* src = src_.get(access);
    const std::uint64_t* to = link_wall_slots_.get(access);
    const T* vals = link_values_.get(access);
    for (std::size_t k = 0; k < n; ++k) src[to[k]] = vals[k];
  });
  arena_->count_on_device(n * sizeof(T));
}

template <typename T>
void StagedField<T>::collide_stream_pull(const lattice::LbmParams& params) {
  const T omega = T(1) / T(params.tau);
  const T rho0 = T(params.rho0);
  arena_->launch([&](const DeviceAccess& access) {
    lattice::collide_stream_pull_raw<T, Layout::SoA>(grid_, kinds_.get(access), src_.get(access), dst_.get(access),
                                                     omega, rho0);
  });
  swap(src_, dst_);
}

template <typename T>
void StagedField<T>::stage_out(CommDirection side, ByteWriter& out) {
  auto& staging = host_staging_[buffer_index(side)];
  arena_->stage_out(buffers_[buffer_index(side)], staging);
  out.put_bytes(staging);
}

template <typename T>
Bytes StagedField<T>::stage_out(CommDirection side) {
  ByteWriter w;
  stage_out(side, w);
  return w.take();
}

template <typename T>
void StagedField<T>::stage_in(CommDirection side, std::span<const std::byte> bytes) {
  auto& staging = host_staging_[buffer_index(side)];
  if (bytes.size() != staging.size()) {
    throw ProtocolError("staged buffer " + comm::name(side) + " expects " + std::to_string(staging.size()) +
                        " bytes, got " + std::to_string(bytes.size()));
  }
  std::memcpy(staging.data(), bytes.data(), bytes.size());
  arena_->stage_in(buffers_[buffer_index(side)], staging);
}

template <typename T>
void StagedField<T>::swap_buffers(StagedField& a, CommDirection side_a, StagedField& b, CommDirection side_b) {
  if (a.arena_ != b.arena_) throw UsageError("buffer swap across different staged arenas");
  auto& ba = a.buffers_[buffer_index(side_a)];
  auto& bb = b.buffers_[buffer_index(side_b)];
  if (ba.size() != bb.size()) throw UsageError("buffer swap between buffers of different size");
  swap(ba, bb);
}

template <typename T>
lattice::PdfField<T> StagedField<T>::download() {
  lattice::PdfField<T> out(extent(), Layout::SoA);
  out.flags() = flags_;
  arena_->stage_out(src_, std::as_writable_bytes(out.src()));
  arena_->stage_out(dst_, std::as_writable_bytes(out.dst()));
  return out;
}

template <typename T>
void run_staged_sweep(StagedField<T>& field, const lattice::LbmParams& params) {
  field.unpack_ghost();
  field.host_boundary(params);
  field.collide_stream_pull(params);
  field.pack_ghost();
}

TransferCounters predicted_sweep_traffic(const Extent3& extent, std::size_t wall_links, std::size_t scalar_size) {
  std::uint64_t buffers = 0;
  for (auto d : all_directions()) buffers += comm::payload_scalars(extent, d) * scalar_size;
  TransferCounters c;
  c.on_device = 2 * buffers + 2 * wall_links * scalar_size;
  c.device_to_host = wall_links * scalar_size;
  c.host_to_device = wall_links * scalar_size;
  return c;
}

template class StagedField<float>;
template class StagedField<double>;
template void run_staged_sweep<float>(StagedField<float>&, const lattice::LbmParams&);
template void run_staged_sweep<double>(StagedField<double>&, const lattice::LbmParams&);

}  // namespace latticeblocks::staged
