#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

#include "latticeblocks/clock.hpp"
#include "latticeblocks/errors.hpp"

namespace latticeblocks::staged {

struct TransferCounters {
  std::uint64_t host_to_device = 0;
  std::uint64_t device_to_host = 0;
  std::uint64_t on_device = 0;

  TransferCounters operator-(const TransferCounters& o) const {
    return {host_to_device - o.host_to_device, device_to_host - o.device_to_host, on_device - o.on_device};
  }
  TransferCounters& operator+=(const TransferCounters& o) {
    host_to_device += o.host_to_device;
    device_to_host += o.device_to_host;
    on_device += o.on_device;
    return *this;
  }
  bool operator==(const TransferCounters&) const = default;
};

class StagedArena;

/// Capability passed to device kernels; only StagedArena::launch creates one.
class DeviceAccess {
  friend class StagedArena;
  DeviceAccess() = default;
};

/// Typed view of arena memory. The host can only reach the contents through a
/// DeviceAccess token or the arena's counted stage_in/stage_out.
template <typename T>
class DeviceBuffer {
 public:
  DeviceBuffer() = default;

  std::size_t size() const { return count_; }
  std::size_t bytes() const { return count_ * sizeof(T); }
  const StagedArena* arena() const { return arena_; }

  T* get(const DeviceAccess&) const { return ptr_; }

  friend void swap(DeviceBuffer& a, DeviceBuffer& b) noexcept {
    std::swap(a.arena_, b.arena_);
    std::swap(a.ptr_, b.ptr_);
    std::swap(a.count_, b.count_);
  }

 private:
  friend class StagedArena;
  DeviceBuffer(StagedArena* arena, T* ptr, std::size_t count) : arena_(arena), ptr_(ptr), count_(count) {}

  StagedArena* arena_ = nullptr;
  T* ptr_ = nullptr;
  std::size_t count_ = 0;
};

/// Separate memory space emulating accelerator memory. Every host/device
/// crossing is byte-counted; kernels run on host compute inside launch().
///
/// With `guard` set the arena pages are PROT_NONE outside launch/stage calls,
/// so any direct host access faults (SIGSEGV).
class StagedArena {
 public:
  struct Options {
    double link_bandwidth = 5e9;   // bytes/s of the modelled host link
    double compute_speedup = 1.0;  // device clock = kernel CPU time / speedup
    bool guard = false;
    std::size_t reserve_bytes = std::size_t(1) << 30;
  };

  StagedArena() : StagedArena(Options{}) {}
  explicit StagedArena(Options options);
  ~StagedArena();

  StagedArena(const StagedArena&) = delete;
  StagedArena& operator=(const StagedArena&) = delete;

  template <typename T>
  DeviceBuffer<T> allocate(std::size_t count) {
    auto* p = static_cast<T*>(allocate_bytes(count * sizeof(T), alignof(T)));
    return DeviceBuffer<T>(this, p, count);
  }

  template <typename T>
  void stage_in(const DeviceBuffer<T>& dst, std::span<const std::byte> src, std::size_t byte_offset = 0) {
    check_owner(dst.arena_);
    copy_in(reinterpret_cast<std::byte*>(dst.ptr_) + byte_offset, src, dst.bytes() - byte_offset);
  }

  template <typename T>
  void stage_out(const DeviceBuffer<T>& src, std::span<std::byte> dst, std::size_t byte_offset = 0) {
    check_owner(src.arena_);
    copy_out(reinterpret_cast<const std::byte*>(src.ptr_) + byte_offset, dst, src.bytes() - byte_offset);
  }

  /// Runs `kernel(access)` with device memory reachable, timing it in thread
  /// CPU seconds; on-device copy bytes
  /// reported by the kernel are added with count_on_device().
  template <typename F>
  void launch(F&& kernel) {
    Scope scope(*this);
    const double t0 = thread_cpu_seconds();
    kernel(DeviceAccess{});
    kernel_seconds_ += thread_cpu_seconds() - t0;
  }

  void count_on_device(std::uint64_t bytes) { counters_.on_device += bytes; }

  const TransferCounters& counters() const { return counters_; }
  const Options& options() const { return options_; }
  std::size_t bytes_allocated() const { return used_; }

  /// Seconds the modelled link needs for all counted crossings.
  double modeled_transfer_seconds() const {
    return double(counters_.host_to_device + counters_.device_to_host) / options_.link_bandwidth;
  }
  double kernel_seconds() const { return kernel_seconds_; }
  /// Device clock: scaled kernel time plus modelled transfer time.
  double device_seconds() const { return kernel_seconds_ / options_.compute_speedup + modeled_transfer_seconds(); }

  /// Raw start of the arena; exposed only so tests can probe the guard.
  const void* base_for_testing() const { return base_; }

 private:
  class Scope {
   public:
    explicit Scope(StagedArena& a) : arena_(a) { arena_.open(); }
    ~Scope() { arena_.close(); }

   private:
    StagedArena& arena_;
  };

  void* allocate_bytes(std::size_t bytes, std::size_t align);
  void copy_in(std::byte* dst, std::span<const std::byte> src, std::size_t capacity);
  void copy_out(const std::byte* src, std::span<std::byte> dst, std::size_t available);
  void check_owner(const StagedArena* owner) const;
  void open();
  void close();
  void protect(bool accessible);

  Options options_;
  std::byte* base_ = nullptr;
  std::size_t used_ = 0;
  std::size_t committed_ = 0;  // bytes currently mapped read/write when not guarded
  int open_depth_ = 0;
  TransferCounters counters_;
  double kernel_seconds_ = 0;
};

}  // namespace latticeblocks::staged
