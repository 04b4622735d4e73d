#include "latticeblocks/staged/arena.hpp"

#include <sys/mman.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string>

namespace latticeblocks::staged {

namespace {

std::size_t page_size() {
  static const std::size_t size = std::size_t(sysconf(_SC_PAGESIZE));
  return size;
}

std::size_t round_up(std::size_t n, std::size_t align) { return (n + align - 1) / align * align; }

}  // namespace

StagedArena::StagedArena(Options options) : options_(options) {
  if (!(options_.link_bandwidth > 0)) throw ConfigError("staged arena link bandwidth must be positive");
  if (!(options_.compute_speedup > 0)) throw ConfigError("staged arena compute speedup must be positive");
  options_.reserve_bytes = round_up(options_.reserve_bytes, page_size());
  void* p = mmap(nullptr, options_.reserve_bytes, PROT_NONE, MAP_PRIVATE | MAP_ANONYMOUS | MAP_NORESERVE, -1, 0);
  if (p == MAP_FAILED) throw Error(ErrorCategory::Usage, std::string("arena reservation failed: ") + std::strerror(errno));
  base_ = static_cast<std::byte*>(p);
}

StagedArena::~StagedArena() {
  if (base_ != nullptr) munmap(base_, options_.reserve_bytes);
}

void* StagedArena::allocate_bytes(std::size_t bytes, std::size_t align) {
  const std::size_t start = round_up(used_, align < 64 ? 64 : align);
  if (start + bytes > options_.reserve_bytes) {
    throw UsageError("staged arena exhausted: " + std::to_string(start + bytes) + " of " +
                     std::to_string(options_.reserve_bytes) + " bytes");
  }
  used_ = start + bytes;
  const std::size_t needed = round_up(used_, page_size());
  if (needed > committed_) {
    const int prot = (options_.guard && open_depth_ == 0) ? PROT_NONE : PROT_READ | PROT_WRITE;
    if (mprotect(base_ + committed_, needed - committed_, prot) != 0) {
      throw UsageError(std::string("arena commit failed: ") + std::strerror(errno));
    }
    committed_ = needed;
  }
  return base_ + start;
}

void StagedArena::protect(bool accessible) {
  if (committed_ == 0) return;
  mprotect(base_, committed_, accessible ? PROT_READ | PROT_WRITE : PROT_NONE);
}

void StagedArena::open() {
  if (open_depth_++ == 0 && options_.guard) protect(true);
}

void StagedArena::close() {
  if (--open_depth_ == 0 && options_.guard) protect(false);
}

void StagedArena::check_owner(const StagedArena* owner) const {
  if (owner != this) throw UsageError("device buffer belongs to a different staged arena");
}

void StagedArena::copy_in(std::byte* dst, std::span<const std::byte> src, std::size_t capacity) {
  if (src.size() > capacity) {
    throw UsageError("stage_in of " + std::to_string(src.size()) + " bytes into a " + std::to_string(capacity) +
                     "-byte device buffer");
  }
  Scope scope(*this);
  std::memcpy(dst, src.data(), src.size());
  counters_.host_to_device += src.size();
}

void StagedArena::copy_out(const std::byte* src, std::span<std::byte> dst, std::size_t available) {
  if (dst.size() > available) {
    throw UsageError("stage_out of " + std::to_string(dst.size()) + " bytes from a " + std::to_string(available) +
                     "-byte device buffer");
  }
  Scope scope(*this);
  std::memcpy(dst.data(), src, dst.size());
  counters_.device_to_host += dst.size();
}

}  // namespace latticeblocks::staged
