#pragma once

#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "latticeblocks/domain/patch.hpp"
#include "latticeblocks/domain/registry.hpp"
#include "latticeblocks/domain/selector.hpp"
#include "latticeblocks/lattice/params.hpp"
#include "latticeblocks/lattice/pdf_field.hpp"
#include "latticeblocks/staged/staged_field.hpp"

namespace latticeblocks::domain {

template <typename T>
using FieldHandle = std::variant<lattice::PdfField<T>, staged::StagedField<T>>;

/// Heterogeneous list of simulation data attached to a Block, keyed by a
/// data-kind selector.
template <typename T>
class BlockData {
 public:
  void add(Selector kind, FieldHandle<T> handle) {
    for (const auto& entry : entries_) {
      if (entry.first == kind) throw UsageError("block data '" + kind.name() + "' added twice");
    }
    entries_.emplace_back(kind, std::move(handle));
  }

  FieldHandle<T>& get(Selector kind) {
    for (auto& entry : entries_) {
      if (entry.first == kind) return entry.second;
    }
    throw DispatchError("block has no data of kind '" + kind.name() + "'");
  }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<std::pair<Selector, FieldHandle<T>>> entries_;
};

/// A Block owned by the local process together with its simulation data.
template <typename T>
struct LocalBlock {
  const Block* block = nullptr;
  BlockData<T> data;

  BlockId id() const { return block->id; }
  FieldHandle<T>& pdfs() { return data.get(selectors::data_pdfs()); }
};

template <typename T>
using LocalBlocks = std::vector<LocalBlock<T>>;

template <typename T>
lattice::PdfField<T>& host_field(LocalBlock<T>& b) {
  auto* f = std::get_if<lattice::PdfField<T>>(&b.pdfs());
  if (f == nullptr) throw DispatchError(b.id().str() + " holds staged data where a host field is required");
  return *f;
}

template <typename T>
staged::StagedField<T>& staged_field(LocalBlock<T>& b) {
  auto* f = std::get_if<staged::StagedField<T>>(&b.pdfs());
  if (f == nullptr) throw DispatchError(b.id().str() + " holds host data where a staged field is required");
  return *f;
}

/// Functionality bundle selected per (fs, hs, bs): the work-step kernel plus
/// the hs-specific ghost extraction and insertion routines.
template <typename T>
struct BlockFunctions {
  using KernelFn = std::function<void(LocalBlock<T>&, const lattice::LbmParams&)>;

  std::string name;
  bool staged = false;
  KernelFn kernel;
  // Appends the payload leaving through `side`.
  std::function<void(LocalBlock<T>&, comm::CommDirection side, ByteWriter&)> extract;
  // Consumes the payload of a message sent through `side` of the neighbour,
  // i.e. fills this block's ghost layer on opposite(side).
  std::function<void(LocalBlock<T>&, comm::CommDirection side, ByteReader&)> insert;
};

template <typename T>
using Registry = FunctionalityRegistry<BlockFunctions<T>>;

/// Registrations used by the scenarios:
///   (LBM, hsCPU,    pureLBM) -> AoS host kernel
///   (LBM, hsCPUSoA, pureLBM) -> SoA host kernel
///   (LBM, hsGPU,    pureLBM) -> SoA staged kernel
template <typename T>
Registry<T> default_registry();

/// Pure lookup of the work-step kernel for a UID triple.
template <typename T>
const typename BlockFunctions<T>::KernelFn& resolve_kernel(const Registry<T>& registry, Selector fs, Selector hs,
                                                           Selector bs) {
  return registry.resolve({fs, hs, bs}).kernel;
}

/// Layout a host block with the given hs stores its PDFs in.
lattice::Layout host_layout(Selector hs);
bool is_staged(Selector hs);

}  // namespace latticeblocks::domain
