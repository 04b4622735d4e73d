#pragma once

#include <cstdint>
#include <map>
#include <span>

#include "latticeblocks/comm/message.hpp"
#include "latticeblocks/comm/transport.hpp"
#include "latticeblocks/domain/block_data.hpp"
#include "latticeblocks/domain/patch.hpp"

namespace latticeblocks::comm {

using domain::LocalBlock;
using domain::LocalBlocks;
using domain::Registry;

// Host-field payload routines in wire order (cells x fastest, then y, z; per
// cell the outgoing directions ascending).
template <typename T>
void host_extract(const lattice::PdfField<T>& field, CommDirection side, ByteWriter& out);
template <typename T>
void host_insert(lattice::PdfField<T>& field, CommDirection side, ByteReader& in);

/// Serialises the PDFs leaving `block` through `side` into a message for
/// `receiver`, using the extraction function registered for the block's hs.
template <typename T>
BlockMessage extract(LocalBlock<T>& block, CommDirection side, domain::BlockId receiver, const Registry<T>& registry);

/// Scatters one received message into the ghost layer of its receiver.
template <typename T>
void insert(const BlockMessageView& message, LocalBlocks<T>& blocks, const Registry<T>& registry);

/// Exchanges ghost data between two blocks of the local process in both
/// directions: a's side `side` faces b's side opposite(side). Host pairs copy
/// directly, staged pairs swap their device buffers, mixed pairs go through
/// extract/insert.
template <typename T>
void local_exchange(LocalBlock<T>& a, LocalBlock<T>& b, CommDirection side, const Registry<T>& registry);

struct CommStats {
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_received = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t block_messages = 0;
  std::uint64_t local_exchanges = 0;
};

/// One communication phase: every local block's ghost layer (faces and edges)
/// receives its neighbours' boundary PDFs. Exactly one transport message goes
/// to each remote rank that owns a neighbour.
template <typename T>
CommStats communicate(LocalBlocks<T>& blocks, const domain::Patch& patch, Transport& transport,
                      const Registry<T>& registry);

/// Bytes one process buffer to `peer` will carry, computed from geometry.
std::map<int, std::size_t> expected_buffer_sizes(const domain::Patch& patch, int rank, std::size_t scalar_size);

}  // namespace latticeblocks::comm
