#include "latticeblocks/comm/exchange.hpp"

#include <algorithm>

#include "latticeblocks/lattice/kernels.hpp"
#include "latticeblocks/staged/staged_field.hpp"

namespace latticeblocks::comm {

using domain::BlockId;
using lattice::PdfField;

template <typename T>
void host_extract(const PdfField<T>& field, CommDirection side, ByteWriter& out) {
  const auto pdfs = outgoing_pdfs(side);
  boundary_region(field.extent(), side).for_each([&](int x, int y, int z) {
    for (auto i : pdfs) out.put(field.at(x, y, z, i));
  });
}

template <typename T>
void host_insert(PdfField<T>& field, CommDirection side, ByteReader& in) {
  const auto pdfs = outgoing_pdfs(side);
  ghost_region(field.extent(), opposite(side)).for_each([&](int x, int y, int z) {
    for (auto i : pdfs) field.at(x, y, z, i) = in.get<T>();
  });
}

namespace {

template <typename T>
LocalBlock<T>* find_local(LocalBlocks<T>& blocks, BlockId id) {
  auto it = std::lower_bound(blocks.begin(), blocks.end(), id,
                             [](const LocalBlock<T>& b, BlockId v) { return b.id() < v; });
  if (it == blocks.end() || it->id() != id) return nullptr;
  return &*it;
}

template <typename T>
const domain::BlockFunctions<T>& functions_of(const LocalBlock<T>& b, const Registry<T>& registry) {
  return registry.resolve({domain::selectors::fs_lbm(), b.block->hs, b.block->bs});
}

template <typename T>
std::uint32_t payload_bytes(const lattice::Extent3& extent, CommDirection side) {
  return std::uint32_t(payload_scalars(extent, side) * sizeof(T));
}

template <typename T>
void append_message(LocalBlock<T>& block, CommDirection side, BlockId receiver, const Registry<T>& registry,
                    ByteWriter& out) {
  const auto& fns = functions_of(block, registry);
  if (!fns.extract) throw DispatchError("no extraction function for hs=" + block.block->hs.name());
  const auto bytes = payload_bytes<T>(block.block->aabb.extent(), side);
  encode_header({receiver, side, bytes}, out);
  const auto before = out.size();
  fns.extract(block, side, out);
  if (out.size() - before != bytes) {
    throw ProtocolError("extraction for " + block.id().str() + " side " + name(side) + " produced " +
                        std::to_string(out.size() - before) + " bytes, expected " + std::to_string(bytes));
  }
}

}  // namespace

template <typename T>
BlockMessage extract(LocalBlock<T>& block, CommDirection side, BlockId receiver, const Registry<T>& registry) {
  ByteWriter w;
  append_message(block, side, receiver, registry, w);
  auto bytes = w.take();
  BlockMessage m;
  m.header = {receiver, side, std::uint32_t(bytes.size() - BlockMessageHeader::kEncodedSize)};
  m.payload.assign(bytes.begin() + BlockMessageHeader::kEncodedSize, bytes.end());
  return m;
}

template <typename T>
void insert(const BlockMessageView& message, LocalBlocks<T>& blocks, const Registry<T>& registry) {
  auto* receiver = find_local(blocks, message.header.receiver);
  if (receiver == nullptr) {
    throw ProtocolError("message addressed to " + message.header.receiver.str() + ", which is not owned locally");
  }
  const auto side = message.header.direction;
  const auto expected = payload_bytes<T>(receiver->block->aabb.extent(), opposite(side));
  if (message.header.payload_bytes != expected || message.payload.size() != expected) {
    throw ProtocolError("payload for " + receiver->id().str() + " from side " + name(side) + " has " +
                        std::to_string(message.payload.size()) + " bytes (header " +
                        std::to_string(message.header.payload_bytes) + "), expected " + std::to_string(expected));
  }
  const auto& fns = functions_of(*receiver, registry);
  if (!fns.insert) throw DispatchError("no insertion function for hs=" + receiver->block->hs.name());
  ByteReader reader(message.payload);
  fns.insert(*receiver, side, reader);
}

template <typename T>
void local_exchange(LocalBlock<T>& a, LocalBlock<T>& b, CommDirection side, const Registry<T>& registry) {
  const auto back = opposite(side);
  auto* host_a = std::get_if<PdfField<T>>(&a.pdfs());
  auto* host_b = std::get_if<PdfField<T>>(&b.pdfs());
  if (host_a != nullptr && host_b != nullptr) {
    auto copy = [](const PdfField<T>& from, PdfField<T>& to, CommDirection s) {
      const auto pdfs = outgoing_pdfs(s);
      const auto src_box = boundary_region(from.extent(), s);
      const auto dst_box = ghost_region(to.extent(), opposite(s));
      for (int z = 0; z < src_box.hi[2] - src_box.lo[2]; ++z)
        for (int y = 0; y < src_box.hi[1] - src_box.lo[1]; ++y)
          for (int x = 0; x < src_box.hi[0] - src_box.lo[0]; ++x)
            for (auto i : pdfs) {
              to.at(dst_box.lo[0] + x, dst_box.lo[1] + y, dst_box.lo[2] + z, i) =
                  from.at(src_box.lo[0] + x, src_box.lo[1] + y, src_box.lo[2] + z, i);
            }
    };
    copy(*host_a, *host_b, side);
    copy(*host_b, *host_a, back);
    return;
  }
  auto* staged_a = std::get_if<staged::StagedField<T>>(&a.pdfs());
  auto* staged_b = std::get_if<staged::StagedField<T>>(&b.pdfs());
  if (staged_a != nullptr && staged_b != nullptr) {
    staged::StagedField<T>::swap_buffers(*staged_a, side, *staged_b, back);
    return;
  }
  // Mixed backends: both payloads leave before either arrives, because a staged
  // block sends and receives through the same device buffer.
  ByteWriter ab, ba;
  append_message(a, side, b.id(), registry, ab);
  append_message(b, back, a.id(), registry, ba);
  const auto bytes_ab = ab.take();
  const auto bytes_ba = ba.take();
  for (const auto& [bytes, receiver] : {std::pair{&bytes_ab, &b}, std::pair{&bytes_ba, &a}}) {
    const auto views = parse_process_buffer(*bytes);
    const auto& fns = functions_of(*receiver, registry);
    ByteReader reader(views.front().payload);
    fns.insert(*receiver, views.front().header.direction, reader);
  }
}

std::map<int, std::size_t> expected_buffer_sizes(const domain::Patch& patch, int rank, std::size_t scalar_size) {
  std::map<int, std::size_t> sizes;
  for (auto id : patch.blocks_of(rank)) {
    const auto extent = patch.block(id).aabb.extent();
    for (const auto& nb : patch.neighbors_of(id, rank)) {
      if (nb.local) continue;
      sizes[nb.rank] += BlockMessageHeader::kEncodedSize + payload_scalars(extent, direction(nb.side)) * scalar_size;
    }
  }
  return sizes;
}

template <typename T>
CommStats communicate(LocalBlocks<T>& blocks, const domain::Patch& patch, Transport& transport,
                      const Registry<T>& registry) {
  const int rank = transport.rank();
  CommStats stats;
  std::map<int, ByteWriter> outgoing;

  for (auto& a : blocks) {
    for (const auto& nb : patch.neighbors_of(a.id(), rank)) {
      const auto side = direction(nb.side);
      if (!nb.local) {
        append_message(a, side, nb.id, registry, outgoing[nb.rank]);
        ++stats.block_messages;
        continue;
      }
      // Each facing pair of sides is exchanged once.
      const auto back = opposite(side);
      if (std::pair(nb.id.value, index(back)) < std::pair(a.id().value, index(side))) continue;
      auto* b = find_local(blocks, nb.id);
      if (b == nullptr) throw UsageError(nb.id.str() + " is marked local but has no data on rank " + std::to_string(rank));
      local_exchange(a, *b, side, registry);
      ++stats.local_exchanges;
    }
  }

  for (auto& [dest, writer] : outgoing) {
    auto bytes = writer.take();
    stats.bytes_sent += bytes.size();
    transport.send(dest, std::move(bytes));
    ++stats.messages_sent;
  }

  for (const auto& [source, size] : expected_buffer_sizes(patch, rank, sizeof(T))) {
    Bytes buffer;
    try {
      buffer = transport.receive(source);
    } catch (const TransportError& e) {
      throw TransportError("rank " + std::to_string(rank) + " receiving from rank " + std::to_string(source) + ": " +
                           e.what());
    }
    ++stats.messages_received;
    if (buffer.size() != size) {
      throw ProtocolError("process buffer from rank " + std::to_string(source) + " has " +
                          std::to_string(buffer.size()) + " bytes, expected " + std::to_string(size));
    }
    for (const auto& message : parse_process_buffer(buffer)) insert(message, blocks, registry);
  }
  return stats;
}

}  // namespace latticeblocks::comm

namespace latticeblocks::domain {

lattice::Layout host_layout(Selector hs) {
  return hs == selectors::hs_cpu_soa() ? lattice::Layout::SoA : lattice::Layout::AoS;
}

bool is_staged(Selector hs) { return hs == selectors::hs_gpu(); }

template <typename T>
Registry<T> default_registry() {
  Registry<T> registry;
  const auto fs = selectors::fs_lbm();
  const auto bs = selectors::bs_pure_lbm();

  auto host_functions = [](std::string name) {
    BlockFunctions<T> f;
    f.name = std::move(name);
    f.kernel = [](LocalBlock<T>& b, const lattice::LbmParams& params) {
      auto& field = host_field(b);
      lattice::bounce_back(field, params);
      lattice::collide_stream_pull(field, params);
    };
    f.extract = [](LocalBlock<T>& b, comm::CommDirection side, ByteWriter& out) {
      comm::host_extract(host_field(b), side, out);
    };
    f.insert = [](LocalBlock<T>& b, comm::CommDirection side, ByteReader& in) {
      comm::host_insert(host_field(b), side, in);
    };
    return f;
  };
  registry.add({fs, selectors::hs_cpu(), bs}, host_functions("AoS host kernel"));
  registry.add({fs, selectors::hs_cpu_soa(), bs}, host_functions("SoA host kernel"));

  BlockFunctions<T> gpu;
  gpu.name = "SoA staged kernel";
  gpu.staged = true;
  gpu.kernel = [](LocalBlock<T>& b, const lattice::LbmParams& params) {
    staged::run_staged_sweep(staged_field(b), params);
  };
  gpu.extract = [](LocalBlock<T>& b, comm::CommDirection side, ByteWriter& out) {
    staged_field(b).stage_out(side, out);
  };
  gpu.insert = [](LocalBlock<T>& b, comm::CommDirection side, ByteReader& in) {
    auto& field = staged_field(b);
    const auto target = comm::opposite(side);
    field.stage_in(target, in.get_bytes(field.buffer_bytes(target)));
  };
  registry.add({fs, selectors::hs_gpu(), bs}, std::move(gpu));
  return registry;
}

template Registry<float> default_registry<float>();
template Registry<double> default_registry<double>();

}  // namespace latticeblocks::domain

namespace latticeblocks::comm {

#define LATTICEBLOCKS_INSTANTIATE(T)                                                                               \
  template void host_extract<T>(const PdfField<T>&, CommDirection, ByteWriter&);                                    \
  template void host_insert<T>(PdfField<T>&, CommDirection, ByteReader&);                                           \
  template BlockMessage extract<T>(LocalBlock<T>&, CommDirection, BlockId, const Registry<T>&);                     \
  template void insert<T>(const BlockMessageView&, LocalBlocks<T>&, const Registry<T>&);                           \
  template void local_exchange<T>(LocalBlock<T>&, LocalBlock<T>&, CommDirection, const Registry<T>&);               \
  template CommStats communicate<T>(LocalBlocks<T>&, const domain::Patch&, Transport&, const Registry<T>&);

LATTICEBLOCKS_INSTANTIATE(float)
LATTICEBLOCKS_INSTANTIATE(double)

#undef LATTICEBLOCKS_INSTANTIATE

}  // namespace latticeblocks::comm
