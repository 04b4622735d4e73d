#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <thread>

#include "latticeblocks/comm/exchange.hpp"

using namespace latticeblocks;
using namespace latticeblocks::comm;
using domain::BlockId;
using domain::Selector;
namespace selectors = domain::selectors;

namespace {

// Distinct value for every global cell and direction.
double marker(int x, int y, int z, std::size_t i) { return 1e-3 * (x + 100 * y + 10000 * z) + 1e-9 * double(i); }

int wrap(int v, int n) { return ((v % n) + n) % n; }

LocalBlocks<double> make_blocks(const domain::Patch& patch, int rank, staged::StagedArena& arena) {
  LocalBlocks<double> blocks;
  for (auto id : patch.blocks_of(rank)) {
    const auto& b = patch.block(id);
    lattice::PdfField<double> f(b.aabb.extent(), domain::host_layout(b.hs));
    const auto& n = f.extent();
    for (int z = 0; z < n.z; ++z)
      for (int y = 0; y < n.y; ++y)
        for (int x = 0; x < n.x; ++x)
          for (std::size_t i = 0; i < 19; ++i)
            f.at(x, y, z, i) = marker(b.aabb.min[0] + x, b.aabb.min[1] + y, b.aabb.min[2] + z, i);
    LocalBlock<double> local;
    local.block = &b;
    if (domain::is_staged(b.hs)) {
      local.data.add(selectors::data_pdfs(),
                     domain::FieldHandle<double>(std::in_place_type<staged::StagedField<double>>, arena, f));
    } else {
      local.data.add(selectors::data_pdfs(), domain::FieldHandle<double>(std::move(f)));
    }
    blocks.push_back(std::move(local));
  }
  return blocks;
}

// Every face and edge ghost cell must hold the incoming PDFs of its global
// (wrapped) source cell.
int ghost_errors(LocalBlocks<double>& blocks, const domain::Patch& patch) {
  int errors = 0;
  const auto& ext = patch.extent();
  for (auto& lb : blocks) {
    lattice::PdfField<double> f;
    if (auto* h = std::get_if<lattice::PdfField<double>>(&lb.pdfs())) {
      f = *h;
    } else {
      auto& s = domain::staged_field(lb);
      s.unpack_ghost();
      f = s.download();
    }
    const auto& lo = lb.block->aabb.min;
    for (auto side : all_directions()) {
      bool exists = true;
      const auto& e = vector(side);
      for (int a = 0; a < 3; ++a) {
        const int p = lb.block->grid_position[a] + e[a];
        if ((p < 0 || p >= patch.grid()[a]) && !patch.periodic()[a]) exists = false;
      }
      if (!exists) continue;
      ghost_region(f.extent(), side).for_each([&](int x, int y, int z) {
        for (auto i : outgoing_pdfs(opposite(side))) {
          const double want = marker(wrap(lo[0] + x, ext.x), wrap(lo[1] + y, ext.y), wrap(lo[2] + z, ext.z), i);
          if (f.at(x, y, z, i) != want) ++errors;
        }
      });
    }
  }
  return errors;
}

struct RankOutcome {
  int errors = -1;
  std::uint64_t bytes_sent = 0;
  std::size_t expected_bytes = 0;
  std::string failure;
};

template <typename MakeTransport>
std::vector<RankOutcome> exchange_on_threads(const domain::Patch& patch, MakeTransport make) {
  const int size = patch.process_count();
  std::vector<RankOutcome> out(static_cast<std::size_t>(size));
  std::vector<std::thread> threads;
  for (int r = 0; r < size; ++r) {
    threads.emplace_back([&, r] {
      try {
        auto transport = make(r);
        staged::StagedArena arena;
        auto blocks = make_blocks(patch, r, arena);
        const auto registry = domain::default_registry<double>();
        communicate(blocks, patch, *transport, registry);
        auto& o = out[std::size_t(r)];
        o.errors = ghost_errors(blocks, patch);
        o.bytes_sent = transport->bytes_sent();
        for (const auto& [peer, bytes] : expected_buffer_sizes(patch, r, sizeof(double))) o.expected_bytes += bytes;
      } catch (const std::exception& e) {
        out[std::size_t(r)].failure = e.what();
      }
    });
  }
  for (auto& t : threads) t.join();
  return out;
}

domain::Patch mixed_patch(std::array<bool, 3> periodic) {
  const std::vector<Selector> hs{selectors::hs_cpu(), selectors::hs_gpu(), selectors::hs_cpu_soa()};
  const std::vector<int> counts{3, 3, 2};
  return domain::decompose({7, 6, 5}, {2, 2, 2}, periodic, hs, counts);
}

}  // namespace

TEST_CASE("outgoing PDF lists have 5 entries per face and 1 per edge") {
  for (auto d : all_directions()) {
    const auto pdfs = outgoing_pdfs(d);
    CHECK(pdfs.size() == (is_face(d) ? 5u : 1u));
    for (auto i : pdfs) CHECK(lattice::dot(lattice::D3Q19::e[i], vector(d)) > 0);
  }
  CHECK(payload_scalars({4, 5, 6}, CommDirection::XP) == 5u * 30u);
  CHECK(payload_scalars({4, 5, 6}, CommDirection::XPYM) == 6u);
  CHECK(name(CommDirection::XMZP) == "-x+z");
}

TEST_CASE("message header is 13 little-endian bytes") {
  ByteWriter w;
  encode_header({BlockId{0x0102030405060708ull}, CommDirection::YPZM, 0x0A0B0C0Du}, w);
  const auto bytes = w.take();
  REQUIRE(bytes.size() == BlockMessageHeader::kEncodedSize);
  const std::vector<int> expected{8, 7, 6, 5, 4, 3, 2, 1, 17, 0x0D, 0x0C, 0x0B, 0x0A};
  for (std::size_t k = 0; k < expected.size(); ++k) CHECK(std::to_integer<int>(bytes[k]) == expected[k]);
}

TEST_CASE("process buffers round trip and reject truncation") {
  ByteWriter w;
  BlockMessage a{{BlockId{3}, CommDirection::XP, 4}, Bytes(4, std::byte{0x11})};
  BlockMessage b{{BlockId{9}, CommDirection::XMYM, 2}, Bytes(2, std::byte{0x22})};
  encode(a, w);
  encode(b, w);
  auto buffer = w.take();
  const auto views = parse_process_buffer(buffer);
  REQUIRE(views.size() == 2);
  CHECK(views[0].header.receiver == BlockId{3});
  CHECK(views[1].header.direction == CommDirection::XMYM);
  CHECK(views[1].payload.size() == 2);
  CHECK(std::to_integer<int>(views[1].payload[0]) == 0x22);

  buffer.pop_back();
  CHECK_THROWS_AS(parse_process_buffer(buffer), ProtocolError);
  Bytes short_header(5);
  CHECK_THROWS_AS(parse_process_buffer(short_header), ProtocolError);
  ByteWriter bad;
  encode_header({BlockId{1}, CommDirection(19), 0}, bad);
  CHECK_THROWS_AS(parse_process_buffer(bad.take()), ProtocolError);
}

TEST_CASE("insert rejects unknown receivers and wrong payload lengths") {
  const std::vector<Selector> hs{selectors::hs_cpu()};
  const std::vector<int> counts{2};
  const auto patch = domain::decompose({4, 2, 2}, {2, 1, 1}, {false, false, false}, hs, counts);
  staged::StagedArena arena;
  auto blocks = make_blocks(patch, 0, arena);
  const auto registry = domain::default_registry<double>();
  const auto msg = extract(blocks[0], CommDirection::XP, BlockId{1}, registry);
  CHECK(msg.payload.size() == payload_scalars({2, 2, 2}, CommDirection::XP) * sizeof(double));
  insert(BlockMessageView{msg.header, msg.payload}, blocks, registry);
  CHECK(domain::host_field(blocks[1]).at(-1, 0, 0, 1) == marker(1, 0, 0, 1));

  auto short_payload = std::span<const std::byte>(msg.payload).first(msg.payload.size() - 8);
  auto header = msg.header;
  header.payload_bytes -= 8;
  CHECK_THROWS_AS(insert(BlockMessageView{header, short_payload}, blocks, registry), ProtocolError);
  header = msg.header;
  header.receiver = BlockId{7};
  CHECK_THROWS_AS(insert(BlockMessageView{header, msg.payload}, blocks, registry), ProtocolError);
}

TEST_CASE("ghost exchange over the in-process hub fills every face and edge ghost") {
  for (bool periodic : {false, true}) {
    const auto patch = mixed_patch({periodic, periodic, periodic});
    InProcessHub hub(patch.process_count());
    const auto out = exchange_on_threads(patch, [&](int r) { return hub.endpoint(r); });
    for (const auto& o : out) {
      CHECK(o.failure == "");
      CHECK(o.errors == 0);
      CHECK(o.bytes_sent == o.expected_bytes);
    }
  }
}

TEST_CASE("ghost exchange over Unix sockets matches the in-process result") {
  char templ[] = "/tmp/lbcommXXXXXX";
  REQUIRE(mkdtemp(templ) != nullptr);
  const std::filesystem::path dir(templ);
  const auto patch = mixed_patch({true, false, true});
  const auto out = exchange_on_threads(patch, [&](int r) { return SocketTransport::connect(dir, r, 3); });
  for (const auto& o : out) {
    CHECK(o.failure == "");
    CHECK(o.errors == 0);
    CHECK(o.bytes_sent == o.expected_bytes);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("transports deliver messages in order") {
  InProcessHub hub(2);
  auto a = hub.endpoint(0);
  auto b = hub.endpoint(1);
  for (int k = 0; k < 3; ++k) a->send(1, Bytes(std::size_t(k + 1), std::byte(k)));
  for (int k = 0; k < 3; ++k) CHECK(b->receive(0).size() == std::size_t(k + 1));
  CHECK(a->messages_sent() == 3);
  hub.abort("stop");
  CHECK_THROWS_AS(b->receive(0), TransportError);
  CHECK_THROWS_AS(a->send(5, Bytes{}), TransportError);
}
