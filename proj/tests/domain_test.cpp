#include <doctest.h>

#include <set>

#include "latticeblocks/domain/block_data.hpp"
#include "latticeblocks/domain/patch.hpp"
#include "latticeblocks/domain/registry.hpp"

using namespace latticeblocks;
using namespace latticeblocks::domain;

TEST_CASE("selectors intern names and the default is the wildcard") {
  CHECK(Selector("hsCPU") == selectors::hs_cpu());
  CHECK(Selector("hsCPU") != selectors::hs_gpu());
  CHECK(Selector().is_wildcard());
  CHECK(selectors::hs_gpu().name() == "hsGPU");
}

TEST_CASE("registry picks the most specific registration") {
  FunctionalityRegistry<int> reg;
  const Selector lbm("LBM"), cpu("hsCPU"), gpu("hsGPU"), pure("pureLBM"), other("other");
  reg.add({lbm, Selector::any(), Selector::any()}, 1);
  reg.add({lbm, gpu, Selector::any()}, 2);
  reg.add({lbm, gpu, pure}, 3);
  CHECK(reg.resolve({lbm, cpu, pure}) == 1);
  CHECK(reg.resolve({lbm, gpu, other}) == 2);
  CHECK(reg.resolve({lbm, gpu, pure}) == 3);
  CHECK_THROWS_AS(reg.resolve({other, cpu, pure}), DispatchError);
  CHECK_FALSE(reg.contains({other, cpu, pure}));
  CHECK_THROWS_AS(reg.add({lbm, gpu, pure}, 4), ConfigError);

  FunctionalityRegistry<int> tie;
  tie.add({lbm, cpu, Selector::any()}, 1);
  tie.add({lbm, Selector::any(), pure}, 2);
  CHECK_THROWS_AS(tie.resolve({lbm, cpu, pure}), ConfigError);
}

TEST_CASE("default registry dispatches by hardware selector") {
  const auto reg = default_registry<double>();
  const auto fs = selectors::fs_lbm(), bs = selectors::bs_pure_lbm();
  CHECK(reg.resolve({fs, selectors::hs_cpu(), bs}).name == "AoS host kernel");
  CHECK(reg.resolve({fs, selectors::hs_cpu_soa(), bs}).name == "SoA host kernel");
  CHECK(reg.resolve({fs, selectors::hs_gpu(), bs}).name == "SoA staged kernel");
  CHECK(reg.resolve({fs, selectors::hs_gpu(), bs}).staged);
  CHECK_THROWS_AS(resolve_kernel(reg, fs, Selector("hsFPGA"), bs), DispatchError);
  CHECK(host_layout(selectors::hs_cpu()) == lattice::Layout::AoS);
  CHECK(host_layout(selectors::hs_cpu_soa()) == lattice::Layout::SoA);
  CHECK(is_staged(selectors::hs_gpu()));
}

TEST_CASE("block data is keyed by data kind") {
  BlockData<double> data;
  data.add(selectors::data_pdfs(), lattice::PdfField<double>({2, 2, 2}, lattice::Layout::AoS));
  CHECK_THROWS_AS(data.add(selectors::data_pdfs(), lattice::PdfField<double>({2, 2, 2}, lattice::Layout::AoS)),
                  UsageError);
  CHECK(std::holds_alternative<lattice::PdfField<double>>(data.get(selectors::data_pdfs())));
  CHECK_THROWS_AS(data.get(Selector("velocity")), DispatchError);
}

TEST_CASE("axis split puts the remainder on low blocks") {
  CHECK(split_axis(10, 3) == std::vector<int>{4, 3, 3});
  CHECK(split_axis(48, 4) == std::vector<int>{12, 12, 12, 12});
  CHECK_THROWS_AS(split_axis(2, 3), ConfigError);
}

TEST_CASE("decompose tiles the extent and deals blocks in rank order") {
  const std::vector<Selector> hs{selectors::hs_cpu(), selectors::hs_gpu()};
  const std::vector<int> counts{3, 1};
  const auto patch = decompose({10, 4, 4}, {2, 2, 1}, {false, false, false}, hs, counts);
  REQUIRE(patch.blocks().size() == 4);
  std::size_t cells = 0;
  for (const auto& b : patch.blocks()) cells += b.aabb.extent().cells();
  CHECK(cells == 160);
  CHECK(patch.blocks()[0].aabb.extent() == lattice::Extent3{5, 2, 4});
  CHECK(patch.blocks_of(0).size() == 3);
  CHECK(patch.block(BlockId{3}).rank == 1);
  CHECK(patch.block(BlockId{3}).hs == selectors::hs_gpu());
  CHECK(patch.serialize() == decompose({10, 4, 4}, {2, 2, 1}, {false, false, false}, hs, counts).serialize());
  const std::vector<int> wrong{2, 1};
  CHECK_THROWS_AS(decompose({10, 4, 4}, {2, 2, 1}, {false, false, false}, hs, wrong), ConfigError);
}

TEST_CASE("neighbours match a brute-force search on a 3x3x3 grid") {
  for (bool periodic : {false, true}) {
    const std::vector<Selector> hs(27, selectors::hs_cpu());
    const std::vector<int> counts(27, 1);
    const auto patch = decompose({9, 9, 9}, {3, 3, 3}, {periodic, periodic, periodic}, hs, counts);
    for (const auto& b : patch.blocks()) {
      // Oracle: every other block whose grid offset (wrapped if periodic) is a
      // face or edge vector.
      std::set<std::pair<std::size_t, std::uint64_t>> expected;
      for (const auto& o : patch.blocks()) {
        for (std::size_t side = 1; side < 19; ++side) {
          bool hit = true;
          for (int a = 0; a < 3; ++a) {
            int d = o.grid_position[a] - b.grid_position[a];
            if (periodic) d = ((d + 1) % 3 + 3) % 3 - 1;
            hit = hit && d == lattice::D3Q19::e[side][a];
          }
          if (hit) expected.insert({side, o.id.value});
        }
      }
      std::set<std::pair<std::size_t, std::uint64_t>> got;
      for (const auto& n : patch.neighbors_of(b.id, b.rank)) {
        got.insert({n.side, n.id.value});
        CHECK(n.local == (n.rank == b.rank));
      }
      CHECK(got == expected);
    }
  }
}

TEST_CASE("2x2x2 blocks on 8 ranks have 6 neighbour ranks each") {
  const std::vector<Selector> hs(8, selectors::hs_cpu());
  const std::vector<int> counts(8, 1);
  const auto patch = decompose({8, 8, 8}, {2, 2, 2}, {false, false, false}, hs, counts);
  for (int r = 0; r < 8; ++r) {
    std::set<int> ranks;
    for (const auto& n : patch.neighbors_of(BlockId{std::uint64_t(r)}, r)) ranks.insert(n.rank);
    CHECK(ranks.size() == 6);
  }
}
