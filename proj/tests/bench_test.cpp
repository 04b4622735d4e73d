#include <doctest.h>

#include <cstdlib>

#include "latticeblocks/bench/config.hpp"
#include "latticeblocks/bench/runner.hpp"
#include "latticeblocks/bench/scaling.hpp"
#include "latticeblocks/bench/scenario.hpp"

using namespace latticeblocks;
using namespace latticeblocks::bench;
using domain::Selector;
namespace selectors = domain::selectors;

namespace {

RunConfig small_cavity(int units) {
  auto c = default_config(Scenario::LidCavity);
  c.extent = {12, 10, 8};
  c.block_grid = {2, 2, 2};
  c.steps = 12;
  set_homogeneous_units(c, units, selectors::hs_cpu());
  return c;
}

struct ScopedEnv {
  ScopedEnv(const char* name, const char* value) : name_(name) { setenv(name, value, 1); }
  ~ScopedEnv() { unsetenv(name_); }
  const char* name_;
};

}  // namespace

TEST_CASE("configuration text round trips") {
  auto c = default_config(Scenario::Couette);
  c.nodes.configs = {{"gpu-node", 2, {selectors::hs_gpu(), selectors::hs_cpu()}}};
  c.nodes.node_assignment = {"gpu-node"};
  c.weights = {{selectors::hs_gpu(), 22.0}, {selectors::hs_cpu(), 1.0}};
  c.block_grid = {1, 2, 1};
  c.link_bandwidth = 3e9;
  const auto text = canonical(c);
  const auto back = parse_config(text);
  CHECK(canonical(back) == text);
  CHECK(back.processes() == 2);
  CHECK(back.wall_velocity[0] == 0.05);
  CHECK(balance::speed_of(back.weights, selectors::hs_gpu()) == 22.0);
}

TEST_CASE("configuration parsing rejects bad input") {
  CHECK_THROWS_AS(parse_config("[run]\nscenario = couette\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[mystery]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nscenario = volcano\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nextent = 4 4\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), ConfigError);

  auto c = default_config(Scenario::RestBox);
  c.tau = 0.4;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = default_config(Scenario::RestBox);
  c.block_grid = {1, 1, 1};
  set_homogeneous_units(c, 2, selectors::hs_cpu());
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = default_config(Scenario::RestBox);
  c.nodes.configs = {{"n", 1, {Selector("hsFPGA")}}};
  c.nodes.node_assignment = {"n"};
  c.weights = {{Selector("hsFPGA"), 1.0}};
  CHECK_THROWS(validate(c));
}

TEST_CASE("scenario geometry") {
  const auto couette = default_config(Scenario::Couette);
  CHECK(cell_at(couette, 0, 0, 0).kind == lattice::CellKind::Wall);
  CHECK(cell_at(couette, 1, 1, 1).kind == lattice::CellKind::Fluid);
  const auto top = cell_at(couette, 2, couette.extent.y - 1, 2);
  CHECK(top.kind == lattice::CellKind::Wall);
  CHECK(top.wall_velocity[0] == 0.05);
  CHECK(cell_at(couette, -1, 1, 1).kind == lattice::CellKind::Fluid);

  const auto cavity = default_config(Scenario::LidCavity);
  CHECK(cell_at(cavity, 3, 3, -1).kind == lattice::CellKind::Wall);
  CHECK(cell_at(cavity, 3, cavity.extent.y - 1, 3).wall_velocity[0] == 0.05);
  CHECK(cell_at(cavity, 3, cavity.extent.y, 3).wall_velocity[0] == 0.0);
  CHECK(cell_at(cavity, 3, -1, 3).wall_velocity[0] == 0.0);
}

TEST_CASE("checksum hashing is splitmix64") {
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
  CHECK(checksum_term(5, 3, 0.25) != checksum_term(5, 4, 0.25));
  CHECK(checksum_term(5, 3, 0.25) != checksum_term(5, 3, -0.25));
}

TEST_CASE("thread and socket runs produce the same field") {
  auto c = small_cavity(3);
  c.nodes.configs = {{"mixed", 3, {selectors::hs_cpu(), selectors::hs_gpu(), selectors::hs_cpu_soa()}}};
  c.nodes.node_assignment = {"mixed"};
  c.weights = {{selectors::hs_cpu(), 1.0}, {selectors::hs_gpu(), 1.0}, {selectors::hs_cpu_soa(), 1.0}};
  RunOptions o;
  o.gather_field = true;
  const auto threads = run_scenario(c, o);
  c.transport = TransportKind::Socket;
  const auto sockets = run_scenario(c, o);
  CHECK(threads.checksum_final == sockets.checksum_final);
  CHECK(max_abs_diff(*threads.field, *sockets.field) == 0.0);
  CHECK(threads.counter_checks > 0);
  CHECK(threads.counter_mismatches == 0);
  CHECK(sockets.counter_mismatches == 0);
  CHECK(threads.units.size() == 3);
}

TEST_CASE("verification catches an injected ghost-layer fault") {
  const auto c = small_cavity(1);
  std::vector<VerifyCase> cases(2);
  cases[0].grid = {1, 1, 1};
  cases[1].grid = {2, 2, 2};
  cases[1].units = 2;
  CHECK(verify_decomposition(c, cases).pass);
  {
    ScopedEnv env(kFaultInjectEnv, "1");
    const auto bad = verify_decomposition(c, cases);
    CHECK_FALSE(bad.pass);
    CHECK(bad.max_diff > 1e-6);
    CHECK(bad.offending.find("2x2x2") != std::string::npos);
  }
}

TEST_CASE("explicit block counts must cover the grid") {
  auto c = small_cavity(2);
  c.transport = TransportKind::Socket;
  RunOptions o;
  o.blocks_per_process = {8, 1};
  CHECK_THROWS_AS(run_scenario(c, o), ConfigError);
}

TEST_CASE("conservation and residual tracking on a perturbed periodic box") {
  auto c = default_config(Scenario::RestBox);
  c.extent = {8, 8, 8};
  c.block_grid = {2, 1, 1};
  c.steps = 30;
  c.perturbation = 1e-3;
  c.seed = 3;
  set_homogeneous_units(c, 2, selectors::hs_cpu());
  RunOptions o;
  o.track_conservation = true;
  const auto r = run_scenario(c, o);
  CHECK(r.conservation.size() == 31);
  CHECK(r.mass_drift <= 1e-12);
  CHECK(r.momentum_drift <= 1e-12);
  CHECK(r.residual_first > r.residual_last);
  CHECK(report_csv(r).find("counter_checks") != std::string::npos);
}

TEST_CASE("grid text parsing") {
  CHECK(parse_grid("4x2x1") == std::array<int, 3>{4, 2, 1});
  CHECK_THROWS_AS(parse_grid("4x2"), ConfigError);
  CHECK_THROWS_AS(parse_grid("0x1x1"), ConfigError);
}
