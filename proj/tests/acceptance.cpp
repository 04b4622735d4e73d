// Acceptance suite: one PASS/FAIL line per criterion.
//
//   latticeblocks_acceptance            run all criteria
//   latticeblocks_acceptance 4 7        run a subset
//
// Exit status is 0 only if every selected criterion passes.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "latticeblocks/balance/balance.hpp"
#include "latticeblocks/bench/config.hpp"
#include "latticeblocks/bench/runner.hpp"
#include "latticeblocks/bench/scaling.hpp"
#include "latticeblocks/perf/model.hpp"

namespace lb = latticeblocks;
using lb::bench::RunConfig;
using lb::bench::Scenario;
using lb::bench::TransportKind;
using lb::bench::VerifyCase;
using lb::domain::Selector;
using lb::lattice::Precision;
namespace selectors = lb::domain::selectors;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

RunConfig suite_config(const std::string& name) {
  return lb::bench::load_config(std::string(LATTICEBLOCKS_CONFIG_DIR) + "/" + name + ".ini");
}

std::string fixed(double v, int digits = 3) { return fmt::format("{:.{}f}", v, digits); }

// ---------------------------------------------------------------------------

Outcome byte_counts() {
  using lb::perf::ArchKind;
  const std::size_t h_sp = lb::perf::bytes_per_update(ArchKind::HostRfo, Precision::SP);
  const std::size_t h_dp = lb::perf::bytes_per_update(ArchKind::HostRfo, Precision::DP);
  const std::size_t s_sp = lb::perf::bytes_per_update(ArchKind::Staged, Precision::SP);
  const std::size_t s_dp = lb::perf::bytes_per_update(ArchKind::Staged, Precision::DP);
  return {h_sp == 228 && h_dp == 456 && s_sp == 152 && s_dp == 304,
          fmt::format("host {}/{} staged {}/{} bytes (want 228/456, 152/304)", h_sp, h_dp, s_sp, s_dp)};
}

Outcome table_estimate() {
  const std::vector<lb::perf::LinkProfile> links{{"PCIe", 5e9}, {"IB", 3e9}};
  const double one = lb::perf::estimate(100, 300, std::span(links).first(1), Precision::SP).mflups;
  const double two = lb::perf::estimate(100, 300, links, Precision::SP).mflups;
  const bool ok = std::abs(one - 264) <= 0.02 * 264 && std::abs(two - 218) <= 0.02 * 218;
  return {ok, fmt::format("{:.1f} MFLUPS (want 264 +-2%), {:.1f} MFLUPS (want 218 +-2%)", one, two)};
}

Outcome bandwidth_bounds() {
  const auto host = lb::perf::reference_host();
  const auto staged = lb::perf::reference_staged();
  const double h_sp = lb::perf::bandwidth_bound(host, Precision::SP);
  const double h_dp = lb::perf::bandwidth_bound(host, Precision::DP);
  const double s_sp = lb::perf::bandwidth_bound(staged, Precision::SP);
  const double s_dp = lb::perf::bandwidth_bound(staged, Precision::DP);
  const bool host_ok = std::floor(h_sp) == 144 && std::floor(h_dp) == 72;
  const bool dp_ok = std::floor(s_dp) == 258;
  const bool sp_ok = std::abs(s_sp - 516) <= 0.01 * 516;
  return {host_ok && dp_ok && sp_ok,
          fmt::format("host {:.1f}/{:.1f} (want 144/72) {}; staged dp {:.1f} (want 258) {}; staged sp {:.1f} "
                      "(want 516 +-1%) {}",
                      h_sp, h_dp, host_ok ? "ok" : "off", s_dp, dp_ok ? "ok" : "off", s_sp, sp_ok ? "ok" : "off")};
}

Outcome couette() {
  auto config = suite_config("couette");
  lb::bench::RunOptions options;
  options.gather_field = true;
  options.track_residual = false;
  const auto report = lb::bench::run_scenario(config, options);
  const auto profile = lb::bench::couette_profile(*report.field, config.rho0);
  const double U = config.wall_velocity[0];
  const double N = double(profile.size());
  double worst = 0;
  for (std::size_t j = 0; j < profile.size(); ++j) {
    const double exact = U * (double(j) + 0.5) / N;
    worst = std::max(worst, std::abs(profile[j] - exact) / exact);
  }
  return {profile.size() == 16 && worst <= 1e-6,
          fmt::format("N={} U={} tau={} {} steps: max relative error {:.2e} (limit 1e-6)", profile.size(), U,
                      config.tau, config.steps, worst)};
}

std::vector<VerifyCase> invariance_cases() {
  std::vector<VerifyCase> cases;
  const std::vector<std::array<int, 3>> grids{{1, 1, 1}, {2, 2, 2}, {4, 2, 1}, {4, 4, 4}};
  for (auto transport : {TransportKind::InProcess, TransportKind::Socket}) {
    for (const auto& g : grids) {
      for (int units : {1, 2, 8}) {
        if (units > g[0] * g[1] * g[2]) continue;
        if (transport == TransportKind::Socket && units == 1 && g == grids.front()) continue;
        cases.push_back({g, units, transport, {}});
      }
    }
    cases.push_back({{2, 2, 2}, 2, transport, {selectors::hs_cpu(), selectors::hs_gpu()}});
    std::vector<Selector> eight;
    for (int r = 0; r < 8; ++r) {
      eight.push_back(r % 3 == 0 ? selectors::hs_gpu() : (r % 3 == 1 ? selectors::hs_cpu() : selectors::hs_cpu_soa()));
    }
    cases.push_back({{4, 4, 4}, 8, transport, eight});
    cases.push_back({{4, 2, 1}, 8, transport, eight});
  }
  return cases;
}

RunConfig at_48(Scenario s) {
  auto c = lb::bench::default_config(s);
  c.extent = {48, 48, 48};
  c.precision = Precision::DP;
  c.steps = 30;
  return c;
}

Outcome decomposition_invariance() {
  const auto cases = invariance_cases();
  double worst = 0;
  std::uint64_t mismatches = 0;
  bool pass = true;
  std::string offending;
  for (auto s : {Scenario::Couette, Scenario::LidCavity}) {
    const auto r = lb::bench::verify_decomposition(at_48(s), cases, 1e-12);
    pass = pass && r.pass;
    if (r.max_diff >= worst) {
      worst = r.max_diff;
      if (!r.offending.empty()) offending = std::string(lb::bench::to_string(s)) + " " + r.offending;
    }
    mismatches += r.counter_mismatches;
  }
  return {pass, fmt::format("couette + lidcavity 48^3, {} cases each: max |diff| {:.2e} (limit 1e-12), {} counter "
                            "mismatches{}",
                            cases.size(), worst, mismatches, offending.empty() ? "" : ", worst " + offending)};
}

struct BackendResult {
  double worst = 0;
  bool pass = true;
  std::string scenarios;
};

BackendResult backend_runs() {
  BackendResult out;
  for (const char* name : {"couette", "lidcavity", "restbox"}) {
    auto config = suite_config(name);
    const int units = config.processes();
    const std::vector<VerifyCase> cases{
        {config.block_grid, units, config.transport, std::vector<Selector>(std::size_t(units), selectors::hs_cpu())},
        {config.block_grid, units, config.transport, std::vector<Selector>(std::size_t(units), selectors::hs_gpu())},
    };
    const auto r = lb::bench::verify_decomposition(config, cases, 1e-12);
    out.pass = out.pass && r.pass;
    out.worst = std::max(out.worst, r.max_diff);
    out.scenarios += fmt::format("{}{} {} steps", out.scenarios.empty() ? "" : ", ", name, config.steps);
  }
  return out;
}

Outcome backend_equivalence() {
  const auto r = backend_runs();
  return {r.pass, fmt::format("AoS host vs SoA staged on {}: max |diff| {:.2e} (limit 1e-12)", r.scenarios, r.worst)};
}

Outcome conservation() {
  struct Case {
    std::string label;
    RunConfig config;
    bool momentum;
  };
  std::vector<Case> runs;
  {
    auto c = lb::bench::default_config(Scenario::RestBox);
    c.steps = 1000;
    c.perturbation = 0;
    runs.push_back({"restbox at rest", c, true});
  }
  {
    auto c = suite_config("restbox");
    c.steps = 1000;
    runs.push_back({"restbox perturbed", c, true});
  }
  {
    auto c = lb::bench::default_config(Scenario::LidCavity);
    c.steps = 1000;
    c.block_grid = {2, 2, 2};
    lb::bench::set_homogeneous_units(c, 2, selectors::hs_cpu());
    runs.push_back({"lid cavity 48^3", c, false});
  }
  bool pass = true;
  std::string detail;
  for (const auto& run : runs) {
    lb::bench::RunOptions o;
    o.track_conservation = true;
    o.track_residual = false;
    const auto r = lb::bench::run_scenario(run.config, o);
    const bool ok = r.mass_drift <= 1e-12 && (!run.momentum || r.momentum_drift <= 1e-12) &&
                    int(r.conservation.size()) == run.config.steps + 1;
    pass = pass && ok;
    detail += fmt::format("{}{}: mass {:.1e}", detail.empty() ? "" : "; ", run.label, r.mass_drift);
    if (run.momentum) detail += fmt::format(" momentum {:.1e}", r.momentum_drift);
  }
  return {pass, detail + " over 1000 steps (limit 1e-12)"};
}

// Smallest max(count / speed) over all splits of uniform blocks.
double brute_force(int blocks, const std::vector<double>& speeds) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> counts(speeds.size(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t u, int left) {
    if (u + 1 == speeds.size()) {
      counts[u] = left;
      best = std::min(best, lb::balance::objective(counts, speeds));
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[u] = c;
      rec(u + 1, left - c);
    }
  };
  rec(0, blocks);
  return best;
}

Outcome load_balance() {
  std::mt19937_64 rng(20100101);
  std::uniform_int_distribution<int> nblocks(1, 12), nunits(1, 4);
  std::uniform_real_distribution<double> speed(0.25, 25.0);
  double worst_ratio = 0;
  for (int k = 0; k < 200; ++k) {
    const int blocks = nblocks(rng);
    std::vector<double> speeds(std::size_t(nunits(rng)));
    for (auto& s : speeds) s = speed(rng);
    const auto counts = lb::balance::greedy_counts(blocks, speeds);
    worst_ratio = std::max(worst_ratio, lb::balance::objective(counts, speeds) / brute_force(blocks, speeds));
  }

  std::vector<lb::balance::BlockId> ids;
  for (std::uint64_t b = 0; b < 50; ++b) ids.push_back({b});
  std::vector<Selector> hs{selectors::hs_gpu(), selectors::hs_gpu()};
  hs.insert(hs.end(), 6, selectors::hs_cpu());
  const lb::balance::Weights weights{{selectors::hs_gpu(), 22.0}, {selectors::hs_cpu(), 1.0}};
  const auto a = lb::balance::assign_blocks(ids, hs, weights);
  const bool paper = a.counts == std::vector<int>{22, 22, 1, 1, 1, 1, 1, 1};
  std::string counts;
  for (int c : a.counts) counts += std::to_string(c) + " ";
  return {worst_ratio <= 4.0 / 3.0 && paper,
          fmt::format("200 instances: worst greedy/optimum {:.4f} (limit 1.3333); 22:1 over 50 blocks -> {}", worst_ratio,
                      counts)};
}

Outcome staged_counters() {
  std::uint64_t checks = 0, mismatches = 0;
  // Mixed host/staged decompositions over both transports.
  std::vector<VerifyCase> cases;
  for (auto t : {TransportKind::InProcess, TransportKind::Socket}) {
    cases.push_back({{2, 2, 2}, 2, t, {selectors::hs_cpu(), selectors::hs_gpu()}});
    cases.push_back({{4, 2, 1}, 4, t, {selectors::hs_gpu(), selectors::hs_gpu(), selectors::hs_cpu(), selectors::hs_gpu()}});
  }
  for (auto s : {Scenario::Couette, Scenario::LidCavity}) {
    auto c = at_48(s);
    c.steps = 10;
    const auto r = lb::bench::verify_decomposition(c, cases, 1e-12);
    checks += r.counter_checks;
    mismatches += r.counter_mismatches;
  }
  // All-staged runs of the suite configurations.
  for (const char* name : {"couette", "lidcavity", "restbox"}) {
    auto config = suite_config(name);
    config.steps = std::min(config.steps, 50);
    const int units = config.processes();
    config.nodes.configs = {{"staged", units, std::vector<Selector>(std::size_t(units), selectors::hs_gpu())}};
    config.nodes.node_assignment = {"staged"};
    config.weights = {{selectors::hs_gpu(), 1.0}};
    const auto r = lb::bench::run_scenario(config);
    checks += r.counter_checks;
    mismatches += r.counter_mismatches;
  }
  return {checks > 0 && mismatches == 0,
          fmt::format("{} per-step counter checks over mixed and all-staged runs, {} mismatches", checks, mismatches)};
}

Outcome scaling_properties() {
  auto base = suite_config("restbox");
  base.steps = 60;
  const std::vector<int> weak_units{1, 2};
  const auto weak = lb::bench::scaling_sweep(base, lb::bench::ScaleMode::Weak, weak_units);
  const double weak_eff = weak.points.back().efficiency;
  const bool weak_ok = weak_eff >= 0.9;

  const std::vector<int> strong_units{1, 2, 4, 8};
  const auto strong = lb::bench::scaling_sweep(base, lb::bench::ScaleMode::Strong, strong_units);
  const bool strong_ok = lb::bench::per_unit_monotone_nonincreasing(strong);

  const auto hetero = lb::bench::heterogeneous_run(suite_config("hetero"), 2, 6);
  const bool hetero_ok = hetero.busy_spread() <= 0.15;

  return {weak_ok && strong_ok && hetero_ok,
          fmt::format("weak eff 1->2 units {} (limit 0.9, cpu-time eff {}) {}; strong per-unit monotone {}; "
                      "hetero busy spread {:.1f}% (limit 15%) {}",
                      fixed(weak_eff), fixed(weak.points.back().cpu_efficiency), weak_ok ? "ok" : "off",
                      strong_ok ? "ok" : "off", 100 * hetero.busy_spread(), hetero_ok ? "ok" : "off")};
}

struct Criterion {
  int number;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "byte counts per cell update", byte_counts},
      {2, "multi-link performance estimate", table_estimate},
      {3, "bandwidth bounds", bandwidth_bounds},
      {4, "Couette validation", couette},
      {5, "decomposition invariance", decomposition_invariance},
      {6, "layout/backend equivalence", backend_equivalence},
      {7, "conservation", conservation},
      {8, "load-balance oracle", load_balance},
      {9, "staged counter exactness", staged_counters},
      {10, "desk-scale scaling properties", scaling_properties},
  };

  std::set<int> selected;
  for (int k = 1; k < argc; ++k) {
    char* end = nullptr;
    const long n = std::strtol(argv[k], &end, 10);
    if (*end != '\0' || n < 1 || n > long(criteria.size())) {
      std::cerr << "usage: " << argv[0] << " [criterion number 1-" << criteria.size() << "]...\n";
      return 2;
    }
    selected.insert(int(n));
  }

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.number)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << fmt::format("criterion {:>2} {} {:<32} {} [{:.1f} s]", c.number, o.pass ? "PASS" : "FAIL", c.name,
                             o.detail, secs)
              << std::endl;
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
