#include "latticeblocks/bench/scaling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <map>

#include "latticeblocks/errors.hpp"

namespace latticeblocks::bench {

using domain::Selector;
namespace selectors = domain::selectors;

std::string_view to_string(ScaleMode m) { return m == ScaleMode::Weak ? "weak" : "strong"; }

ScaleMode parse_scale_mode(std::string_view s) {
  if (s == "weak") return ScaleMode::Weak;
  if (s == "strong") return ScaleMode::Strong;
  throw ConfigError("unknown scaling mode '" + std::string(s) + "' (expected weak or strong)");
}

namespace {

RunOptions quiet_options() {
  RunOptions o;
  o.track_residual = false;
  return o;
}

double cpu_throughput(const RunReport& r) {
  double busy = 0;
  for (const auto& u : r.units) busy += u.busy_seconds;
  if (busy <= 0 || r.steps == 0) return 0;
  return double(r.fluid_cells) * r.steps / busy / 1e6 * double(r.units.size());
}

}  // namespace

ScaleTable scaling_sweep(const RunConfig& base, ScaleMode mode, std::span<const int> unit_counts) {
  if (unit_counts.empty()) throw ConfigError("scaling sweep needs at least one unit count");
  const auto hs = base.nodes.process_hs().front();
  ScaleTable table;
  table.mode = mode;
  for (int units : unit_counts) {
    RunConfig cfg = base;
    set_homogeneous_units(cfg, units, hs);
    if (mode == ScaleMode::Weak) {
      cfg.extent.z = base.extent.z * units;
      cfg.block_grid[2] = base.block_grid[2] * units;
    } else {
      const int blocks = cfg.block_grid[0] * cfg.block_grid[1] * cfg.block_grid[2];
      if (blocks < units) {
        throw ConfigError(fmt::format("strong scaling: {} blocks cannot be spread over {} units", blocks, units));
      }
    }
    const auto report = run_scenario(cfg, quiet_options());
    ScalePoint p;
    p.units = units;
    p.extent = cfg.extent;
    p.grid = cfg.block_grid;
    p.mflups = report.aggregate_mflups;
    p.mflups_per_unit = p.mflups / units;
    p.cpu_mflups = cpu_throughput(report);
    p.busy_spread = report.busy_spread;
    table.points.push_back(p);
  }
  const auto& ref = table.points.front();
  for (auto& p : table.points) {
    p.efficiency = ref.mflups_per_unit > 0 ? p.mflups_per_unit / ref.mflups_per_unit : 0;
    p.cpu_efficiency = ref.cpu_mflups > 0 ? (p.cpu_mflups / p.units) / (ref.cpu_mflups / ref.units) : 0;
  }
  return table;
}

bool per_unit_monotone_nonincreasing(const ScaleTable& table) {
  for (std::size_t k = 1; k < table.points.size(); ++k) {
    if (table.points[k].mflups_per_unit > table.points[k - 1].mflups_per_unit) return false;
  }
  return true;
}

std::string ScaleTable::format() const {
  std::string out = fmt::format("{} scaling\n", to_string(mode));
  out += fmt::format("{:>6} {:>14} {:>8} {:>10} {:>10} {:>10} {:>12} {:>10}\n", "units", "extent", "blocks", "MFLUPS",
                     "per unit", "eff", "cpu eff", "spread");
  for (const auto& p : points) {
    out += fmt::format("{:>6} {:>14} {:>8} {:>10.2f} {:>10.2f} {:>10.3f} {:>12.3f} {:>9.1f}%\n", p.units,
                       p.extent.str(), p.grid[0] * p.grid[1] * p.grid[2], p.mflups, p.mflups_per_unit, p.efficiency,
                       p.cpu_efficiency, 100 * p.busy_spread);
  }
  return out;
}

std::string ScaleTable::csv() const {
  std::string out = "mode,units,extent_x,extent_y,extent_z,blocks,mflups,mflups_per_unit,efficiency,cpu_mflups,"
                    "cpu_efficiency,busy_spread\n";
  for (const auto& p : points) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(mode), p.units, p.extent.x, p.extent.y,
                       p.extent.z, p.grid[0] * p.grid[1] * p.grid[2], p.mflups, p.mflups_per_unit, p.efficiency,
                       p.cpu_mflups, p.cpu_efficiency, p.busy_spread);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

RunConfig hetero_config(const RunConfig& base, int staged_units, int host_units, int blocks) {
  RunConfig cfg = base;
  std::vector<Selector> hs(std::size_t(staged_units), selectors::hs_gpu());
  hs.insert(hs.end(), std::size_t(host_units), selectors::hs_cpu());
  cfg.nodes.configs = {{"hetero", staged_units + host_units, hs}};
  cfg.nodes.node_assignment = {"hetero"};
  // Blocks keep the base configuration's block size and stack along z.
  const lattice::Extent3 block{base.extent.x / base.block_grid[0], base.extent.y / base.block_grid[1],
                               base.extent.z / base.block_grid[2]};
  if (block.empty()) throw ConfigError("heterogeneous run: base block grid leaves empty blocks");
  cfg.extent = {block.x, block.y, block.z * blocks};
  cfg.block_grid = {1, 1, blocks};
  return cfg;
}

balance::Weights weights_from(const RunReport& report) {
  std::map<Selector, std::vector<double>> per_block;
  for (const auto& u : report.units) {
    if (u.blocks > 0) per_block[Selector(u.hs)].push_back(u.busy_seconds / u.blocks);
  }
  return balance::calibrate_weights(per_block);
}

}  // namespace

HeteroResult heterogeneous_run(const RunConfig& base, int staged_units, int host_units, double target_spread,
                               int max_rounds) {
  if (staged_units <= 0 || host_units < 0) throw ConfigError("heterogeneous run needs staged units");
  const int units = staged_units + host_units;
  HeteroResult result;
  result.staged_units = staged_units;
  result.host_units = host_units;

  // One block per unit gives the first per-block times.
  auto cfg = hetero_config(base, staged_units, host_units, units);
  cfg.weights = {{selectors::hs_gpu(), 1.0}, {selectors::hs_cpu(), 1.0}};
  auto options = quiet_options();
  options.blocks_per_process.assign(std::size_t(units), 1);
  auto report = run_scenario(cfg, options);
  auto weights = weights_from(report);

  for (int round = 0; round < max_rounds; ++round) {
    int blocks = 0;
    for (int u = 0; u < units; ++u) {
      const double w = balance::speed_of(weights, u < staged_units ? selectors::hs_gpu() : selectors::hs_cpu());
      blocks += std::max(1, int(std::lround(w)));
    }
    cfg = hetero_config(base, staged_units, host_units, blocks);
    cfg.weights = weights;
    report = run_scenario(cfg, quiet_options());

    HeteroRound r;
    r.weights = weights;
    for (const auto& u : report.units) r.blocks_per_unit.push_back(u.blocks);
    r.busy_spread = report.busy_spread;
    result.rounds.push_back(r);
    if (report.busy_spread <= target_spread) break;
    weights = weights_from(report);
  }
  result.report = std::move(report);
  return result;
}

std::string HeteroResult::format() const {
  std::string out = fmt::format("heterogeneous weak run: {} staged + {} host units\n", staged_units, host_units);
  for (std::size_t k = 0; k < rounds.size(); ++k) {
    const auto& r = rounds[k];
    std::string w, b;
    for (const auto& uw : r.weights) w += fmt::format("{}={:.2f} ", uw.hs.name(), uw.speed);
    for (int c : r.blocks_per_unit) b += fmt::format("{} ", c);
    out += fmt::format("round {}: weights {}| blocks {}| spread {:.1f}%\n", k + 1, w, b, 100 * r.busy_spread);
  }
  // Rows in the layout of the heterogeneous weak-scaling table.
  int staged_blocks = 0, host_blocks = 0;
  for (const auto& u : report.units) {
    if (u.hs == selectors::hs_gpu().name()) staged_blocks = u.blocks;
    if (u.hs == selectors::hs_cpu().name()) host_blocks = u.blocks;
  }
  out += fmt::format("Blocks     staged: {}, host: {}\n", staged_blocks, host_blocks);
  out += fmt::format("Processes  {} x staged + {} x host\n", staged_units, host_units);
  out += fmt::format("MFLUPS     {:.2f} (wall clock)\n", report.aggregate_mflups);
  out += format_report(report);
  return out;
}

// ---------------------------------------------------------------------------

std::string VerifyCase::label() const {
  std::string hs_text = "hsCPU";
  if (!hs.empty()) {
    hs_text.clear();
    std::vector<std::string> seen;
    for (auto s : hs) {
      if (std::find(seen.begin(), seen.end(), s.name()) == seen.end()) seen.push_back(s.name());
    }
    for (const auto& s : seen) hs_text += (hs_text.empty() ? "" : "+") + s;
  }
  return fmt::format("{}x{}x{}/{}u/{}/{}", grid[0], grid[1], grid[2], units, to_string(transport), hs_text);
}

VerifyResult verify_decomposition(const RunConfig& base, std::span<const VerifyCase> cases, double tolerance) {
  if (cases.empty()) throw ConfigError("verification needs at least one case");
  VerifyResult result;
  std::optional<GlobalField> reference;
  for (const auto& c : cases) {
    RunConfig cfg = base;
    cfg.block_grid = c.grid;
    cfg.transport = c.transport;
    if (c.hs.empty()) {
      set_homogeneous_units(cfg, c.units, selectors::hs_cpu());
    } else {
      if (int(c.hs.size()) != c.units) throw ConfigError("verify case " + c.label() + ": hs list does not match units");
      cfg.nodes.configs = {{"node", c.units, c.hs}};
      cfg.nodes.node_assignment = {"node"};
      cfg.weights.clear();
      for (auto s : c.hs) {
        bool seen = false;
        for (const auto& w : cfg.weights) seen = seen || w.hs == s;
        if (!seen) cfg.weights.push_back({s, 1.0});
      }
    }
    RunOptions options;
    options.gather_field = true;
    options.track_residual = false;
    auto report = run_scenario(cfg, options);
    result.checksums.emplace_back(c.label(), report.checksum_final);
    result.counter_checks += report.counter_checks;
    result.counter_mismatches += report.counter_mismatches;
    if (!reference) {
      reference = std::move(report.field);
      result.diffs.push_back(0.0);
      continue;
    }
    const double diff = max_abs_diff(*reference, *report.field);
    result.diffs.push_back(diff);
    if (!(diff <= tolerance) && !(diff <= result.max_diff)) {
      result.offending = cases.front().label() + " vs " + c.label();
    }
    result.max_diff = std::max(result.max_diff, diff);
    if (!(diff <= tolerance)) result.pass = false;
  }
  return result;
}

std::string VerifyResult::format() const {
  std::string out;
  for (std::size_t k = 0; k < checksums.size(); ++k) {
    out += fmt::format("{:<40} checksum {:016x}  max |diff| {:.3e}\n", checksums[k].first, checksums[k].second,
                       diffs[k]);
  }
  out += fmt::format("{}: max |diff| {:.3e}{}\n", pass ? "PASS" : "FAIL", max_diff,
                     offending.empty() ? "" : "  worst pair " + offending);
  return out;
}

std::array<int, 3> parse_grid(std::string_view text) {
  std::array<int, 3> g{};
  std::size_t pos = 0;
  for (int a = 0; a < 3; ++a) {
    const auto next = a < 2 ? text.find('x', pos) : text.size();
    if (next == std::string_view::npos) throw ConfigError("grid '" + std::string(text) + "' must look like 2x2x2");
    const auto token = text.substr(pos, next - pos);
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), g[std::size_t(a)]);
    if (ec != std::errc() || ptr != token.data() + token.size() || g[std::size_t(a)] <= 0) {
      throw ConfigError("grid '" + std::string(text) + "' must look like 2x2x2");
    }
    pos = next + 1;
  }
  return g;
}

}  // namespace latticeblocks::bench
