#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "latticeblocks/balance/balance.hpp"
#include "latticeblocks/bench/config.hpp"
#include "latticeblocks/bench/runner.hpp"
#include "latticeblocks/bench/scaling.hpp"
#include "latticeblocks/errors.hpp"
#include "latticeblocks/perf/model.hpp"

namespace lb = latticeblocks;
using lb::bench::RunConfig;

namespace {

struct CommonFlags {
  std::string config;
  std::string scenario = "restbox";
  std::string precision;
  std::string transport;
  int units = 0;
  int steps = -1;
  std::string report;
  std::vector<std::string> weights;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "run configuration file");
  cmd->add_option("--scenario", f.scenario, "scenario when no --config is given")
      ->check(CLI::IsMember({"couette", "lidcavity", "restbox"}));
  cmd->add_option("--precision", f.precision, "sp or dp")->check(CLI::IsMember({"sp", "dp"}));
  cmd->add_option("--transport", f.transport, "inprocess or socket")->check(CLI::IsMember({"inprocess", "socket"}));
  cmd->add_option("--units", f.units, "number of homogeneous processes")->check(CLI::PositiveNumber);
  cmd->add_option("--steps", f.steps, "override the step count")->check(CLI::NonNegativeNumber);
  cmd->add_option("--report", f.report, "write CSV to PATH and a readable copy to PATH.txt");
  cmd->add_option("--weight", f.weights, "override a load-balance weight, HS=SPEED");
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? lb::bench::default_config(lb::bench::parse_scenario(f.scenario))
                                 : lb::bench::load_config(f.config);
  if (!f.precision.empty()) c.precision = lb::lattice::parse_precision(f.precision);
  if (!f.transport.empty()) c.transport = lb::bench::parse_transport(f.transport);
  if (f.steps >= 0) c.steps = f.steps;
  if (f.units > 0) lb::bench::set_homogeneous_units(c, f.units, c.nodes.process_hs().front());
  for (const auto& w : f.weights) {
    const auto eq = w.find('=');
    if (eq == std::string::npos) throw lb::ConfigError("--weight expects HS=SPEED, got '" + w + "'");
    const lb::domain::Selector hs(w.substr(0, eq));
    double speed = 0;
    try {
      speed = std::stod(w.substr(eq + 1));
    } catch (const std::exception&) {
      throw lb::ConfigError("--weight expects HS=SPEED, got '" + w + "'");
    }
    bool found = false;
    for (auto& uw : c.weights) {
      if (uw.hs == hs) {
        uw.speed = speed;
        found = true;
      }
    }
    if (!found) c.weights.push_back({hs, speed});
  }
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw lb::ConfigError("cannot write " + path);
  out << text;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-structured D3Q19 lattice Boltzmann runner"};
  app.require_subcommand(1);

  CommonFlags run_flags, scale_flags, verify_flags, balance_flags;

  auto* run = app.add_subcommand("run", "run one scenario and print its report");
  add_common(run, run_flags);
  bool print_config = false;
  run->add_flag("--print-config", print_config, "print the canonical configuration before running");

  auto* scale = app.add_subcommand("scale", "weak, strong or heterogeneous scaling sweep");
  add_common(scale, scale_flags);
  std::string mode = "weak";
  std::vector<int> counts;
  int staged_units = 2, host_units = 6;
  bool assert_properties = false;
  scale->add_option("--mode", mode, "weak, strong or hetero")->check(CLI::IsMember({"weak", "strong", "hetero"}));
  scale->add_option("--counts", counts, "unit counts, e.g. --counts 1 2 4")->delimiter(',');
  scale->add_option("--staged", staged_units, "staged units in hetero mode");
  scale->add_option("--host", host_units, "host units in hetero mode");
  scale->add_flag("--assert", assert_properties,
                  "exit 1 unless weak efficiency >= 0.9, strong per-unit MFLUPS is nonincreasing, or the hetero "
                  "spread is <= 15%");

  auto* verify = app.add_subcommand("verify", "compare final fields across block grids");
  add_common(verify, verify_flags);
  std::string grids = "1x1x1,2x2x2";
  double tolerance = 1e-12;
  verify->add_option("--grids", grids, "comma-separated block grids; the first is the reference");
  verify->add_option("--tolerance", tolerance, "largest accepted |diff|");

  auto* estimate = app.add_subcommand("estimate", "bandwidth model: bytes per update, bounds, transfer estimate");
  int n = 100;
  double kernel_mflups = 300;
  std::vector<std::string> links{"PCIe:5e9", "IB:3e9"};
  std::string estimate_precision = "sp";
  estimate->add_option("--n", n, "cells per axis")->check(CLI::PositiveNumber);
  estimate->add_option("--kernel-mflups", kernel_mflups, "kernel performance");
  estimate->add_option("--link", links, "NAME:BYTES_PER_SECOND, repeatable");
  estimate->add_option("--precision", estimate_precision, "sp or dp")->check(CLI::IsMember({"sp", "dp"}));

  auto* balance_cmd = app.add_subcommand("balance", "print the block assignment of a configuration");
  add_common(balance_cmd, balance_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : int(lb::ErrorCategory::Usage);
  }

  try {
    if (*run) {
      const auto config = resolve_config(run_flags);
      if (print_config) std::cout << lb::bench::canonical(config) << "\n";
      const auto report = lb::bench::run_scenario(config);
      std::cout << lb::bench::format_report(report);
      if (!run_flags.report.empty()) lb::bench::write_report(report, run_flags.report);
      return 0;
    }

    if (*scale) {
      auto config = resolve_config(scale_flags);
      bool ok = true;
      std::string text, csv;
      if (mode == "hetero") {
        const auto result = lb::bench::heterogeneous_run(config, staged_units, host_units);
        text = result.format();
        csv = lb::bench::report_csv(result.report);
        ok = result.busy_spread() <= 0.15;
        text += fmt::format("busy-time spread {:.1f}% (limit 15%)\n", 100 * result.busy_spread());
      } else {
        if (counts.empty()) counts = mode == "weak" ? std::vector<int>{1, 2} : std::vector<int>{1, 2, 4, 8};
        const auto table = lb::bench::scaling_sweep(config, lb::bench::parse_scale_mode(mode), counts);
        text = table.format();
        csv = table.csv();
        if (table.mode == lb::bench::ScaleMode::Weak) {
          for (const auto& p : table.points) ok = ok && p.efficiency >= 0.9;
          text += "weak efficiency limit 0.9 (wall clock); cpu eff is informational\n";
        } else {
          ok = lb::bench::per_unit_monotone_nonincreasing(table);
          text += fmt::format("per-unit MFLUPS monotone nonincreasing: {}\n", ok ? "yes" : "no");
        }
      }
      std::cout << text;
      if (!scale_flags.report.empty()) {
        write_text(scale_flags.report, csv);
        write_text(scale_flags.report + ".txt", text);
      }
      return assert_properties && !ok ? 1 : 0;
    }

    if (*verify) {
      const auto config = resolve_config(verify_flags);
      std::vector<lb::bench::VerifyCase> cases;
      for (const auto& g : split(grids, ',')) {
        lb::bench::VerifyCase c;
        c.grid = lb::bench::parse_grid(g);
        c.units = verify_flags.units > 0 ? std::min(verify_flags.units, c.grid[0] * c.grid[1] * c.grid[2]) : 1;
        c.transport = config.transport;
        cases.push_back(c);
      }
      const auto result = lb::bench::verify_decomposition(config, cases, tolerance);
      std::cout << result.format();
      if (!verify_flags.report.empty()) write_text(verify_flags.report, result.format());
      return result.pass ? 0 : 1;
    }

    if (*estimate) {
      const auto precision = lb::lattice::parse_precision(estimate_precision);
      std::vector<lb::perf::LinkProfile> profiles;
      for (const auto& l : links) {
        const auto colon = l.find(':');
        if (colon == std::string::npos) throw lb::ConfigError("--link expects NAME:BYTES_PER_SECOND");
        profiles.push_back({l.substr(0, colon), std::stod(l.substr(colon + 1))});
      }
      using lb::perf::ArchKind;
      using lb::lattice::Precision;
      std::cout << "bytes per cell update: host " << lb::perf::bytes_per_update(ArchKind::HostRfo, Precision::SP)
                << " (sp) / " << lb::perf::bytes_per_update(ArchKind::HostRfo, Precision::DP) << " (dp), staged "
                << lb::perf::bytes_per_update(ArchKind::Staged, Precision::SP) << " (sp) / "
                << lb::perf::bytes_per_update(ArchKind::Staged, Precision::DP) << " (dp)\n";
      for (const auto& arch : {lb::perf::reference_host(), lb::perf::reference_staged()}) {
        std::cout << fmt::format("bandwidth bound {}: {:.1f} MFLUPS (sp) / {:.1f} MFLUPS (dp)\n", arch.name,
                                 lb::perf::bandwidth_bound(arch, Precision::SP),
                                 lb::perf::bandwidth_bound(arch, Precision::DP));
      }
      std::cout << "note: the staged sp bound is the formula value; the published 516 is rounded up\n";
      std::cout << lb::perf::format_estimate_table(n, kernel_mflups, profiles, precision);
      return 0;
    }

    if (*balance_cmd) {
      const auto config = resolve_config(balance_flags);
      lb::bench::validate(config);
      const auto hs = config.nodes.process_hs();
      const auto patch = lb::bench::build_patch(config, lb::bench::balanced_block_counts(config));
      std::vector<lb::balance::BlockId> ids;
      for (const auto& b : patch.blocks()) ids.push_back(b.id);
      const auto assignment = lb::balance::assign_blocks(ids, hs, config.weights);
      std::cout << fmt::format("{} blocks over {} processes, max load {:.3f}\n", ids.size(), hs.size(),
                               assignment.objective);
      for (std::size_t p = 0; p < hs.size(); ++p) {
        std::string list;
        for (auto id : assignment.blocks[p]) list += " " + std::to_string(id.value);
        std::cout << fmt::format("rank {:>3} {:<9} speed {:>6.2f} blocks {:>3}:{}\n", p, hs[p].name(),
                                 lb::balance::speed_of(config.weights, hs[p]), assignment.counts[p], list);
      }
      return 0;
    }
  } catch (const lb::Error& e) {
    std::cerr << "error (" << e.category_name() << "): " << e.what() << "\n";
    return int(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
