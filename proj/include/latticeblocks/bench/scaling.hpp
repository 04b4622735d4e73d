#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "latticeblocks/bench/runner.hpp"

namespace latticeblocks::bench {

enum class ScaleMode { Weak, Strong };

std::string_view to_string(ScaleMode m);
ScaleMode parse_scale_mode(std::string_view s);

struct ScalePoint {
  int units = 0;
  lattice::Extent3 extent{};
  std::array<int, 3> grid{};
  double mflups = 0;           // wall clock
  double mflups_per_unit = 0;
  double efficiency = 0;       // per-unit MFLUPS relative to the first point
  double cpu_mflups = 0;       // fluid updates per second of summed busy time
  double cpu_efficiency = 0;
  double busy_spread = 0;
};

struct ScaleTable {
  ScaleMode mode = ScaleMode::Weak;
  std::vector<ScalePoint> points;

  std::string format() const;
  std::string csv() const;
};

/// Weak mode: the base extent and block grid are the load of one unit and are
/// stacked along z, one copy per unit. Strong mode: extent and block grid stay
/// fixed. Units are homogeneous with the base configuration's first hs.
ScaleTable scaling_sweep(const RunConfig& base, ScaleMode mode, std::span<const int> unit_counts);

/// Per-unit MFLUPS never increases with the unit count.
bool per_unit_monotone_nonincreasing(const ScaleTable& table);

struct HeteroRound {
  balance::Weights weights;
  std::vector<int> blocks_per_unit;
  double busy_spread = 0;
};

struct HeteroResult {
  std::vector<HeteroRound> rounds;
  RunReport report;  // last round
  int staged_units = 0;
  int host_units = 0;

  double busy_spread() const { return report.busy_spread; }
  std::string format() const;
};

/// Heterogeneous weak run: `staged_units` processes with hsGPU and
/// `host_units` with hsCPU share a domain of uniform blocks of the base
/// configuration's block size, stacked along z. Weights start from a one-block-per-unit calibration and are
/// re-calibrated from each run's per-block busy time until the spread is
/// within `target_spread` or `max_rounds` runs are done. Fast units get
/// round(weight) blocks, slow units one.
HeteroResult heterogeneous_run(const RunConfig& base, int staged_units, int host_units, double target_spread = 0.15,
                               int max_rounds = 4);

struct VerifyCase {
  std::array<int, 3> grid{1, 1, 1};
  int units = 1;
  TransportKind transport = TransportKind::InProcess;
  std::vector<domain::Selector> hs;  // per process; empty = all hsCPU

  std::string label() const;
};

struct VerifyResult {
  bool pass = true;
  double max_diff = 0;
  std::string offending;  // "<reference> vs <case>" of the worst mismatch
  std::vector<std::pair<std::string, std::uint64_t>> checksums;
  std::vector<double> diffs;  // per case against the first
  std::uint64_t counter_checks = 0;
  std::uint64_t counter_mismatches = 0;

  std::string format() const;
};

/// Runs every case on the same scenario and compares each final field with
/// the first case's.
VerifyResult verify_decomposition(const RunConfig& base, std::span<const VerifyCase> cases, double tolerance = 1e-12);

/// "2x2x2" -> {2, 2, 2}
std::array<int, 3> parse_grid(std::string_view text);

}  // namespace latticeblocks::bench
