#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "latticeblocks/bench/config.hpp"
#include "latticeblocks/bench/scenario.hpp"
#include "latticeblocks/domain/patch.hpp"
#include "latticeblocks/staged/arena.hpp"

namespace latticeblocks::bench {

inline constexpr const char* kFaultInjectEnv = "LATTICEBLOCKS_FAULT_INJECT";

struct RunOptions {
  bool gather_field = false;
  bool track_conservation = false;
  bool track_residual = true;
  bool check_counters = true;
  bool guard = false;
  /// Explicit blocks per process; empty means the load balancer decides.
  std::vector<int> blocks_per_process;
};

struct UnitReport {
  int rank = 0;
  std::string hs;
  int blocks = 0;
  std::uint64_t fluid_cells = 0;
  double loop_wall_seconds = 0;
  double cpu_seconds = 0;     // thread CPU time of the step loop
  double kernel_seconds = 0;  // staged kernels, thread CPU time
  double modeled_transfer_seconds = 0;
  double busy_seconds = 0;    // host: cpu; staged: cpu with kernels on the device clock
  double mflups = 0;          // fluid_cells * steps / busy_seconds
  staged::TransferCounters step_traffic;  // staged crossings of the step loop
  std::uint64_t counter_checks = 0;
  std::uint64_t counter_mismatches = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t bytes_sent = 0;
};

struct RunReport {
  std::string config_text;
  int steps = 0;
  std::uint64_t fluid_cells = 0;
  double wall_seconds = 0;
  double aggregate_mflups = 0;
  std::vector<UnitReport> units;

  std::uint64_t checksum_initial = 0;
  std::uint64_t checksum_final = 0;

  // Σ(rho - rho0) and Σj over fluid cells after each step, index 0 = initial.
  std::vector<std::array<double, 4>> conservation;
  double max_mass_drift_per_step = 0;  // relative to rho0 * fluid_cells
  double mass_drift = 0;
  double momentum_drift = 0;

  double residual_first = 0;  // max |u| change over the first step
  double residual_last = 0;   // and over the last step

  double modeled_transfer_seconds = 0;
  double device_seconds = 0;
  std::uint64_t counter_checks = 0;
  std::uint64_t counter_mismatches = 0;
  double busy_spread = 0;  // (max - min) / mean of per-unit busy time
  bool fault_injected = false;

  std::vector<std::string> notes;
  std::optional<GlobalField> field;
};

/// Blocks per process from the configured weights.
std::vector<int> balanced_block_counts(const RunConfig& config);

domain::Patch build_patch(const RunConfig& config, const std::vector<int>& blocks_per_process);

bool fault_injection_requested();

/// Runs the configured scenario with one worker per process: threads over an
/// in-process hub, or forked OS processes over Unix sockets.
RunReport run_scenario(const RunConfig& config, const RunOptions& options = {});

std::string format_report(const RunReport& report);
std::string report_csv(const RunReport& report);
/// CSV at `path`, the human-readable form at `path` + ".txt".
void write_report(const RunReport& report, const std::filesystem::path& path);

}  // namespace latticeblocks::bench
