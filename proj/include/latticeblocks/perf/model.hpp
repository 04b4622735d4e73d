#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latticeblocks/lattice/params.hpp"

namespace latticeblocks::perf {

using lattice::Precision;

/// host: loads, stores and the read-for-ownership of the store target.
/// staged: loads and stores only.
enum class ArchKind { HostRfo, Staged };

std::size_t bytes_per_update(ArchKind arch, Precision precision);

struct ArchProfile {
  std::string name;
  ArchKind kind = ArchKind::HostRfo;
  double stream_bandwidth = 0.0;  // bytes/s
  std::optional<double> kernel_mflups_sp;
  std::optional<double> kernel_mflups_dp;

  std::size_t bytes_per_update(Precision p) const { return perf::bytes_per_update(kind, p); }
};

struct LinkProfile {
  std::string name;
  double bandwidth = 0.0;  // bytes/s
};

struct PerfEstimate {
  double t_kernel = 0.0;
  std::vector<double> t_transfer;  // one per link
  double total = 0.0;
  double mflups = 0.0;
};

constexpr int kPdfsPerBoundaryCell = 5;
constexpr int kBoundaryPlanes = 6;

/// Serialized kernel + transfers for an n^3 domain at `kernel_mflups`.
PerfEstimate estimate(int n, double kernel_mflups, std::span<const LinkProfile> links, Precision precision);

/// Memory-bandwidth upper limit in MFLUPS.
double bandwidth_bound(const ArchProfile& arch, Precision precision);

/// fluid cell updates per second, in millions.
double measure_mflups(std::uint64_t fluid_cells, std::uint64_t steps, double seconds);

/// Seconds the staged link needs for `bytes` at `bandwidth`.
double modeled_transfer_seconds(std::uint64_t bytes, double bandwidth);

/// Table in the row structure of the multi-GPU estimate: compute time, one
/// row per link, then cumulative totals.
std::string format_estimate_table(int n, double kernel_mflups, std::span<const LinkProfile> links,
                                  Precision precision);

/// Host (33 GB/s) and staged (78 GB/s) reference architectures.
ArchProfile reference_host();
ArchProfile reference_staged();

}  // namespace latticeblocks::perf
