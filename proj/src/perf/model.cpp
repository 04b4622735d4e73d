#include "latticeblocks/perf/model.hpp"

#include <fmt/format.h>

#include "latticeblocks/errors.hpp"
#include "latticeblocks/lattice/stencil.hpp"

namespace latticeblocks::perf {

std::size_t bytes_per_update(ArchKind arch, Precision precision) {
  const std::size_t transfers = arch == ArchKind::HostRfo ? 3 : 2;
  return lattice::D3Q19::Q * transfers * lattice::scalar_size(precision);
}

PerfEstimate estimate(int n, double kernel_mflups, std::span<const LinkProfile> links, Precision precision) {
  if (n <= 0) throw ConfigError("domain size must be positive");
  if (!(kernel_mflups > 0.0)) throw ConfigError("kernel performance must be positive");
  const double cells = double(n) * n * n;
  const double s = double(lattice::scalar_size(precision));
  PerfEstimate out;
  out.t_kernel = cells / (kernel_mflups * 1e6);
  out.total = out.t_kernel;
  for (const auto& link : links) {
    if (!(link.bandwidth > 0.0)) throw ConfigError("link '" + link.name + "' needs a positive bandwidth");
    const double t = 2.0 * n * n * kPdfsPerBoundaryCell * kBoundaryPlanes * s / link.bandwidth;
    out.t_transfer.push_back(t);
    out.total += t;
  }
  out.mflups = cells / out.total / 1e6;
  return out;
}

double bandwidth_bound(const ArchProfile& arch, Precision precision) {
  if (!(arch.stream_bandwidth > 0.0)) {
    throw ConfigError("architecture '" + arch.name + "' needs a positive stream bandwidth");
  }
  return arch.stream_bandwidth / double(arch.bytes_per_update(precision)) / 1e6;
}

double measure_mflups(std::uint64_t fluid_cells, std::uint64_t steps, double seconds) {
  if (!(seconds > 0.0)) throw MeasurementError("cannot compute MFLUPS from a zero-length run");
  return double(fluid_cells) * double(steps) / seconds / 1e6;
}

double modeled_transfer_seconds(std::uint64_t bytes, double bandwidth) {
  if (!(bandwidth > 0.0)) throw ConfigError("link bandwidth must be positive");
  return double(bytes) / bandwidth;
}

std::string format_estimate_table(int n, double kernel_mflups, std::span<const LinkProfile> links,
                                  Precision precision) {
  const auto full = estimate(n, kernel_mflups, links, precision);
  std::string out = fmt::format("domain {}^3, kernel ~{:g} MFLUPS, {}\n", n, kernel_mflups, lattice::to_string(precision));
  out += fmt::format("  {:<24}{:>12}\n", "Compute Time", fmt::format("{:.3f} ms", full.t_kernel * 1e3));
  for (std::size_t k = 0; k < links.size(); ++k) {
    const auto label = fmt::format("{}: {:g} GB/s ({})", links[k].name, links[k].bandwidth / 1e9, k + 1);
    out += fmt::format("  {:<24}{:>12}\n", label, fmt::format("{:.3f} ms", full.t_transfer[k] * 1e3));
  }
  for (std::size_t k = 1; k <= links.size(); ++k) {
    const auto partial = estimate(n, kernel_mflups, links.first(k), precision);
    std::string which;
    for (std::size_t j = 1; j <= k; ++j) which += (j > 1 ? "+" : "") + std::to_string(j);
    out += fmt::format("  Total ({:<8}){:>13} -> {:.1f} MFLUPS\n", which,
                       fmt::format("{:.3f} ms", partial.total * 1e3), partial.mflups);
  }
  return out;
}

ArchProfile reference_host() { return {"host 33 GB/s", ArchKind::HostRfo, 33e9, std::nullopt, std::nullopt}; }

ArchProfile reference_staged() { return {"staged 78 GB/s", ArchKind::Staged, 78e9, 300.0, std::nullopt}; }

}  // namespace latticeblocks::perf
