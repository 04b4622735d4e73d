#include "latticeblocks/bench/scenario.hpp"

#include <bit>
#include <cmath>

#include "latticeblocks/errors.hpp"
#include "latticeblocks/lattice/kernels.hpp"

namespace latticeblocks::bench {

using lattice::CellKind;
using lattice::D3Q19;

CellInit cell_at(const RunConfig& config, int x, int y, int z) {
  std::array<int, 3> g{x, y, z};
  for (int a = 0; a < 3; ++a) {
    const int n = config.extent[a];
    auto& v = g[std::size_t(a)];
    if (v >= 0 && v < n) continue;
    if (!config.periodic[std::size_t(a)]) return {CellKind::Wall, {0, 0, 0}};
    v = ((v % n) + n) % n;
  }
  const auto& e = config.extent;
  switch (config.scenario) {
    case Scenario::Couette:
      if (g[1] == 0) return {CellKind::Wall, {0, 0, 0}};
      if (g[1] == e.y - 1) return {CellKind::Wall, config.wall_velocity};
      return {};
    case Scenario::LidCavity:
      if (g[1] == e.y - 1) return {CellKind::Wall, config.wall_velocity};
      if (g[0] == 0 || g[0] == e.x - 1 || g[1] == 0 || g[2] == 0 || g[2] == e.z - 1) {
        return {CellKind::Wall, {0, 0, 0}};
      }
      return {};
    case Scenario::RestBox:
      return {};
  }
  return {};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t checksum_term(std::uint64_t global_cell, std::size_t dir, double value) {
  const auto position = splitmix64(global_cell * D3Q19::Q + dir);
  return splitmix64(position ^ std::bit_cast<std::uint64_t>(value));
}

template <typename T>
lattice::PdfField<T> make_block_field(const RunConfig& config, const domain::Block& block, lattice::Layout layout) {
  const auto extent = block.aabb.extent();
  lattice::PdfField<T> field(extent, layout);
  auto& flags = field.flags();
  const auto& lo = block.aabb.min;
  for (int z = -1; z <= extent.z; ++z)
    for (int y = -1; y <= extent.y; ++y)
      for (int x = -1; x <= extent.x; ++x) {
        const auto init = cell_at(config, lo[0] + x, lo[1] + y, lo[2] + z);
        flags.set(x, y, z, init.kind, init.wall_velocity);
      }

  if (config.perturbation != 0.0) {
    const auto key = splitmix64(config.seed);
    const auto& n = config.extent;
    for (int z = 0; z < extent.z; ++z)
      for (int y = 0; y < extent.y; ++y)
        for (int x = 0; x < extent.x; ++x) {
          if (field.flags().kind(x, y, z) != CellKind::Fluid) continue;
          const std::uint64_t g =
              (std::uint64_t(lo[2] + z) * std::uint64_t(n.y) + std::uint64_t(lo[1] + y)) * std::uint64_t(n.x) +
              std::uint64_t(lo[0] + x);
          for (std::size_t i = 0; i < D3Q19::Q; ++i) {
            const auto bits = splitmix64(key ^ (g * D3Q19::Q + i));
            const double unit = double(bits >> 11) * 0x1.0p-53;
            field.at(x, y, z, i) = T(config.perturbation * (2.0 * unit - 1.0));
          }
        }
  }
  return field;
}

double max_abs_diff(const GlobalField& a, const GlobalField& b) {
  if (!(a.extent == b.extent) || a.fluid != b.fluid) {
    throw UsageError("fields compared over different geometries");
  }
  double worst = 0.0;
  for (std::size_t c = 0; c < a.fluid.size(); ++c) {
    if (!a.fluid[c]) continue;
    for (std::size_t i = 0; i < D3Q19::Q; ++i) {
      worst = std::max(worst, std::abs(a.values[c * D3Q19::Q + i] - b.values[c * D3Q19::Q + i]));
    }
  }
  return worst;
}

std::vector<double> couette_profile(const GlobalField& field, double rho0) {
  const auto& n = field.extent;
  std::vector<double> profile;
  for (int y = 1; y < n.y - 1; ++y) {
    double sum = 0.0;
    int count = 0;
    for (int z = 0; z < n.z; ++z)
      for (int x = 0; x < n.x; ++x) {
        const auto c = field.cell(x, y, z);
        if (!field.fluid[c]) continue;
        std::array<double, D3Q19::Q> f;
        for (std::size_t i = 0; i < D3Q19::Q; ++i) f[i] = field.values[c * D3Q19::Q + i];
        sum += lattice::moments<double>(std::span<const double, D3Q19::Q>(f), rho0).u[0];
        ++count;
      }
    profile.push_back(count > 0 ? sum / count : 0.0);
  }
  return profile;
}

template lattice::PdfField<float> make_block_field<float>(const RunConfig&, const domain::Block&, lattice::Layout);
template lattice::PdfField<double> make_block_field<double>(const RunConfig&, const domain::Block&, lattice::Layout);

}  // namespace latticeblocks::bench
