#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "latticeblocks/balance/balance.hpp"
#include "latticeblocks/lattice/params.hpp"
#include "latticeblocks/lattice/pdf_field.hpp"

namespace latticeblocks::bench {

enum class Scenario { Couette, LidCavity, RestBox };
enum class TransportKind { InProcess, Socket };

std::string_view to_string(Scenario s);
std::string_view to_string(TransportKind t);
Scenario parse_scenario(std::string_view s);
TransportKind parse_transport(std::string_view s);

/// Everything a run needs. Text form:
///
///   [run]
///   scenario = couette
///   extent = 4 18 4
///   blocks = 1 2 1
///   steps = 20000
///   tau = 0.8
///   ...
///   [staged]
///   compute_speedup = 1
///   link_bandwidth = 5000000000
///   [node:cpu]
///   processes = 2
///   hs = hsCPU hsCPU
///   [nodes]
///   assignment = cpu
///   [weights]
///   hsCPU = 1
struct RunConfig {
  Scenario scenario = Scenario::RestBox;
  lattice::Extent3 extent{16, 16, 16};
  std::array<int, 3> block_grid{1, 1, 1};
  int steps = 100;
  double tau = 0.8;
  double rho0 = 1.0;
  lattice::Precision precision = lattice::Precision::DP;
  std::array<bool, 3> periodic{true, true, true};
  lattice::Vec3d wall_velocity{0.05, 0.0, 0.0};
  TransportKind transport = TransportKind::InProcess;
  std::uint64_t seed = 1;
  double perturbation = 0.0;
  double compute_speedup = 1.0;
  double link_bandwidth = 5e9;
  balance::NodeLayout nodes;
  balance::Weights weights;

  int processes() const { return int(nodes.process_hs().size()); }
  lattice::LbmParams params() const { return {tau, rho0, precision}; }
};

/// Scenario-dependent defaults for keys the text leaves out.
RunConfig default_config(Scenario scenario);

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Fixed key order and number formatting; parse_config(canonical(c)) gives
/// back the same text.
std::string canonical(const RunConfig& config);

/// Replaces the node layout by `units` processes of one node kind using `hs`.
void set_homogeneous_units(RunConfig& config, int units, domain::Selector hs);

/// Checks everything that can be checked before a run: geometry, parameters,
/// selectors known to the registry, weights for every hs present.
void validate(const RunConfig& config);

}  // namespace latticeblocks::bench
