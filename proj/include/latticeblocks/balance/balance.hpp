#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "latticeblocks/domain/patch.hpp"
#include "latticeblocks/domain/selector.hpp"

namespace latticeblocks::balance {

using domain::BlockId;
using domain::Selector;

/// One kind of compute node: how many processes it runs and the hardware
/// selector of each.
struct NodeConfig {
  std::string name;
  int processes_per_node = 1;
  std::vector<Selector> per_process_hs;
};

/// All node kinds plus the list saying which node runs which kind.
struct NodeLayout {
  std::vector<NodeConfig> configs;
  std::vector<std::string> node_assignment;  // node index -> config name

  const NodeConfig& config(const std::string& name) const;
  /// hs of every process in rank order (nodes in order, processes within).
  std::vector<Selector> process_hs() const;
};

struct UnitWeight {
  Selector hs;
  double speed = 1.0;
};

using Weights = std::vector<UnitWeight>;

double speed_of(const Weights& weights, Selector hs);

/// max over units of count / speed.
double objective(std::span<const int> counts, std::span<const double> speeds);

/// Greedy block counts: each block goes to the unit whose load after taking it,
/// (count + 1) / speed, is smallest; ties go to the lowest index.
std::vector<int> greedy_counts(int blocks, std::span<const double> speeds);

struct Assignment {
  std::vector<std::vector<BlockId>> blocks;  // per process
  std::vector<int> counts;
  double objective = 0.0;
};

/// Blocks are dealt out contiguously in the given order, so with
/// lexicographically ordered ids each process gets a run along the
/// slowest-varying axis.
Assignment assign_blocks(std::span<const BlockId> blocks, std::span<const Selector> process_hs,
                         const Weights& weights);

/// speed = 1 / median(per-block step time), scaled so the slowest hs has 1.
Weights calibrate_weights(const std::map<Selector, std::vector<double>>& step_times);

}  // namespace latticeblocks::balance
