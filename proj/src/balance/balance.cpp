#include "latticeblocks/balance/balance.hpp"

#include <algorithm>
#include <limits>

#include "latticeblocks/errors.hpp"

namespace latticeblocks::balance {

const NodeConfig& NodeLayout::config(const std::string& name) const {
  for (const auto& c : configs) {
    if (c.name == name) return c;
  }
  throw ConfigError("unknown node configuration '" + name + "'");
}

std::vector<Selector> NodeLayout::process_hs() const {
  std::vector<Selector> out;
  for (const auto& node : node_assignment) {
    const auto& c = config(node);
    if (c.processes_per_node <= 0 || std::size_t(c.processes_per_node) != c.per_process_hs.size()) {
      throw ConfigError("node configuration '" + c.name + "' declares " + std::to_string(c.processes_per_node) +
                        " processes but lists " + std::to_string(c.per_process_hs.size()) + " selectors");
    }
    out.insert(out.end(), c.per_process_hs.begin(), c.per_process_hs.end());
  }
  return out;
}

double speed_of(const Weights& weights, Selector hs) {
  for (const auto& w : weights) {
    if (w.hs == hs) {
      if (!(w.speed > 0.0)) throw ConfigError("weight for hs=" + hs.name() + " must be positive");
      return w.speed;
    }
  }
  throw ConfigError("no load-balance weight for hs=" + hs.name());
}

double objective(std::span<const int> counts, std::span<const double> speeds) {
  double worst = 0.0;
  for (std::size_t p = 0; p < counts.size(); ++p) worst = std::max(worst, counts[p] / speeds[p]);
  return worst;
}

std::vector<int> greedy_counts(int blocks, std::span<const double> speeds) {
  if (speeds.empty()) throw ConfigError("no compute units to assign blocks to");
  std::vector<int> counts(speeds.size(), 0);
  for (int b = 0; b < blocks; ++b) {
    std::size_t best = 0;
    double best_load = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < speeds.size(); ++p) {
      const double load = (counts[p] + 1) / speeds[p];
      if (load < best_load) {
        best_load = load;
        best = p;
      }
    }
    ++counts[best];
  }
  return counts;
}

Assignment assign_blocks(std::span<const BlockId> blocks, std::span<const Selector> process_hs,
                         const Weights& weights) {
  if (blocks.size() < process_hs.size()) {
    throw ConfigError(std::to_string(blocks.size()) + " blocks cannot cover " + std::to_string(process_hs.size()) +
                      " processes");
  }
  std::vector<double> speeds;
  for (auto hs : process_hs) speeds.push_back(speed_of(weights, hs));

  Assignment out;
  out.counts = greedy_counts(int(blocks.size()), speeds);
  out.objective = objective(out.counts, speeds);
  out.blocks.resize(process_hs.size());
  std::size_t next = 0;
  for (std::size_t p = 0; p < process_hs.size(); ++p) {
    for (int k = 0; k < out.counts[p]; ++k) out.blocks[p].push_back(blocks[next++]);
  }
  return out;
}

Weights calibrate_weights(const std::map<Selector, std::vector<double>>& step_times) {
  Weights out;
  double slowest = std::numeric_limits<double>::infinity();
  for (const auto& [hs, times] : step_times) {
    if (times.empty()) throw ConfigError("no step-time measurement for hs=" + hs.name());
    auto sorted = times;
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    if (!(median > 0.0)) throw MeasurementError("non-positive step time for hs=" + hs.name());
    out.push_back({hs, 1.0 / median});
    slowest = std::min(slowest, 1.0 / median);
  }
  for (auto& w : out) w.speed /= slowest;
  return out;
}

}  // namespace latticeblocks::balance
