#include "latticeblocks/bench/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>

#include "latticeblocks/domain/block_data.hpp"
#include "latticeblocks/errors.hpp"

namespace latticeblocks::bench {

namespace pt = boost::property_tree;
using domain::Selector;

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::Couette: return "couette";
    case Scenario::LidCavity: return "lidcavity";
    case Scenario::RestBox: return "restbox";
  }
  return "?";
}

std::string_view to_string(TransportKind t) { return t == TransportKind::InProcess ? "inprocess" : "socket"; }

Scenario parse_scenario(std::string_view s) {
  if (s == "couette") return Scenario::Couette;
  if (s == "lidcavity") return Scenario::LidCavity;
  if (s == "restbox") return Scenario::RestBox;
  throw ConfigError("unknown scenario '" + std::string(s) + "' (expected couette, lidcavity or restbox)");
}

TransportKind parse_transport(std::string_view s) {
  if (s == "inprocess") return TransportKind::InProcess;
  if (s == "socket") return TransportKind::Socket;
  throw ConfigError("unknown transport '" + std::string(s) + "' (expected inprocess or socket)");
}

RunConfig default_config(Scenario scenario) {
  RunConfig c;
  c.scenario = scenario;
  switch (scenario) {
    case Scenario::Couette:
      c.extent = {4, 18, 4};
      c.periodic = {true, false, true};
      c.tau = 0.8;
      break;
    case Scenario::LidCavity:
      c.extent = {48, 48, 48};
      c.periodic = {false, false, false};
      c.tau = 0.65;
      break;
    case Scenario::RestBox:
      c.extent = {16, 16, 16};
      c.periodic = {true, true, true};
      c.wall_velocity = {0, 0, 0};
      break;
  }
  set_homogeneous_units(c, 1, domain::selectors::hs_cpu());
  return c;
}

void set_homogeneous_units(RunConfig& config, int units, Selector hs) {
  if (units <= 0) throw ConfigError("unit count must be positive");
  config.nodes.configs = {{"node", units, std::vector<Selector>(std::size_t(units), hs)}};
  config.nodes.node_assignment = {"node"};
  config.weights = {{hs, 1.0}};
}

namespace {

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

template <typename N>
N number(std::string_view key, std::string_view token) {
  N value{};
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("'" + std::string(key) + "': cannot parse '" + std::string(token) + "' as a number");
  }
  return value;
}

template <typename N, std::size_t K>
std::array<N, K> numbers(std::string_view key, std::string_view text) {
  const auto w = words(text);
  if (w.size() != K) {
    throw ConfigError("'" + std::string(key) + "' needs " + std::to_string(K) + " values, got " +
                      std::to_string(w.size()));
  }
  std::array<N, K> out{};
  for (std::size_t i = 0; i < K; ++i) out[i] = number<N>(key, w[i]);
  return out;
}

bool flag(std::string_view key, std::string_view token) {
  if (token == "1" || token == "true") return true;
  if (token == "0" || token == "false") return false;
  throw ConfigError("'" + std::string(key) + "': expected 0/1 or true/false, got '" + std::string(token) + "'");
}

// Rejects keys the section does not know so typos do not pass silently.
void check_keys(const std::string& section, const pt::ptree& tree, const std::set<std::string>& known) {
  for (const auto& [key, value] : tree) {
    if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
  }
}

std::string num(double v) { return fmt::format("{}", v); }

}  // namespace

RunConfig parse_config(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }

  const auto run = tree.get_child_optional("run");
  if (!run) throw ConfigError("configuration has no [run] section");
  const auto scenario_text = run->get_optional<std::string>("scenario");
  if (!scenario_text) throw ConfigError("[run] needs a scenario");
  RunConfig c = default_config(parse_scenario(*scenario_text));

  check_keys("run", *run,
             {"scenario", "extent", "blocks", "steps", "tau", "rho0", "precision", "periodic", "wall_velocity",
              "transport", "seed", "perturbation"});
  for (const auto& [key, node] : *run) {
    const auto value = node.data();
    if (key == "extent") {
      const auto e = numbers<int, 3>(key, value);
      c.extent = {e[0], e[1], e[2]};
    } else if (key == "blocks") {
      c.block_grid = numbers<int, 3>(key, value);
    } else if (key == "steps") {
      c.steps = number<int>(key, value);
    } else if (key == "tau") {
      c.tau = number<double>(key, value);
    } else if (key == "rho0") {
      c.rho0 = number<double>(key, value);
    } else if (key == "precision") {
      c.precision = lattice::parse_precision(value);
    } else if (key == "periodic") {
      const auto w = words(value);
      if (w.size() != 3) throw ConfigError("'periodic' needs 3 values");
      for (int a = 0; a < 3; ++a) c.periodic[std::size_t(a)] = flag(key, w[std::size_t(a)]);
    } else if (key == "wall_velocity") {
      c.wall_velocity = numbers<double, 3>(key, value);
    } else if (key == "transport") {
      c.transport = parse_transport(value);
    } else if (key == "seed") {
      c.seed = number<std::uint64_t>(key, value);
    } else if (key == "perturbation") {
      c.perturbation = number<double>(key, value);
    }
  }

  if (const auto staged = tree.get_child_optional("staged")) {
    check_keys("staged", *staged, {"compute_speedup", "link_bandwidth"});
    c.compute_speedup = staged->get<double>("compute_speedup", c.compute_speedup);
    c.link_bandwidth = staged->get<double>("link_bandwidth", c.link_bandwidth);
  }

  std::vector<balance::NodeConfig> configs;
  for (const auto& [section, node] : tree) {
    if (!section.starts_with("node:")) continue;
    check_keys(section, node, {"processes", "hs"});
    balance::NodeConfig nc;
    nc.name = section.substr(5);
    if (nc.name.empty()) throw ConfigError("node configuration section needs a name: [node:NAME]");
    const auto processes = node.get_optional<std::string>("processes");
    if (!processes) throw ConfigError("[" + section + "] needs 'processes'");
    nc.processes_per_node = number<int>("processes", *processes);
    for (const auto& hs : words(node.get<std::string>("hs", ""))) nc.per_process_hs.push_back(Selector(hs));
    configs.push_back(std::move(nc));
  }
  const auto nodes = tree.get_child_optional("nodes");
  if (!configs.empty()) {
    c.nodes.configs = std::move(configs);
    if (!nodes) throw ConfigError("node configurations given but no [nodes] assignment");
    check_keys("nodes", *nodes, {"assignment"});
    c.nodes.node_assignment = words(nodes->get<std::string>("assignment", ""));
    if (c.nodes.node_assignment.empty()) throw ConfigError("[nodes] assignment is empty");
    c.weights.clear();
  } else if (nodes) {
    throw ConfigError("[nodes] given without any [node:NAME] section");
  }

  if (const auto weights = tree.get_child_optional("weights")) {
    c.weights.clear();
    for (const auto& [key, node] : *weights) c.weights.push_back({Selector(key), number<double>(key, node.data())});
  } else if (c.weights.empty()) {
    // No explicit weights: every hs present counts the same.
    for (auto hs : c.nodes.process_hs()) {
      bool seen = false;
      for (const auto& w : c.weights) seen = seen || w.hs == hs;
      if (!seen) c.weights.push_back({hs, 1.0});
    }
  }

  for (const auto& [section, node] : tree) {
    if (section != "run" && section != "staged" && section != "nodes" && section != "weights" &&
        !section.starts_with("node:")) {
      throw ConfigError("unknown section [" + section + "]");
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string canonical(const RunConfig& c) {
  std::string out = "[run]\n";
  out += fmt::format("scenario = {}\n", to_string(c.scenario));
  out += fmt::format("extent = {} {} {}\n", c.extent.x, c.extent.y, c.extent.z);
  out += fmt::format("blocks = {} {} {}\n", c.block_grid[0], c.block_grid[1], c.block_grid[2]);
  out += fmt::format("steps = {}\n", c.steps);
  out += fmt::format("tau = {}\n", num(c.tau));
  out += fmt::format("rho0 = {}\n", num(c.rho0));
  out += fmt::format("precision = {}\n", lattice::to_string(c.precision));
  out += fmt::format("periodic = {} {} {}\n", int(c.periodic[0]), int(c.periodic[1]), int(c.periodic[2]));
  out += fmt::format("wall_velocity = {} {} {}\n", num(c.wall_velocity[0]), num(c.wall_velocity[1]),
                     num(c.wall_velocity[2]));
  out += fmt::format("transport = {}\n", to_string(c.transport));
  out += fmt::format("seed = {}\n", c.seed);
  out += fmt::format("perturbation = {}\n", num(c.perturbation));
  out += "\n[staged]\n";
  out += fmt::format("compute_speedup = {}\n", num(c.compute_speedup));
  out += fmt::format("link_bandwidth = {}\n", num(c.link_bandwidth));
  for (const auto& nc : c.nodes.configs) {
    out += fmt::format("\n[node:{}]\n", nc.name);
    out += fmt::format("processes = {}\n", nc.processes_per_node);
    std::string hs;
    for (auto s : nc.per_process_hs) hs += (hs.empty() ? "" : " ") + s.name();
    out += fmt::format("hs = {}\n", hs);
  }
  out += "\n[nodes]\n";
  std::string assignment;
  for (const auto& n : c.nodes.node_assignment) assignment += (assignment.empty() ? "" : " ") + n;
  out += fmt::format("assignment = {}\n", assignment);
  out += "\n[weights]\n";
  for (const auto& w : c.weights) out += fmt::format("{} = {}\n", w.hs.name(), num(w.speed));
  return out;
}

void validate(const RunConfig& c) {
  if (c.extent.empty()) throw ConfigError("extent must be positive on every axis");
  for (int a = 0; a < 3; ++a) {
    if (c.block_grid[std::size_t(a)] <= 0) throw ConfigError("block grid must be positive on every axis");
    if (c.block_grid[std::size_t(a)] > c.extent[a]) {
      throw ConfigError(fmt::format("block grid {} exceeds extent {} on axis {}", c.block_grid[std::size_t(a)],
                                    c.extent[a], "xyz"[a]));
    }
  }
  if (c.steps < 0) throw ConfigError("steps must be non-negative");
  c.params().validate();
  if (!(c.compute_speedup > 0.0)) throw ConfigError("compute_speedup must be positive");
  if (!(c.link_bandwidth > 0.0)) throw ConfigError("link_bandwidth must be positive");
  if (c.scenario == Scenario::Couette && c.extent.y < 3) throw ConfigError("couette needs at least 3 cells in y");
  if (c.scenario == Scenario::LidCavity && (c.extent.x < 3 || c.extent.y < 3 || c.extent.z < 3)) {
    throw ConfigError("lid cavity needs at least 3 cells per axis");
  }

  const auto hs_list = c.nodes.process_hs();
  if (hs_list.empty()) throw ConfigError("no processes configured");
  const auto registry = domain::default_registry<double>();
  for (auto hs : hs_list) {
    if (!registry.contains({domain::selectors::fs_lbm(), hs, domain::selectors::bs_pure_lbm()})) {
      throw ConfigError("hardware selector '" + hs.name() + "' has no registered functionality");
    }
    (void)balance::speed_of(c.weights, hs);
  }
  const long blocks = long(c.block_grid[0]) * c.block_grid[1] * c.block_grid[2];
  if (blocks < long(hs_list.size())) {
    throw ConfigError(fmt::format("{} blocks cannot cover {} processes", blocks, hs_list.size()));
  }
}

}  // namespace latticeblocks::bench
