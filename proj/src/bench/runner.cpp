#include "latticeblocks/bench/runner.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <fmt/format.h>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "latticeblocks/clock.hpp"
#include "latticeblocks/comm/exchange.hpp"
#include "latticeblocks/domain/block_data.hpp"
#include "latticeblocks/lattice/kernels.hpp"
#include "latticeblocks/perf/model.hpp"

namespace latticeblocks::bench {

using domain::LocalBlock;
using domain::LocalBlocks;
using lattice::CellKind;
using lattice::D3Q19;
using staged::TransferCounters;

std::vector<int> balanced_block_counts(const RunConfig& config) {
  const auto hs = config.nodes.process_hs();
  std::vector<double> speeds;
  for (auto s : hs) speeds.push_back(balance::speed_of(config.weights, s));
  const int blocks = config.block_grid[0] * config.block_grid[1] * config.block_grid[2];
  if (blocks < int(hs.size())) {
    throw ConfigError(fmt::format("{} blocks cannot cover {} processes", blocks, hs.size()));
  }
  return balance::greedy_counts(blocks, speeds);
}

domain::Patch build_patch(const RunConfig& config, const std::vector<int>& blocks_per_process) {
  const auto hs = config.nodes.process_hs();
  return domain::decompose(config.extent, config.block_grid, config.periodic, hs, blocks_per_process);
}

bool fault_injection_requested() {
  const char* v = std::getenv(kFaultInjectEnv);
  return v != nullptr && *v != '\0' && std::string_view(v) != "0";
}

namespace {

struct BlockSnapshot {
  domain::Aabb aabb;
  std::vector<double> values;
  std::vector<std::uint8_t> fluid;
};

struct WorkerResult {
  UnitReport unit;
  std::uint64_t checksum_initial = 0;
  std::uint64_t checksum_final = 0;
  std::vector<std::array<double, 4>> conservation;
  double residual_first = 0;
  double residual_last = 0;
  bool fault_injected = false;
  std::vector<BlockSnapshot> blocks;
};

// ---------------------------------------------------------------------------
// Field diagnostics

template <typename T>
lattice::PdfField<T> host_copy(LocalBlock<T>& b) {
  if (auto* f = std::get_if<lattice::PdfField<T>>(&b.pdfs())) return *f;
  return domain::staged_field(b).download();
}

// Calls f with the block's host field, downloading staged data only.
template <typename T, typename F>
void with_host_field(LocalBlock<T>& b, F&& f) {
  if (auto* h = std::get_if<lattice::PdfField<T>>(&b.pdfs())) {
    f(std::as_const(*h));
  } else {
    const auto down = domain::staged_field(b).download();
    f(down);
  }
}

template <typename F>
void for_fluid_cells(const lattice::CellFlags& flags, F&& f) {
  const auto& n = flags.grid().interior();
  for (int z = 0; z < n.z; ++z)
    for (int y = 0; y < n.y; ++y)
      for (int x = 0; x < n.x; ++x)
        if (flags.kind(x, y, z) == CellKind::Fluid) f(x, y, z);
}

std::uint64_t global_index(const lattice::Extent3& extent, const domain::Block& block, int x, int y, int z) {
  const auto& lo = block.aabb.min;
  return (std::uint64_t(lo[2] + z) * std::uint64_t(extent.y) + std::uint64_t(lo[1] + y)) * std::uint64_t(extent.x) +
         std::uint64_t(lo[0] + x);
}

template <typename T>
std::uint64_t checksum_of(const lattice::PdfField<T>& field, const domain::Block& block, const lattice::Extent3& extent) {
  std::uint64_t sum = 0;
  for_fluid_cells(field.flags(), [&](int x, int y, int z) {
    const auto g = global_index(extent, block, x, y, z);
    for (std::size_t i = 0; i < D3Q19::Q; ++i) sum += checksum_term(g, i, double(field.at(x, y, z, i)));
  });
  return sum;
}

template <typename T>
void add_conservation(const lattice::PdfField<T>& field, std::array<double, 4>& sums) {
  for_fluid_cells(field.flags(), [&](int x, int y, int z) {
    for (std::size_t i = 0; i < D3Q19::Q; ++i) {
      const double f = double(field.at(x, y, z, i));
      sums[0] += f;
      for (int a = 0; a < 3; ++a) sums[std::size_t(a) + 1] += D3Q19::e[i][std::size_t(a)] * f;
    }
  });
}

template <typename T>
void add_velocities(const lattice::PdfField<T>& field, double rho0, std::vector<double>& out) {
  for_fluid_cells(field.flags(), [&](int x, int y, int z) {
    const auto m = lattice::cell_moments(field, x, y, z, rho0);
    out.insert(out.end(), m.u.begin(), m.u.end());
  });
}

double max_change(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0;
  for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

// Corrupts one received ghost PDF of the first block that has a neighbour
// other than itself.
template <typename T>
bool inject_fault(LocalBlocks<T>& blocks, const domain::Patch& patch, int rank) {
  for (auto& b : blocks) {
    for (const auto& nb : patch.neighbors_of(b.id(), rank)) {
      if (nb.id == b.id()) continue;
      const auto side = comm::direction(nb.side);
      const auto extent = b.block->aabb.extent();
      const auto box = comm::ghost_region(extent, side);
      std::array<int, 3> mid{};
      for (int a = 0; a < 3; ++a) mid[std::size_t(a)] = (box.hi[std::size_t(a)] - box.lo[std::size_t(a)]) / 2;
      const auto pdfs = comm::outgoing_pdfs(comm::opposite(side));
      constexpr double kKick = 1e-3;
      if (auto* host = std::get_if<lattice::PdfField<T>>(&b.pdfs())) {
        host->at(box.lo[0] + mid[0], box.lo[1] + mid[1], box.lo[2] + mid[2], pdfs[0]) += T(kKick);
      } else {
        auto& field = domain::staged_field(b);
        auto bytes = field.stage_out(side);
        const std::size_t dx = std::size_t(box.hi[0] - box.lo[0]), dy = std::size_t(box.hi[1] - box.lo[1]);
        const std::size_t cell = (std::size_t(mid[2]) * dy + std::size_t(mid[1])) * dx + std::size_t(mid[0]);
        T value;
        std::memcpy(&value, bytes.data() + cell * pdfs.size() * sizeof(T), sizeof(T));
        value += T(kKick);
        std::memcpy(bytes.data() + cell * pdfs.size() * sizeof(T), &value, sizeof(T));
        field.stage_in(side, bytes);
      }
      return true;
    }
  }
  return false;
}

// Staged crossings one step of `b` must produce: the sweep itself plus one
// stage-out and one stage-in per side whose partner is not a local staged block.
template <typename T>
TransferCounters predicted_step_traffic(LocalBlock<T>& b, const domain::Patch& patch, int rank) {
  auto& field = domain::staged_field(b);
  auto out = staged::predicted_sweep_traffic(field.extent(), field.wall_links(), sizeof(T));
  for (const auto& nb : patch.neighbors_of(b.id(), rank)) {
    if (nb.local && domain::is_staged(patch.block(nb.id).hs)) continue;
    const auto bytes = field.buffer_bytes(comm::direction(nb.side));
    out.device_to_host += bytes;
    out.host_to_device += bytes;
  }
  return out;
}

// ---------------------------------------------------------------------------
// One simulated process

template <typename T>
WorkerResult run_worker(const RunConfig& config, const RunOptions& options, const domain::Patch& patch,
                        comm::Transport& transport, bool fault) {
  const int rank = transport.rank();
  const auto params = config.params();
  const auto registry = domain::default_registry<T>();
  const auto process_hs = config.nodes.process_hs();

  auto ids = patch.blocks_of(rank);
  std::sort(ids.begin(), ids.end());

  WorkerResult result;
  auto& unit = result.unit;
  unit.rank = rank;
  unit.hs = process_hs[std::size_t(rank)].name();
  unit.blocks = int(ids.size());

  std::optional<staged::StagedArena> arena;
  std::size_t device_bytes = 0;
  for (auto id : ids) {
    const auto& block = patch.block(id);
    if (!domain::is_staged(block.hs)) continue;
    const auto total = lattice::CellGrid(block.aabb.extent()).total();
    device_bytes += total * (2 * D3Q19::Q * sizeof(T) + sizeof(CellKind) + 3 * 8) + (1 << 20);
  }
  if (device_bytes > 0) {
    staged::StagedArena::Options o;
    o.link_bandwidth = config.link_bandwidth;
    o.compute_speedup = config.compute_speedup;
    o.guard = options.guard;
    o.reserve_bytes = std::max(o.reserve_bytes, 2 * device_bytes);
    arena.emplace(o);
  }

  LocalBlocks<T> blocks;
  std::array<double, 4> sums{};
  std::vector<double> velocities;
  for (auto id : ids) {
    const auto& block = patch.block(id);
    auto field = make_block_field<T>(config, block, domain::host_layout(block.hs));
    result.checksum_initial += checksum_of(field, block, config.extent);
    add_conservation(field, sums);
    if (options.track_residual) add_velocities(field, params.rho0, velocities);
    unit.fluid_cells += field.flags().interior_fluid_cells();

    LocalBlock<T> local;
    local.block = &block;
    if (domain::is_staged(block.hs)) {
      local.data.add(domain::selectors::data_pdfs(),
                     domain::FieldHandle<T>(std::in_place_type<staged::StagedField<T>>, *arena, field));
    } else {
      local.data.add(domain::selectors::data_pdfs(), domain::FieldHandle<T>(std::move(field)));
    }
    blocks.push_back(std::move(local));
  }
  if (options.track_conservation) result.conservation.push_back(sums);

  std::vector<const typename domain::BlockFunctions<T>::KernelFn*> kernels;
  for (auto& b : blocks) {
    kernels.push_back(&domain::resolve_kernel(registry, domain::selectors::fs_lbm(), b.block->hs, b.block->bs));
  }
  TransferCounters predicted;
  for (auto& b : blocks) {
    if (domain::is_staged(b.block->hs)) {
      const auto p = predicted_step_traffic(b, patch, rank);
      predicted.host_to_device += p.host_to_device;
      predicted.device_to_host += p.device_to_host;
      predicted.on_device += p.on_device;
    }
  }

  auto local_velocities = [&] {
    std::vector<double> out;
    for (auto& b : blocks) with_host_field(b, [&](const auto& f) { add_velocities(f, params.rho0, out); });
    return out;
  };

  const auto wall0 = std::chrono::steady_clock::now();
  const double cpu0 = thread_cpu_seconds();
  const double kernel0 = arena ? arena->kernel_seconds() : 0.0;
  double diagnostics_cpu = 0;

  for (int step = 0; step < config.steps; ++step) {
    const auto before = arena ? arena->counters() : TransferCounters{};
    const auto stats = comm::communicate(blocks, patch, transport, registry);
    unit.messages_sent += stats.messages_sent;
    unit.bytes_sent += stats.bytes_sent;
    if (fault && step == 0) result.fault_injected = inject_fault(blocks, patch, rank) || result.fault_injected;
    for (std::size_t k = 0; k < blocks.size(); ++k) (*kernels[k])(blocks[k], params);

    if (arena) {
      const auto delta = arena->counters() - before;
      unit.step_traffic += delta;
      if (options.check_counters) {
        ++unit.counter_checks;
        if (!(delta == predicted)) ++unit.counter_mismatches;
      }
    }

    const bool first = step == 0;
    const bool before_last = step == config.steps - 2;
    const bool last = step == config.steps - 1;
    if (options.track_conservation || (options.track_residual && (first || before_last || last))) {
      const double d0 = thread_cpu_seconds();
      if (options.track_conservation) {
        std::array<double, 4> s{};
        for (auto& b : blocks) with_host_field(b, [&](const auto& f) { add_conservation(f, s); });
        result.conservation.push_back(s);
      }
      if (options.track_residual) {
        auto now = local_velocities();
        if (first) result.residual_first = max_change(now, velocities);
        if (last) result.residual_last = max_change(now, velocities);
        if (first || before_last) velocities = std::move(now);
      }
      diagnostics_cpu += thread_cpu_seconds() - d0;
    }
  }

  unit.loop_wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  unit.cpu_seconds = thread_cpu_seconds() - cpu0 - diagnostics_cpu;
  unit.busy_seconds = unit.cpu_seconds;
  if (arena) {
    unit.kernel_seconds = arena->kernel_seconds() - kernel0;
    unit.modeled_transfer_seconds =
        perf::modeled_transfer_seconds(unit.step_traffic.host_to_device + unit.step_traffic.device_to_host,
                                       config.link_bandwidth);
    unit.busy_seconds = unit.cpu_seconds - unit.kernel_seconds + unit.kernel_seconds / config.compute_speedup +
                        unit.modeled_transfer_seconds;
  }
  if (unit.busy_seconds > 0 && config.steps > 0) {
    unit.mflups = double(unit.fluid_cells) * config.steps / unit.busy_seconds / 1e6;
  }

  for (auto& b : blocks) {
    const auto field = host_copy(b);
    result.checksum_final += checksum_of(field, *b.block, config.extent);
    if (!options.gather_field) continue;
    BlockSnapshot snap;
    snap.aabb = b.block->aabb;
    const auto n = field.extent();
    for (int z = 0; z < n.z; ++z)
      for (int y = 0; y < n.y; ++y)
        for (int x = 0; x < n.x; ++x) {
          snap.fluid.push_back(field.flags().kind(x, y, z) == CellKind::Fluid);
          for (std::size_t i = 0; i < D3Q19::Q; ++i) snap.values.push_back(double(field.at(x, y, z, i)));
        }
    result.blocks.push_back(std::move(snap));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Results crossing a process boundary

void put_counters(ByteWriter& w, const TransferCounters& c) {
  w.put(c.host_to_device);
  w.put(c.device_to_host);
  w.put(c.on_device);
}

TransferCounters get_counters(ByteReader& r) {
  TransferCounters c;
  c.host_to_device = r.get<std::uint64_t>();
  c.device_to_host = r.get<std::uint64_t>();
  c.on_device = r.get<std::uint64_t>();
  return c;
}

Bytes serialize(const WorkerResult& res) {
  ByteWriter w;
  const auto& u = res.unit;
  w.put(std::int32_t(u.rank));
  w.put_string(u.hs);
  w.put(std::int32_t(u.blocks));
  w.put(u.fluid_cells);
  for (double v : {u.loop_wall_seconds, u.cpu_seconds, u.kernel_seconds, u.modeled_transfer_seconds, u.busy_seconds,
                   u.mflups}) {
    w.put(v);
  }
  put_counters(w, u.step_traffic);
  for (auto v : {u.counter_checks, u.counter_mismatches, u.messages_sent, u.bytes_sent}) w.put(v);
  w.put(res.checksum_initial);
  w.put(res.checksum_final);
  w.put(std::uint64_t(res.conservation.size()));
  for (const auto& s : res.conservation) {
    for (double v : s) w.put(v);
  }
  w.put(res.residual_first);
  w.put(res.residual_last);
  w.put(std::uint8_t(res.fault_injected));
  w.put(std::uint64_t(res.blocks.size()));
  for (const auto& b : res.blocks) {
    for (int a = 0; a < 3; ++a) w.put(std::int32_t(b.aabb.min[std::size_t(a)]));
    for (int a = 0; a < 3; ++a) w.put(std::int32_t(b.aabb.max[std::size_t(a)]));
    w.put(std::uint64_t(b.fluid.size()));
    w.put_array(std::span<const double>(b.values));
    w.put_array(std::span<const std::uint8_t>(b.fluid));
  }
  return w.take();
}

WorkerResult deserialize(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  WorkerResult res;
  auto& u = res.unit;
  u.rank = r.get<std::int32_t>();
  u.hs = r.get_string();
  u.blocks = r.get<std::int32_t>();
  u.fluid_cells = r.get<std::uint64_t>();
  for (double* v : {&u.loop_wall_seconds, &u.cpu_seconds, &u.kernel_seconds, &u.modeled_transfer_seconds,
                    &u.busy_seconds, &u.mflups}) {
    *v = r.get<double>();
  }
  u.step_traffic = get_counters(r);
  for (std::uint64_t* v : {&u.counter_checks, &u.counter_mismatches, &u.messages_sent, &u.bytes_sent}) {
    *v = r.get<std::uint64_t>();
  }
  res.checksum_initial = r.get<std::uint64_t>();
  res.checksum_final = r.get<std::uint64_t>();
  res.conservation.resize(r.get<std::uint64_t>());
  for (auto& s : res.conservation) {
    for (double& v : s) v = r.get<double>();
  }
  res.residual_first = r.get<double>();
  res.residual_last = r.get<double>();
  res.fault_injected = r.get<std::uint8_t>() != 0;
  res.blocks.resize(r.get<std::uint64_t>());
  for (auto& b : res.blocks) {
    for (int a = 0; a < 3; ++a) b.aabb.min[std::size_t(a)] = r.get<std::int32_t>();
    for (int a = 0; a < 3; ++a) b.aabb.max[std::size_t(a)] = r.get<std::int32_t>();
    const auto cells = r.get<std::uint64_t>();
    if (cells > r.remaining()) throw ProtocolError("worker result announces more cells than it carries");
    b.values.resize(cells * D3Q19::Q);
    b.fluid.resize(cells);
    r.get_array(std::span<double>(b.values));
    r.get_array(std::span<std::uint8_t>(b.fluid));
  }
  if (!r.done()) throw ProtocolError("trailing bytes after worker result");
  return res;
}

// ---------------------------------------------------------------------------
// Launchers

template <typename T>
std::vector<WorkerResult> run_threads(const RunConfig& config, const RunOptions& options,
                                      const domain::Patch& patch, bool fault) {
  const int size = patch.process_count();
  comm::InProcessHub hub(size);
  std::vector<std::unique_ptr<comm::Transport>> endpoints;
  for (int r = 0; r < size; ++r) endpoints.push_back(hub.endpoint(r));

  std::vector<WorkerResult> results{std::size_t(size)};
  std::vector<std::exception_ptr> errors{std::size_t(size)};
  std::vector<std::thread> threads;
  for (int r = 0; r < size; ++r) {
    threads.emplace_back([&, r] {
      try {
        results[std::size_t(r)] = run_worker<T>(config, options, patch, *endpoints[std::size_t(r)], fault);
      } catch (const std::exception& e) {
        errors[std::size_t(r)] = std::current_exception();
        hub.abort(fmt::format("rank {} failed: {}", r, e.what()));
      }
    });
  }
  for (auto& t : threads) t.join();

  // Other ranks fail with transport errors once the hub aborts; report the
  // failure that started it.
  std::exception_ptr first;
  for (const auto& e : errors) {
    if (!e) continue;
    if (!first) first = e;
    try {
      std::rethrow_exception(e);
    } catch (const TransportError&) {
    } catch (...) {
      std::rethrow_exception(e);
    }
  }
  if (first) std::rethrow_exception(first);
  return results;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TransportError("worker produced no result file " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Bytes out(raw.size());
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

template <typename T>
std::vector<WorkerResult> run_processes(const RunConfig& config, const RunOptions& options,
                                        const domain::Patch& patch, bool fault) {
  const int size = patch.process_count();
  std::string pattern = (std::filesystem::temp_directory_path() / "latticeblocks-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) throw TransportError("cannot create socket directory");
  const std::filesystem::path dir = pattern;

  std::fflush(nullptr);
  std::vector<pid_t> children;
  for (int r = 0; r < size; ++r) {
    const pid_t pid = ::fork();
    if (pid < 0) throw TransportError("fork failed");
    if (pid == 0) {
      int code = 0;
      try {
        auto transport = comm::SocketTransport::connect(dir, r, size);
        const auto result = run_worker<T>(config, options, patch, *transport, fault);
        write_file(dir / fmt::format("result{}.bin", r), serialize(result));
      } catch (const Error& e) {
        const auto text = fmt::format("{}\n{}", int(e.category()), e.what());
        write_file(dir / fmt::format("error{}.txt", r), std::as_bytes(std::span(text)));
        code = int(e.category());
      } catch (const std::exception& e) {
        const auto text = fmt::format("{}\n{}", int(ErrorCategory::Usage), e.what());
        write_file(dir / fmt::format("error{}.txt", r), std::as_bytes(std::span(text)));
        code = 1;
      }
      ::_exit(code);
    }
    children.push_back(pid);
  }

  bool failed = false;
  for (auto pid : children) {
    int status = 0;
    ::waitpid(pid, &status, 0);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) failed = true;
  }

  std::vector<WorkerResult> results;
  std::optional<std::pair<ErrorCategory, std::string>> root, any;
  if (failed) {
    for (int r = 0; r < size; ++r) {
      const auto path = dir / fmt::format("error{}.txt", r);
      if (!std::filesystem::exists(path)) continue;
      std::ifstream in(path);
      int category = 0;
      in >> category;
      in.ignore();
      std::string message((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      const auto entry = std::pair{ErrorCategory(category), fmt::format("rank {}: {}", r, message)};
      if (!any) any = entry;
      if (!root && entry.first != ErrorCategory::Transport) root = entry;
    }
  } else {
    for (int r = 0; r < size; ++r) results.push_back(deserialize(read_file(dir / fmt::format("result{}.bin", r))));
  }
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  if (failed) {
    if (root) throw_error(root->first, root->second);
    if (any) throw_error(any->first, any->second);
    throw TransportError("a worker process terminated abnormally");
  }
  return results;
}

template <typename T>
RunReport run_typed(const RunConfig& config, const RunOptions& options) {
  validate(config);
  const auto counts = options.blocks_per_process.empty() ? balanced_block_counts(config) : options.blocks_per_process;
  const auto patch = build_patch(config, counts);
  const bool fault = fault_injection_requested();

  auto results = config.transport == TransportKind::Socket ? run_processes<T>(config, options, patch, fault)
                                                           : run_threads<T>(config, options, patch, fault);

  RunReport report;
  report.config_text = canonical(config);
  report.steps = config.steps;
  double busy_min = std::numeric_limits<double>::infinity(), busy_max = 0, busy_sum = 0;
  int busy_units = 0;
  for (auto& res : results) {
    const auto& u = res.unit;
    report.fluid_cells += u.fluid_cells;
    report.wall_seconds = std::max(report.wall_seconds, u.loop_wall_seconds);
    report.checksum_initial += res.checksum_initial;
    report.checksum_final += res.checksum_final;
    report.residual_first = std::max(report.residual_first, res.residual_first);
    report.residual_last = std::max(report.residual_last, res.residual_last);
    report.modeled_transfer_seconds += u.modeled_transfer_seconds;
    if (u.kernel_seconds > 0 || u.modeled_transfer_seconds > 0) {
      report.device_seconds += u.kernel_seconds / config.compute_speedup + u.modeled_transfer_seconds;
    }
    report.counter_checks += u.counter_checks;
    report.counter_mismatches += u.counter_mismatches;
    report.fault_injected = report.fault_injected || res.fault_injected;
    if (u.blocks > 0) {
      busy_min = std::min(busy_min, u.busy_seconds);
      busy_max = std::max(busy_max, u.busy_seconds);
      busy_sum += u.busy_seconds;
      ++busy_units;
    }
    report.units.push_back(u);
  }
  if (busy_units > 0 && busy_sum > 0) report.busy_spread = (busy_max - busy_min) / (busy_sum / busy_units);
  if (config.steps > 0 && report.wall_seconds > 0) {
    report.aggregate_mflups = perf::measure_mflups(report.fluid_cells, std::uint64_t(config.steps), report.wall_seconds);
  }

  if (options.track_conservation) {
    const std::size_t n = results.front().conservation.size();
    report.conservation.assign(n, {0, 0, 0, 0});
    for (const auto& res : results) {
      for (std::size_t t = 0; t < n; ++t)
        for (std::size_t k = 0; k < 4; ++k) report.conservation[t][k] += res.conservation[t][k];
    }
    const double scale = config.rho0 * double(std::max<std::uint64_t>(report.fluid_cells, 1));
    for (std::size_t t = 1; t < n; ++t) {
      const auto& c = report.conservation;
      report.max_mass_drift_per_step = std::max(report.max_mass_drift_per_step, std::abs(c[t][0] - c[t - 1][0]) / scale);
      report.mass_drift = std::max(report.mass_drift, std::abs(c[t][0] - c[0][0]) / scale);
      for (std::size_t k = 1; k < 4; ++k) {
        report.momentum_drift = std::max(report.momentum_drift, std::abs(c[t][k] - c[0][k]) / scale);
      }
    }
  }

  if (options.gather_field) {
    GlobalField field;
    field.extent = config.extent;
    field.values.assign(config.extent.cells() * D3Q19::Q, 0.0);
    field.fluid.assign(config.extent.cells(), 0);
    for (const auto& res : results) {
      for (const auto& b : res.blocks) {
        const auto n = b.aabb.extent();
        std::size_t k = 0;
        for (int z = 0; z < n.z; ++z)
          for (int y = 0; y < n.y; ++y)
            for (int x = 0; x < n.x; ++x, ++k) {
              const auto c = field.cell(b.aabb.min[0] + x, b.aabb.min[1] + y, b.aabb.min[2] + z);
              field.fluid[c] = b.fluid[k];
              std::copy_n(b.values.begin() + std::ptrdiff_t(k * D3Q19::Q), D3Q19::Q,
                          field.values.begin() + std::ptrdiff_t(c * D3Q19::Q));
            }
      }
    }
    report.field = std::move(field);
  }

  if (config.scenario == Scenario::LidCavity) {
    report.notes.push_back(fmt::format("lid speed {} and tau {} are artifact defaults, not taken from a reference run",
                                       config.wall_velocity[0], config.tau));
  }
  if (report.device_seconds > 0) {
    report.notes.push_back(fmt::format("staged device emulated: kernels on host CPU / {}, link modelled at {} B/s",
                                       config.compute_speedup, config.link_bandwidth));
  }
  if (report.fault_injected) report.notes.push_back("fault injection corrupted one received ghost value at step 0");
  return report;
}

}  // namespace

RunReport run_scenario(const RunConfig& config, const RunOptions& options) {
  return config.precision == lattice::Precision::SP ? run_typed<float>(config, options)
                                                   : run_typed<double>(config, options);
}

std::string format_report(const RunReport& r) {
  std::string out;
  out += fmt::format("steps {}  fluid cells {}  wall {:.4f} s  aggregate {:.2f} MFLUPS\n", r.steps, r.fluid_cells,
                     r.wall_seconds, r.aggregate_mflups);
  out += fmt::format("checksum initial {:016x}  final {:016x}\n", r.checksum_initial, r.checksum_final);
  if (!r.conservation.empty()) {
    out += fmt::format("mass drift {:.3e} (max per step {:.3e})  momentum drift {:.3e}\n", r.mass_drift,
                       r.max_mass_drift_per_step, r.momentum_drift);
  }
  out += fmt::format("residual first step {:.3e}  last step {:.3e}\n", r.residual_first, r.residual_last);
  out += fmt::format("staged: modelled transfer {:.6f} s  device clock {:.6f} s  counter checks {} mismatches {}\n",
                     r.modeled_transfer_seconds, r.device_seconds, r.counter_checks, r.counter_mismatches);
  out += fmt::format("per-unit busy-time spread {:.1f}%\n", 100.0 * r.busy_spread);
  out += fmt::format("{:>4} {:<9} {:>6} {:>10} {:>10} {:>10} {:>10} {:>14} {:>14}\n", "rank", "hs", "blocks",
                     "cells", "busy s", "MFLUPS", "msgs", "H2D bytes", "D2H bytes");
  for (const auto& u : r.units) {
    out += fmt::format("{:>4} {:<9} {:>6} {:>10} {:>10.4f} {:>10.2f} {:>10} {:>14} {:>14}\n", u.rank, u.hs, u.blocks,
                       u.fluid_cells, u.busy_seconds, u.mflups, u.messages_sent, u.step_traffic.host_to_device,
                       u.step_traffic.device_to_host);
  }
  for (const auto& n : r.notes) out += "note: " + n + "\n";
  return out;
}

std::string report_csv(const RunReport& r) {
  std::string out =
      "rank,hs,blocks,fluid_cells,steps,loop_wall_s,cpu_s,kernel_s,modeled_transfer_s,busy_s,mflups,"
      "h2d_bytes,d2h_bytes,on_device_bytes,counter_checks,counter_mismatches,messages_sent,bytes_sent\n";
  for (const auto& u : r.units) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", u.rank, u.hs, u.blocks,
                       u.fluid_cells, r.steps, u.loop_wall_seconds, u.cpu_seconds, u.kernel_seconds,
                       u.modeled_transfer_seconds, u.busy_seconds, u.mflups, u.step_traffic.host_to_device,
                       u.step_traffic.device_to_host, u.step_traffic.on_device, u.counter_checks,
                       u.counter_mismatches, u.messages_sent, u.bytes_sent);
  }
  std::uint64_t h2d = 0, d2h = 0, dev = 0, msgs = 0, bytes = 0;
  int blocks = 0;
  for (const auto& u : r.units) {
    h2d += u.step_traffic.host_to_device;
    d2h += u.step_traffic.device_to_host;
    dev += u.step_traffic.on_device;
    msgs += u.messages_sent;
    bytes += u.bytes_sent;
    blocks += u.blocks;
  }
  out += fmt::format("all,,{},{},{},{},,,{},,{},{},{},{},{},{},{},{}\n", blocks, r.fluid_cells, r.steps,
                     r.wall_seconds, r.modeled_transfer_seconds, r.aggregate_mflups, h2d, d2h, dev, r.counter_checks,
                     r.counter_mismatches, msgs, bytes);
  return out;
}

void write_report(const RunReport& report, const std::filesystem::path& path) {
  std::ofstream csv(path);
  if (!csv) throw ConfigError("cannot write report " + path.string());
  csv << report_csv(report);
  std::ofstream text(path.string() + ".txt");
  if (!text) throw ConfigError("cannot write report " + path.string() + ".txt");
  text << "configuration:\n" << report.config_text << "\n" << format_report(report);
}

}  // namespace latticeblocks::bench
