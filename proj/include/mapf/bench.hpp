#pragma once

// Experiment harness: planner variants, the run matrix, failure conventions,
// median aggregation, and the CSV schemas for raw runs and aggregates.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <mutex>
#include <exception>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "mapf/carp.hpp"
#include "mapf/mapgen.hpp"
#include "mapf/mrdrrt.hpp"
#include "mapf/roadmap.hpp"
#include "mapf/validate.hpp"

namespace mapf::bench {

inline constexpr double kAllFailedValue = 100000.0;
inline constexpr std::size_t kMrdrrtIterationCap = 500000;

enum class PlannerKind { carp, mrdrrt };

struct VariantSpec {
  PlannerKind planner = PlannerKind::mrdrrt;
  int shuffles = 1;                 // carp only
  mrdrrt::PlannerParams params;     // mrdrrt only; seed is replaced per run

  std::string name() const {
    if (planner == PlannerKind::carp) return "carp-" + std::to_string(shuffles);
    std::string n = "mrdrrt";
    if (params.improved_expansion) n += "-exp";
    if (params.rewiring) n += "-rew";
    return n == "mrdrrt" ? "mrdrrt-base" : n;
  }

  static VariantSpec carp(int shuffles) {
    VariantSpec v;
    v.planner = PlannerKind::carp;
    v.shuffles = shuffles;
    v.validate();
    return v;
  }

  static VariantSpec mrdrrt(bool improved_expansion, bool rewiring, mrdrrt::PlannerParams base = {}) {
    VariantSpec v;
    v.planner = PlannerKind::mrdrrt;
    v.params = base;
    v.params.improved_expansion = improved_expansion;
    v.params.rewiring = rewiring;
    return v;
  }

  // Accepts carp-{1,10,100,1000}, mrdrrt-exp-rew, mrdrrt-exp, mrdrrt-rew, mrdrrt-base.
  static VariantSpec parse(const std::string& name, const mrdrrt::PlannerParams& base = {}) {
    if (name.rfind("carp-", 0) == 0) {
      try {
        std::size_t used = 0;
        int shuffles = std::stoi(name.substr(5), &used);
        if (used == name.size() - 5) return carp(shuffles);
      } catch (const std::logic_error&) {
      }
      throw std::invalid_argument("unknown variant " + name);
    }
    if (name == "mrdrrt-exp-rew") return mrdrrt(true, true, base);
    if (name == "mrdrrt-exp") return mrdrrt(true, false, base);
    if (name == "mrdrrt-rew") return mrdrrt(false, true, base);
    if (name == "mrdrrt-base") return mrdrrt(false, false, base);
    throw std::invalid_argument("unknown variant " + name);
  }

  void validate() const {
    if (planner == PlannerKind::carp && shuffles != 1 && shuffles != 10 && shuffles != 100 && shuffles != 1000) {
      throw std::invalid_argument("carp shuffle limit must be one of 1, 10, 100, 1000");
    }
    if (planner == PlannerKind::mrdrrt) params.validate();
  }
};

inline std::vector<VariantSpec> carp_variants() {
  return {VariantSpec::carp(1), VariantSpec::carp(10), VariantSpec::carp(100), VariantSpec::carp(1000)};
}

inline std::vector<VariantSpec> mrdrrt_variants(const mrdrrt::PlannerParams& base = {}) {
  return {VariantSpec::mrdrrt(true, true, base), VariantSpec::mrdrrt(true, false, base),
          VariantSpec::mrdrrt(false, true, base), VariantSpec::mrdrrt(false, false, base)};
}

struct RunRecord {
  std::string map_id;
  std::size_t assignment_id = 0;
  std::string variant;
  bool success = false;
  double steps = 0.0;
  double sum_of_costs = 0.0;
  double iterations = 0.0;
  double runtime_ms = 0.0;
  std::uint64_t seed = 0;
  std::optional<Plan> plan;  // retained only when requested; not serialized

  bool same_fields(const RunRecord& o) const {
    return std::tie(map_id, assignment_id, variant, success, steps, sum_of_costs, iterations, runtime_ms, seed) ==
           std::tie(o.map_id, o.assignment_id, o.variant, o.success, o.steps, o.sum_of_costs, o.iterations,
                    o.runtime_ms, o.seed);
  }
};

struct MapEntry {
  std::string id;
  std::string grid;         // aggregation label, e.g. "20x20" or "adv-k4"
  std::size_t edge_count = 0;  // aggregation key; 0 when maps in a group differ
  Roadmap map;
  std::vector<Assignment> assignments;
};

struct MatrixOptions {
  std::uint64_t master_seed = 1;
  unsigned workers = 1;
  bool keep_plans = false;
};

inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t run_seed(std::uint64_t master, std::size_t map, std::size_t assignment, std::size_t variant) {
  return mix_seed(mix_seed(mix_seed(mix_seed(master) ^ map) ^ assignment) ^ variant);
}

// Runs one planner variant on one instance. Failures are data: CARP reports
// its shuffle limit as iterations, MRdRRT its iteration cap.
inline RunRecord run_one(const Roadmap& map, const Assignment& assignment, const VariantSpec& variant,
                         std::uint64_t seed) {
  RunRecord r;
  r.variant = variant.name();
  r.seed = seed;
  const auto started = std::chrono::steady_clock::now();
  std::optional<Plan> plan;
  if (variant.planner == PlannerKind::carp) {
    carp::CarpParams params{variant.shuffles, 0, seed};
    auto result = carp::plan_all(assignment, map, params);
    r.iterations = result.success() ? result.shuffles_used : variant.shuffles;
    plan = std::move(result.plan);
  } else {
    mrdrrt::PlannerParams params = variant.params;
    params.seed = seed;
    try {
      auto result = mrdrrt::plan(assignment, map, params);
      r.iterations = static_cast<double>(result.stats.iterations);
      plan = std::move(result.plan);
    } catch (const mrdrrt::InfeasibleInstance&) {
      r.iterations = static_cast<double>(params.max_iterations);
    }
  }
  r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  if (plan) {
    if (auto violation = validate_plan(*plan, assignment, map)) {
      throw std::logic_error(r.variant + " returned an invalid plan: " + violation->describe());
    }
    r.success = true;
    r.steps = static_cast<double>(plan->makespan());
    r.sum_of_costs = plan->sum_of_costs(map);
    r.plan = std::move(plan);
  }
  return r;
}

// Every (map, assignment, variant) cell, in that nesting order regardless of
// how many workers ran them.
inline std::vector<RunRecord> run_matrix(const std::vector<MapEntry>& maps, const std::vector<VariantSpec>& variants,
                                         const MatrixOptions& options = {}) {
  struct Cell {
    std::size_t map, assignment, variant;
  };
  std::vector<Cell> cells;
  for (std::size_t m = 0; m < maps.size(); ++m) {
    for (std::size_t a = 0; a < maps[m].assignments.size(); ++a) {
      for (std::size_t v = 0; v < variants.size(); ++v) cells.push_back({m, a, v});
    }
  }
  for (const auto& v : variants) v.validate();
  std::vector<RunRecord> records(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      try {
        RunRecord r = run_one(maps[c.map].map, maps[c.map].assignments[c.assignment], variants[c.variant],
                              run_seed(options.master_seed, c.map, c.assignment, c.variant));
        r.map_id = maps[c.map].id;
        r.assignment_id = c.assignment;
        if (!options.keep_plans) r.plan.reset();
        records[i] = std::move(r);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(cells.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return records;
}

struct MapInfo {
  std::string grid;
  std::size_t edge_count = 0;
};

struct AggregateRow {
  std::string grid;
  std::size_t edge_count = 0;
  std::string variant;
  double success_rate = 0.0;
  double median_steps = 0.0;
  double median_iterations = 0.0;
  double median_runtime_ms = 0.0;

  friend bool operator==(const AggregateRow&, const AggregateRow&) = default;
};

inline double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty group");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

// Failed runs in a group take twice the worst successful value, or the
// all-failed constant when nothing in the group succeeded.
inline void substitute_failures(std::vector<RunRecord>& group) {
  if (group.empty()) throw std::invalid_argument("substitute_failures: empty group");
  double worst_steps = -1.0, worst_cost = -1.0;
  for (const auto& r : group) {
    if (!r.success) continue;
    worst_steps = std::max(worst_steps, r.steps);
    worst_cost = std::max(worst_cost, r.sum_of_costs);
  }
  const bool any = worst_steps >= 0.0;
  for (auto& r : group) {
    if (r.success) continue;
    r.steps = any ? 2.0 * worst_steps : kAllFailedValue;
    r.sum_of_costs = any ? 2.0 * worst_cost : kAllFailedValue;
  }
}

inline AggregateRow aggregate_group(std::vector<RunRecord> group, const MapInfo& info) {
  if (group.empty()) throw std::invalid_argument("aggregate: empty group");
  substitute_failures(group);
  AggregateRow row{info.grid, info.edge_count, group.front().variant};
  std::vector<double> steps, iterations, runtime;
  std::size_t successes = 0;
  for (const auto& r : group) {
    successes += r.success ? 1 : 0;
    steps.push_back(r.steps);
    iterations.push_back(r.iterations);
    runtime.push_back(r.runtime_ms);
  }
  row.success_rate = static_cast<double>(successes) / static_cast<double>(group.size());
  row.median_steps = median(std::move(steps));
  row.median_iterations = median(std::move(iterations));
  row.median_runtime_ms = median(std::move(runtime));
  return row;
}

// Groups by (grid, edge_count, variant) in order of first appearance.
inline std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records,
                                           const std::map<std::string, MapInfo>& maps) {
  using Key = std::tuple<std::string, std::size_t, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<RunRecord>> groups;
  std::map<Key, MapInfo> infos;
  for (const auto& r : records) {
    auto it = maps.find(r.map_id);
    if (it == maps.end()) throw std::invalid_argument("aggregate: no map info for " + r.map_id);
    Key key{it->second.grid, it->second.edge_count, r.variant};
    auto [slot, inserted] = groups.try_emplace(key);
    if (inserted) {
      order.push_back(key);
      infos.emplace(key, it->second);
    }
    slot->second.push_back(r);
  }
  std::vector<AggregateRow> rows;
  for (const auto& key : order) rows.push_back(aggregate_group(std::move(groups[key]), infos[key]));
  return rows;
}

inline std::map<std::string, MapInfo> map_infos(const std::vector<MapEntry>& maps) {
  std::map<std::string, MapInfo> out;
  for (const auto& m : maps) out.emplace(m.id, MapInfo{m.grid, m.edge_count});
  return out;
}

// ---- CSV -------------------------------------------------------------------

inline constexpr const char* kRunsHeader =
    "map_id,assignment_id,variant,success,steps,sum_of_costs,iterations,runtime_ms,seed";
inline constexpr const char* kAggregateHeader =
    "grid,edge_count,variant,success_rate,median_steps,median_iterations,median_runtime_ms";

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::vector<std::vector<std::string>> parse_table(const std::string& text, const std::string& header) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != header) throw std::invalid_argument("csv: unexpected header");
  const std::size_t columns = split_row(header).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_row(line);
    if (cells.size() != columns) throw std::invalid_argument("csv: wrong column count in row: " + line);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace detail

inline std::string runs_to_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << kRunsHeader << '\n';
  for (const auto& r : records) {
    out << r.map_id << ',' << r.assignment_id << ',' << r.variant << ',' << (r.success ? 1 : 0) << ','
        << format_number(r.steps) << ',' << format_number(r.sum_of_costs) << ',' << format_number(r.iterations)
        << ',' << format_number(r.runtime_ms) << ',' << r.seed << '\n';
  }
  return out.str();
}

inline std::vector<RunRecord> runs_from_csv(const std::string& text) {
  std::vector<RunRecord> out;
  for (const auto& c : detail::parse_table(text, kRunsHeader)) {
    RunRecord r;
    r.map_id = c[0];
    r.assignment_id = std::stoull(c[1]);
    r.variant = c[2];
    r.success = c[3] == "1";
    r.steps = std::stod(c[4]);
    r.sum_of_costs = std::stod(c[5]);
    r.iterations = std::stod(c[6]);
    r.runtime_ms = std::stod(c[7]);
    r.seed = std::stoull(c[8]);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string aggregate_to_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  out << kAggregateHeader << '\n';
  for (const auto& r : rows) {
    out << r.grid << ',' << r.edge_count << ',' << r.variant << ',' << format_number(r.success_rate) << ','
        << format_number(r.median_steps) << ',' << format_number(r.median_iterations) << ','
        << format_number(r.median_runtime_ms) << '\n';
  }
  return out.str();
}

inline std::vector<AggregateRow> aggregate_from_csv(const std::string& text) {
  std::vector<AggregateRow> out;
  for (const auto& c : detail::parse_table(text, kAggregateHeader)) {
    out.push_back({c[0], std::stoull(c[1]), c[2], std::stod(c[3]), std::stod(c[4]), std::stod(c[5]),
                   std::stod(c[6])});
  }
  return out;
}

// ---- experiments -------------------------------------------------------------

struct ExperimentResult {
  std::vector<MapEntry> maps;
  std::vector<RunRecord> records;
  std::vector<AggregateRow> rows;
};

struct DensityConfig {
  std::vector<int> sides{20, 30, 40};
  int connectivity = 8;
  int step_count = 9;
  std::size_t agents = 20;
  std::size_t assignments = 100;
  std::vector<VariantSpec> variants;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  bool keep_plans = false;
};

// One sweep per grid side; every map of a sweep shares that grid's assignments.
inline std::vector<MapEntry> density_maps(const DensityConfig& config) {
  std::vector<MapEntry> maps;
  std::mt19937_64 rng(config.seed);
  for (int side : config.sides) {
    const auto full = mapgen::grid({side, config.connectivity, 1.0});
    const auto tree = mapgen::mst_base(full, rng);
    const auto sweep = mapgen::density_sweep(full, tree, config.step_count, rng);
    std::vector<Assignment> assignments;
    for (std::size_t a = 0; a < config.assignments; ++a) {
      assignments.push_back(mapgen::random_assignment(full, config.agents, rng));
    }
    const std::string grid = std::to_string(side) + "x" + std::to_string(side);
    for (std::size_t j = 0; j < sweep.size(); ++j) {
      maps.push_back({grid + "-m" + std::to_string(j), grid, sweep[j].edge_count(), sweep[j], assignments});
    }
  }
  return maps;
}

inline ExperimentResult experiment_density(const DensityConfig& config) {
  ExperimentResult out;
  out.maps = density_maps(config);
  out.records = run_matrix(out.maps, config.variants, {config.seed, config.workers, config.keep_plans});
  out.rows = aggregate(out.records, map_infos(out.maps));
  return out;
}

struct AdversarialConfig {
  std::vector<std::size_t> agent_counts{4, 8, 12, 16};
  std::size_t instances = 25;
  std::vector<VariantSpec> variants;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  bool keep_plans = false;
};

inline std::vector<MapEntry> adversarial_maps(const AdversarialConfig& config) {
  std::vector<MapEntry> maps;
  for (std::size_t k : config.agent_counts) {
    for (std::size_t i = 0; i < config.instances; ++i) {
      auto inst = mapgen::adversarial({k, mix_seed(config.seed ^ mix_seed(k * 1000003ULL + i))});
      const std::string grid = "adv-k" + std::to_string(k);
      maps.push_back({grid + "-i" + std::to_string(i), grid, 0, std::move(inst.map), {std::move(inst.assignment)}});
    }
  }
  return maps;
}

inline ExperimentResult experiment_adversarial(const AdversarialConfig& config) {
  for (std::size_t k : config.agent_counts) {
    if (k < 2 || k % 2 != 0) throw std::invalid_argument("adversarial agent counts must be even and >= 2");
  }
  ExperimentResult out;
  out.maps = adversarial_maps(config);
  out.records = run_matrix(out.maps, config.variants, {config.seed, config.workers, config.keep_plans});
  out.rows = aggregate(out.records, map_infos(out.maps));
  return out;
}

// Experiment config files mirror the variant fields plus the matrix shape.
inline mrdrrt::PlannerParams params_from_json(const nlohmann::json& j) {
  mrdrrt::PlannerParams p;
  p.nn_count = j.value("nn", p.nn_count);
  p.delta = j.value("delta", p.delta);
  p.max_iterations = j.value("max_iterations", p.max_iterations);
  p.connector_orderings = j.value("connector_orderings", p.connector_orderings);
  return p;
}

inline std::vector<VariantSpec> variants_from_json(const nlohmann::json& j, const std::vector<std::string>& fallback) {
  const auto params = params_from_json(j);
  std::vector<VariantSpec> out;
  for (const auto& name : j.value("variants", fallback)) out.push_back(VariantSpec::parse(name, params));
  return out;
}

inline const std::vector<std::string>& default_variant_names() {
  static const std::vector<std::string> names{"carp-1",         "carp-10",    "carp-100",   "carp-1000",
                                              "mrdrrt-exp-rew", "mrdrrt-exp", "mrdrrt-rew", "mrdrrt-base"};
  return names;
}

inline DensityConfig density_config_from_json(const nlohmann::json& j) {
  DensityConfig c;
  c.sides = j.value("sides", c.sides);
  c.connectivity = j.value("connectivity", c.connectivity);
  c.step_count = j.value("steps", c.step_count);
  c.agents = j.value("agents", c.agents);
  c.assignments = j.value("assignments", c.assignments);
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
  c.variants = variants_from_json(j, default_variant_names());
  return c;
}

inline AdversarialConfig adversarial_config_from_json(const nlohmann::json& j) {
  AdversarialConfig c;
  c.agent_counts = j.value("agent_counts", c.agent_counts);
  c.instances = j.value("instances", c.instances);
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
  c.variants = variants_from_json(
      j, {"mrdrrt-exp-rew", "mrdrrt-exp", "mrdrrt-rew", "mrdrrt-base", "carp-1000"});
  return c;
}

}  // namespace mapf::bench
