#pragma once

// Command-line front end. dispatch() is the whole program; main() only
// forwards argv so tests can drive every subcommand in-process.
//
// Exit codes: 0 success, 1 planning failure or invalid plan, 2 usage error,
// 3 file error (unreadable, malformed, or refusing to overwrite).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mapf/bench.hpp"
#include "mapf/carp.hpp"
#include "mapf/io.hpp"
#include "mapf/mapgen.hpp"
#include "mapf/mrdrrt.hpp"
#include "mapf/validate.hpp"

namespace mapf::cli {

enum ExitCode : int { kOk = 0, kPlanningFailure = 1, kUsage = 2, kFileError = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kWorkersEnv = "MAPF_WORKERS";

inline unsigned default_workers() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::logic_error&) {
    }
  }
  return 1;
}

namespace detail {

struct Output {
  bool force = false;

  void check(const std::string& path) const {
    if (!force && std::filesystem::exists(path)) {
      throw io::FileError(path + " exists; pass --force to overwrite");
    }
  }
  void write(const std::string& path, const std::string& contents) const {
    check(path);
    io::write_file(path, contents);
  }
};

inline std::string dump(const nlohmann::json& j) { return j.dump(1) + "\n"; }

}  // namespace detail

inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Multi-agent path finding on roadmaps: generators, planners, validator, experiments", "mapf_cli"};
  app.require_subcommand(1);
  detail::Output output;
  std::uint64_t seed = 1;

  // gen-grid
  auto* gen_grid = app.add_subcommand("gen-grid", "Write a full grid roadmap");
  mapgen::GridSpec grid_spec;
  std::string grid_out;
  gen_grid->add_option("--side", grid_spec.side, "Vertices per side")->required();
  gen_grid->add_option("--connectivity", grid_spec.connectivity, "4 or 8")->check(CLI::IsMember({4, 8}));
  gen_grid->add_option("--spacing", grid_spec.spacing, "Distance between neighboring lattice points");
  gen_grid->add_option("--out", grid_out, "Map file")->required();
  gen_grid->add_flag("--force", output.force, "Overwrite existing files");

  // gen-sweep
  auto* gen_sweep = app.add_subcommand("gen-sweep", "Write a spanning tree and its densified variants");
  mapgen::GridSpec sweep_spec;
  int sweep_steps = 9;
  std::string sweep_dir;
  gen_sweep->add_option("--side", sweep_spec.side)->required();
  gen_sweep->add_option("--connectivity", sweep_spec.connectivity)->check(CLI::IsMember({4, 8}));
  gen_sweep->add_option("--steps", sweep_steps, "Maps added after the spanning tree");
  gen_sweep->add_option("--seed", seed);
  gen_sweep->add_option("--out-dir", sweep_dir, "Directory receiving map_<j>.json")->required();
  gen_sweep->add_flag("--force", output.force);

  // gen-adversarial
  auto* gen_adv = app.add_subcommand("gen-adversarial", "Write a tree map whose agents defeat prioritized planning");
  std::size_t adv_agents = 2;
  std::string adv_map_out, adv_scenario_out;
  gen_adv->add_option("--agents", adv_agents, "Even number of agents")->required();
  gen_adv->add_option("--seed", seed);
  gen_adv->add_option("--map-out", adv_map_out)->required();
  gen_adv->add_option("--scenario-out", adv_scenario_out)->required();
  gen_adv->add_flag("--force", output.force);

  // gen-assignment
  auto* gen_assign = app.add_subcommand("gen-assignment", "Write a random scenario for a map");
  std::string assign_map, assign_out;
  std::size_t assign_agents = 1;
  gen_assign->add_option("--map", assign_map)->required();
  gen_assign->add_option("--agents", assign_agents)->required();
  gen_assign->add_option("--seed", seed);
  gen_assign->add_option("--out", assign_out)->required();
  gen_assign->add_flag("--force", output.force);

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "Plan a scenario with CARP or MRdRRT");
  std::string algo, plan_map, plan_scenario, plan_out, stats_out;
  int shuffles = 1;
  mrdrrt::PlannerParams planner_params;
  bool no_rewire = false, no_improved = false, to_stdout = false;
  plan_cmd->add_option("--algo", algo)->required()->check(CLI::IsMember({"carp", "mrdrrt"}));
  plan_cmd->add_option("--map", plan_map)->required();
  plan_cmd->add_option("--scenario", plan_scenario)->required();
  plan_cmd->add_option("--seed", seed);
  plan_cmd->add_option("--shuffles", shuffles, "CARP: maximum orderings tried")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--nn", planner_params.nn_count, "MRdRRT: nearest neighbours")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--delta", planner_params.delta, "MRdRRT: sampling slack")->check(CLI::NonNegativeNumber);
  plan_cmd->add_option("--max-iter", planner_params.max_iterations)->check(CLI::PositiveNumber);
  plan_cmd->add_option("--orderings", planner_params.connector_orderings, "MRdRRT: connector orderings per call")
      ->check(CLI::PositiveNumber);
  plan_cmd->add_flag("--no-rewire", no_rewire);
  plan_cmd->add_flag("--no-improved-expansion", no_improved);
  plan_cmd->add_option("--out", plan_out, "Plan CSV")->required();
  plan_cmd->add_option("--stats", stats_out, "Stats JSON (default: <out>.stats.json)");
  plan_cmd->add_flag("--stdout", to_stdout, "Also print the plan to stdout");
  plan_cmd->add_flag("--force", output.force);

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check a plan against a map and scenario");
  std::string val_map, val_scenario, val_plan;
  validate_cmd->add_option("--map", val_map)->required();
  validate_cmd->add_option("--scenario", val_scenario)->required();
  validate_cmd->add_option("--plan", val_plan)->required();

  // bench-density / bench-adversarial share output and matrix flags.
  struct BenchFlags {
    std::string config, runs_out, aggregate_out;
    std::vector<std::string> variants;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::size_t> max_iterations;
  };
  BenchFlags bd, ba;
  auto add_bench_flags = [&](CLI::App* cmd, BenchFlags& f) {
    cmd->add_option("--config", f.config, "Experiment config JSON");
    cmd->add_option("--variants", f.variants, "carp-{1,10,100,1000}, mrdrrt-{exp-rew,exp,rew,base}")
        ->delimiter(',');
    cmd->add_option("--seed", f.seed);
    cmd->add_option("--workers", f.workers, std::string("Parallel runs (default: $") + kWorkersEnv + " or 1)");
    cmd->add_option("--max-iter", f.max_iterations, "MRdRRT iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--runs-out", f.runs_out, "Raw run CSV")->required();
    cmd->add_option("--aggregate-out", f.aggregate_out, "Aggregate CSV")->required();
    cmd->add_flag("--force", output.force);
  };

  auto* bench_density = app.add_subcommand("bench-density", "Density-sweep experiment");
  add_bench_flags(bench_density, bd);
  std::vector<int> sides;
  std::optional<std::size_t> density_agents, density_assignments;
  bool full_scale = false;
  bench_density->add_option("--sides", sides, "Grid sides")->delimiter(',');
  bench_density->add_option("--agents", density_agents);
  bench_density->add_option("--assignments", density_assignments);
  bench_density->add_flag("--full-scale", full_scale, "100 agents and 100 assignments per grid");

  auto* bench_adv = app.add_subcommand("bench-adversarial", "Adversarial-instance experiment");
  add_bench_flags(bench_adv, ba);
  std::vector<std::size_t> agent_counts;
  std::optional<std::size_t> instances;
  bench_adv->add_option("--agent-counts", agent_counts)->delimiter(',');
  bench_adv->add_option("--instances", instances, "Instances per agent count");

  std::vector<const char*> argv{"mapf_cli"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kUsage;
  }

  auto load_json = [](const std::string& path) { return io::parse_json(io::read_file(path), path); };

  try {
    if (*gen_grid) {
      output.write(grid_out, detail::dump(io::map_to_json(mapgen::grid(grid_spec))));
      return kOk;
    }

    if (*gen_sweep) {
      std::mt19937_64 rng(seed);
      const auto full = mapgen::grid(sweep_spec);
      const auto tree = mapgen::mst_base(full, rng);
      const auto sweep = mapgen::density_sweep(full, tree, sweep_steps, rng);
      std::filesystem::create_directories(sweep_dir);
      std::vector<std::string> paths;
      for (std::size_t j = 0; j < sweep.size(); ++j) {
        paths.push_back((std::filesystem::path(sweep_dir) / ("map_" + std::to_string(j) + ".json")).string());
        output.check(paths.back());
      }
      for (std::size_t j = 0; j < sweep.size(); ++j) output.write(paths[j], detail::dump(io::map_to_json(sweep[j])));
      return kOk;
    }

    if (*gen_adv) {
      auto inst = mapgen::adversarial({adv_agents, seed});
      output.check(adv_map_out);
      output.check(adv_scenario_out);
      output.write(adv_map_out, detail::dump(io::map_to_json(inst.map)));
      output.write(adv_scenario_out, detail::dump(io::scenario_to_json(inst.assignment)));
      return kOk;
    }

    if (*gen_assign) {
      const auto map = io::load_map(assign_map);
      std::mt19937_64 rng(seed);
      output.write(assign_out, detail::dump(io::scenario_to_json(mapgen::random_assignment(map, assign_agents, rng))));
      return kOk;
    }

    if (*plan_cmd) {
      const auto map = io::load_map(plan_map);
      const auto assignment = io::load_scenario(plan_scenario);
      try {
        assignment.validate(map);
      } catch (const std::invalid_argument& e) {
        throw io::FormatError(plan_scenario + ": " + e.what());
      }
      if (stats_out.empty()) stats_out = plan_out + ".stats.json";
      output.check(plan_out);
      output.check(stats_out);

      std::optional<Plan> plan;
      nlohmann::json stats{{"algo", algo}, {"seed", seed}};
      if (algo == "carp") {
        const auto started = std::chrono::steady_clock::now();
        auto result = carp::plan_all(assignment, map, {shuffles, 0, seed});
        stats["runtime_ms"] =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        stats["shuffles_used"] = result.shuffles_used;
        stats["iterations"] = result.success() ? result.shuffles_used : shuffles;
        plan = std::move(result.plan);
      } else {
        planner_params.seed = seed;
        planner_params.rewiring = !no_rewire;
        planner_params.improved_expansion = !no_improved;
        try {
          auto result = mrdrrt::plan(assignment, map, planner_params);
          stats["iterations"] = result.stats.iterations;
          stats["runtime_ms"] = result.stats.runtime_ms;
          stats["tree_size"] = result.stats.tree_size;
          plan = std::move(result.plan);
        } catch (const mrdrrt::InfeasibleInstance& e) {
          err << "infeasible instance: " << e.what() << "\n";
          stats["iterations"] = 0;
          stats["runtime_ms"] = 0.0;
          stats["tree_size"] = 0;
        }
      }
      stats["success"] = plan.has_value();
      if (plan) {
        stats["plan_steps"] = plan->makespan();
        stats["sum_of_costs"] = plan->sum_of_costs(map);
        output.write(plan_out, io::plan_to_csv(*plan));
        if (to_stdout) out << io::plan_to_csv(*plan);
      }
      output.write(stats_out, detail::dump(stats));
      if (!plan) {
        err << algo << ": no plan found\n";
        return kPlanningFailure;
      }
      return kOk;
    }

    if (*validate_cmd) {
      const auto map = io::load_map(val_map);
      const auto assignment = io::load_scenario(val_scenario);
      const auto plan = io::load_plan(val_plan);
      if (auto v = validate_plan(plan, assignment, map)) {
        err << "invalid plan: " << v->describe() << "\n";
        return kPlanningFailure;
      }
      return kOk;
    }

    auto finish_bench = [&](const BenchFlags& f, const bench::ExperimentResult& result) {
      output.write(f.runs_out, bench::runs_to_csv(result.records));
      output.write(f.aggregate_out, bench::aggregate_to_csv(result.rows));
      return kOk;
    };
    auto apply_common = [&](const BenchFlags& f, auto& config) {
      if (f.seed) config.seed = *f.seed;
      if (f.workers) {
        config.workers = *f.workers;
      } else if (f.config.empty() || std::getenv(kWorkersEnv)) {
        config.workers = default_workers();
      }
      if (config.workers == 0) throw UsageError("--workers must be positive");
      mrdrrt::PlannerParams base;
      if (f.max_iterations) base.max_iterations = *f.max_iterations;
      if (!f.variants.empty()) {
        config.variants.clear();
        for (const auto& name : f.variants) config.variants.push_back(bench::VariantSpec::parse(name, base));
      } else if (f.max_iterations) {
        for (auto& v : config.variants) v.params.max_iterations = *f.max_iterations;
      }
      output.check(f.runs_out);
      output.check(f.aggregate_out);
    };

    if (*bench_density) {
      bench::DensityConfig config = bd.config.empty() ? bench::density_config_from_json(nlohmann::json::object())
                                                      : bench::density_config_from_json(load_json(bd.config));
      if (full_scale) config.agents = 100, config.assignments = 100;
      if (!sides.empty()) config.sides = sides;
      if (density_agents) config.agents = *density_agents;
      if (density_assignments) config.assignments = *density_assignments;
      apply_common(bd, config);
      return finish_bench(bd, bench::experiment_density(config));
    }

    if (*bench_adv) {
      bench::AdversarialConfig config = ba.config.empty()
                                            ? bench::adversarial_config_from_json(nlohmann::json::object())
                                            : bench::adversarial_config_from_json(load_json(ba.config));
      if (!agent_counts.empty()) config.agent_counts = agent_counts;
      if (instances) config.instances = *instances;
      apply_common(ba, config);
      return finish_bench(ba, bench::experiment_adversarial(config));
    }
  } catch (const io::FileError& e) {
    err << "file error: " << e.what() << "\n";
    return kFileError;
  } catch (const io::FormatError& e) {
    err << "file error: " << e.what() << "\n";
    return kFileError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "file error: " << e.what() << "\n";
    return kFileError;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "file error: " << e.what() << "\n";
    return kFileError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

inline int dispatch(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return dispatch(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace mapf::cli
