// Builds one adversarial instance, shows that every priority ordering fails
// for the decoupled planner, then solves it with the composite planner.

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <numeric>

#include "mapf/carp.hpp"
#include "mapf/mapgen.hpp"
#include "mapf/mrdrrt.hpp"
#include "mapf/validate.hpp"

int main(int argc, char** argv) {
  const std::size_t agents = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 4;
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 7;
  const auto inst = mapf::mapgen::adversarial({agents, seed});
  const auto& map = inst.map;
  const auto& a = inst.assignment;
  std::cout << "tree with " << map.vertex_count() << " vertices, " << a.agent_count() << " agents\n";

  std::vector<mapf::AgentId> order(a.agent_count());
  std::iota(order.begin(), order.end(), mapf::AgentId{0});
  std::size_t tried = 0, solved = 0;
  do {
    ++tried;
    if (mapf::carp::plan_ordered(a, map, order)) ++solved;
  } while (std::next_permutation(order.begin(), order.end()));
  std::cout << "carp: " << solved << " of " << tried << " orderings produce a plan\n";

  mapf::mrdrrt::PlannerParams params;
  params.seed = seed;
  const auto result = mapf::mrdrrt::plan(a, map, params);
  if (!result.plan) {
    std::cout << "mrdrrt: no plan after " << result.stats.iterations << " iterations\n";
    return 1;
  }
  const auto violation = mapf::validate_plan(*result.plan, a, map);
  std::cout << "mrdrrt: " << result.plan->makespan() << " steps, sum of costs " << result.plan->sum_of_costs(map)
            << ", " << result.stats.iterations << " iterations, " << result.stats.runtime_ms << " ms, plan "
            << (violation ? "INVALID: " + violation->describe() : std::string("valid")) << "\n";
  return violation ? 1 : 0;
}
