#pragma once

// Multi-robot discrete RRT over the implicit composite configuration space,
// with restricted sampling, a collision-aware oracle, best-predecessor
// expansion, rewiring, and a prioritized planner as local connector.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mapf/carp.hpp"
#include "mapf/roadmap.hpp"
#include "mapf/validate.hpp"

namespace mapf::mrdrrt {

class InfeasibleInstance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PlannerParams {
  std::size_t nn_count = 5;
  double delta = 4.0;
  std::size_t max_iterations = 500000;
  int connector_orderings = 1;
  bool improved_expansion = true;  // off: extend from the single nearest node only
  bool rewiring = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (nn_count < 1) throw std::invalid_argument("nn_count must be positive");
    if (!(delta >= 0.0)) throw std::invalid_argument("delta must be non-negative");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
    if (connector_orderings < 1) throw std::invalid_argument("connector_orderings must be positive");
  }
};

// Per-agent vertices q with dist(s, q) + dist(q, t) <= dist(s, t) + delta.
class SampleSpace {
 public:
  SampleSpace() = default;

  SampleSpace(const Assignment& assignment, const Roadmap& map, double delta) {
    assignment.validate(map);
    const std::size_t k = assignment.agent_count();
    from_start_.reserve(k);
    to_goal_.reserve(k);
    admissible_.resize(k);
    member_.assign(k, std::vector<bool>(map.vertex_count(), false));
    for (std::size_t i = 0; i < k; ++i) {
      from_start_.push_back(dijkstra_distances(assignment.starts[i], map));
      to_goal_.push_back(dijkstra_distances(assignment.goals[i], map));
      const double shortest = from_start_[i][assignment.goals[i]];
      if (shortest == kInfinity) {
        throw InfeasibleInstance("agent " + std::to_string(i) + " cannot reach its goal");
      }
      const double bound = shortest + delta + 1e-9 * (1.0 + shortest);
      for (VertexId q = 0; q < static_cast<VertexId>(map.vertex_count()); ++q) {
        const double through = from_start_[i][q] + to_goal_[i][q];
        if (through < kInfinity && through <= bound) {
          admissible_[i].push_back(q);
          member_[i][q] = true;
        }
      }
    }
  }

  std::size_t agent_count() const { return admissible_.size(); }
  std::span<const VertexId> admissible(AgentId agent) const { return admissible_.at(agent); }
  bool is_admissible(AgentId agent, VertexId v) const { return member_.at(agent).at(v); }
  const std::vector<double>& distances_from_start(AgentId agent) const { return from_start_.at(agent); }
  const std::vector<double>& distances_to_goal(AgentId agent) const { return to_goal_.at(agent); }

 private:
  std::vector<std::vector<double>> from_start_;
  std::vector<std::vector<double>> to_goal_;
  std::vector<std::vector<VertexId>> admissible_;
  std::vector<std::vector<bool>> member_;
};

inline SampleSpace build_sample_space(const Assignment& assignment, const Roadmap& map, double delta) {
  return SampleSpace(assignment, map, delta);
}

// One uniformly drawn admissible vertex per agent; entries may coincide.
template <class Rng>
Configuration random_sample(const SampleSpace& space, Rng& rng) {
  Configuration u;
  u.positions.reserve(space.agent_count());
  for (AgentId i = 0; i < space.agent_count(); ++i) {
    auto set = space.admissible(i);
    std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);
    u.positions.push_back(set[pick(rng)]);
  }
  return u;
}

// Angle at `from` between the ray towards `target` and the ray towards
// `option`. Staying scores 0 when already on the target and a right angle
// otherwise; moving off a reached target scores pi.
inline double steering_angle(VertexId from, VertexId target, VertexId option, const Roadmap& map) {
  const Point& p = map.position(from);
  const Point& t = map.position(target);
  const Point& o = map.position(option);
  const double tx = t.x - p.x, ty = t.y - p.y;
  const bool at_target = tx == 0.0 && ty == 0.0;
  if (option == from) return at_target ? 0.0 : std::numbers::pi / 2.0;
  if (at_target) return std::numbers::pi;
  const double ox = o.x - p.x, oy = o.y - p.y;
  const double cosine = (tx * ox + ty * oy) / (std::hypot(tx, ty) * std::hypot(ox, oy));
  return std::acos(std::clamp(cosine, -1.0, 1.0));
}

// Collision-aware oracle with an explicit agent processing order. Each agent
// takes its best-aligned option (stay or a neighbor) that does not land on a
// vertex claimed by an earlier agent or swap with an earlier agent's move.
// With a sample space, options are limited to the agent's admissible set.
inline std::optional<Configuration> oracle_extend_ordered(const Configuration& from, const Configuration& toward,
                                                          const Roadmap& map, std::span<const AgentId> order,
                                                          const SampleSpace* space = nullptr) {
  const std::size_t k = from.size();
  if (toward.size() != k || order.size() != k) throw std::invalid_argument("oracle_extend: agent count mismatch");
  constexpr VertexId kUnset = -1;
  Configuration next(std::vector<VertexId>(k, kUnset));
  std::unordered_map<VertexId, AgentId> occupant;
  std::unordered_map<VertexId, AgentId> claimed;
  occupant.reserve(k);
  claimed.reserve(k);
  for (AgentId i = 0; i < k; ++i) occupant.emplace(from[i], i);

  for (AgentId i : order) {
    const VertexId here = from[i];
    VertexId best = kUnset;
    double best_angle = 0.0, best_step = 0.0;
    auto consider = [&](VertexId option) {
      if (space && option != here && !space->is_admissible(i, option)) return;
      if (claimed.contains(option)) return;
      if (option != here) {
        auto it = occupant.find(option);
        if (it != occupant.end() && next[it->second] == here) return;  // swap with an earlier agent
      }
      const double angle = steering_angle(here, toward[i], option, map);
      const double step = option == here ? 0.0 : euclidean_distance(here, option, map);
      constexpr double eps = 1e-12;
      bool better = best == kUnset || angle < best_angle - eps;
      if (!better && std::abs(angle - best_angle) <= eps) {
        better = step < best_step - eps || (std::abs(step - best_step) <= eps && option < best);
      }
      if (better) {
        best = option;
        best_angle = angle;
        best_step = step;
      }
    };
    consider(here);
    for (VertexId w : map.neighbors(here)) consider(w);
    if (best == kUnset) return std::nullopt;
    next[i] = best;
    claimed.emplace(best, i);
  }
  if (validate_move(from, next, map)) return std::nullopt;
  return next;
}

template <class Rng>
std::optional<Configuration> oracle_extend(const Configuration& from, const Configuration& toward,
                                           const Roadmap& map, Rng& rng, const SampleSpace* space = nullptr) {
  std::vector<AgentId> order(from.size());
  std::iota(order.begin(), order.end(), AgentId{0});
  std::shuffle(order.begin(), order.end(), rng);
  return oracle_extend_ordered(from, toward, map, order, space);
}

// Composite moves after `from` up to and including `to`; empty when from == to.
using CompositePath = std::vector<Configuration>;

inline double path_length(const Configuration& from, const CompositePath& path, const Roadmap& map) {
  double sum = 0.0;
  const Configuration* prev = &from;
  for (const auto& c : path) {
    sum += composite_distance(*prev, c, map);
    prev = &c;
  }
  return sum;
}

// Runs the prioritized planner between two configurations with a bounded
// number of random orderings. May fail even when a connection exists.
template <class Rng>
std::optional<CompositePath> local_connector(const Configuration& from, const Configuration& to, const Roadmap& map,
                                             int orderings, Rng& rng, carp::HopDistanceCache* cache = nullptr) {
  if (from.size() != to.size()) throw std::invalid_argument("local_connector: agent count mismatch");
  if (from == to) return CompositePath{};
  Assignment sub{from.positions, to.positions};
  std::vector<AgentId> order(from.size());
  std::iota(order.begin(), order.end(), AgentId{0});
  std::shuffle(order.begin(), order.end(), rng);
  auto result = carp::plan_with_orderings(sub, map, std::move(order), orderings, 0, rng, cache);
  if (!result.plan) return std::nullopt;
  auto& steps = result.plan->steps;
  return CompositePath(std::make_move_iterator(steps.begin() + 1), std::make_move_iterator(steps.end()));
}

// Tree over configurations. Each non-root node stores the composite path from
// its predecessor (ending at the node itself) and its cost from the root.
class SearchTree {
 public:
  static constexpr std::int64_t kNoParent = -1;

  struct Node {
    Configuration config;
    std::int64_t parent = kNoParent;
    double cost = 0.0;
    double segment_length = 0.0;
    CompositePath segment;
    std::vector<std::size_t> children;
  };

  SearchTree(Configuration root, const Roadmap& map) : map_(&map) {
    index_.emplace(root, 0);
    Node node;
    node.config = std::move(root);
    nodes_.push_back(std::move(node));
  }

  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::size_t i) const { return nodes_.at(i); }
  const Roadmap& map() const { return *map_; }

  std::optional<std::size_t> find(const Configuration& c) const {
    auto it = index_.find(c);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t add(std::size_t parent, CompositePath segment) {
    if (segment.empty()) throw std::invalid_argument("SearchTree::add: empty segment");
    if (index_.contains(segment.back())) throw std::invalid_argument("SearchTree::add: duplicate configuration");
    Node n;
    n.config = segment.back();
    n.parent = static_cast<std::int64_t>(parent);
    n.segment_length = path_length(nodes_.at(parent).config, segment, *map_);
    n.cost = nodes_[parent].cost + n.segment_length;
    n.segment = std::move(segment);
    const std::size_t id = nodes_.size();
    index_.emplace(n.config, id);
    nodes_.push_back(std::move(n));
    nodes_[parent].children.push_back(id);
    return id;
  }

  bool is_ancestor(std::size_t ancestor, std::size_t of) const {
    for (std::int64_t i = static_cast<std::int64_t>(of); i != kNoParent; i = nodes_[i].parent) {
      if (static_cast<std::size_t>(i) == ancestor) return true;
    }
    return false;
  }

  // Attaches `node` under `parent` via `segment` and refreshes subtree costs.
  void reparent(std::size_t node, std::size_t parent, CompositePath segment) {
    if (node == 0) throw std::invalid_argument("SearchTree::reparent: cannot move the root");
    if (is_ancestor(node, parent)) throw std::invalid_argument("SearchTree::reparent: would create a cycle");
    if (segment.empty() || segment.back() != nodes_.at(node).config) {
      throw std::invalid_argument("SearchTree::reparent: segment must end at the node");
    }
    Node& n = nodes_[node];
    auto& siblings = nodes_[n.parent].children;
    siblings.erase(std::find(siblings.begin(), siblings.end(), node));
    n.parent = static_cast<std::int64_t>(parent);
    n.segment_length = path_length(nodes_[parent].config, segment, *map_);
    n.segment = std::move(segment);
    nodes_[parent].children.push_back(node);
    refresh_costs(node);
  }

  // The `count` nodes closest to `target` under composite distance, ties by
  // insertion order, skipping nodes rejected by `skip`.
  template <class Skip>
  std::vector<std::size_t> nearest(const Configuration& target, std::size_t count, Skip&& skip) const {
    std::vector<std::pair<double, std::size_t>> best;
    best.reserve(count + 1);
    const std::size_t k = target.size();
    std::vector<Point> target_points(k);
    for (std::size_t a = 0; a < k; ++a) target_points[a] = map_->position(target[a]);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (skip(i)) continue;
      const double worst = best.size() == count ? best.back().first : kInfinity;
      double d = 0.0;
      const auto& c = nodes_[i].config;
      for (std::size_t a = 0; a < k && d <= worst; ++a) d += euclidean_distance(map_->position(c[a]), target_points[a]);
      if (best.size() == count && !(d < worst)) continue;
      auto pos = std::upper_bound(best.begin(), best.end(), std::make_pair(d, i));
      best.insert(pos, {d, i});
      if (best.size() > count) best.pop_back();
    }
    std::vector<std::size_t> out;
    out.reserve(best.size());
    for (auto& [d, i] : best) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> nearest(const Configuration& target, std::size_t count) const {
    return nearest(target, count, [](std::size_t) { return false; });
  }

  // Root configuration followed by every configuration on the way to `node`.
  std::vector<Configuration> path_to(std::size_t node) const {
    std::vector<const Node*> chain;
    for (std::int64_t i = static_cast<std::int64_t>(node); i != kNoParent; i = nodes_[i].parent) {
      chain.push_back(&nodes_[i]);
    }
    std::vector<Configuration> out{chain.back()->config};
    for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it) {
      out.insert(out.end(), (*it)->segment.begin(), (*it)->segment.end());
    }
    return out;
  }

  // Full structural check; returns a description of the first problem found.
  std::optional<std::string> audit() const {
    if (nodes_.empty() || nodes_[0].parent != kNoParent || nodes_[0].cost != 0.0) return "bad root";
    std::size_t edges = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      edges += n.children.size();
      for (std::size_t c : n.children) {
        if (c >= nodes_.size() || nodes_[c].parent != static_cast<std::int64_t>(i)) {
          return "child list of node " + std::to_string(i) + " disagrees with parent links";
        }
      }
      if (i == 0) continue;
      if (n.parent < 0 || static_cast<std::size_t>(n.parent) >= nodes_.size()) {
        return "node " + std::to_string(i) + " has no valid parent";
      }
      if (n.segment.empty() || n.segment.back() != n.config) return "segment of node " + std::to_string(i);
      const Configuration* prev = &nodes_[n.parent].config;
      double len = 0.0;
      for (const auto& c : n.segment) {
        if (validate_move(*prev, c, *map_)) return "invalid move in segment of node " + std::to_string(i);
        len += composite_distance(*prev, c, *map_);
        prev = &c;
      }
      const double expected = nodes_[n.parent].cost + len;
      if (std::abs(expected - n.cost) > 1e-9 * (1.0 + expected)) {
        return "cost of node " + std::to_string(i) + " inconsistent with its segment";
      }
    }
    if (edges != nodes_.size() - 1) return "edge count does not match a tree";
    // Every node must reach the root without revisiting.
    std::vector<char> state(nodes_.size(), 0);  // 0 unknown, 1 on stack, 2 reaches root
    state[0] = 2;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      std::vector<std::size_t> stack;
      std::int64_t j = static_cast<std::int64_t>(i);
      while (state[j] == 0) {
        state[j] = 1;
        stack.push_back(static_cast<std::size_t>(j));
        j = nodes_[j].parent;
      }
      if (state[j] == 1) return "cycle through node " + std::to_string(j);
      for (std::size_t s : stack) state[s] = 2;
    }
    return std::nullopt;
  }

 private:
  void refresh_costs(std::size_t root) {
    std::vector<std::size_t> stack{root};
    while (!stack.empty()) {
      std::size_t i = stack.back();
      stack.pop_back();
      Node& n = nodes_[i];
      n.cost = nodes_[n.parent].cost + n.segment_length;
      stack.insert(stack.end(), n.children.begin(), n.children.end());
    }
  }

  const Roadmap* map_;
  std::vector<Node> nodes_;
  std::unordered_map<Configuration, std::size_t, ConfigurationHash> index_;
};

struct PlanStats {
  std::size_t iterations = 0;
  double runtime_ms = 0.0;
  std::size_t tree_size = 0;
  std::size_t plan_steps = 0;
  double sum_of_costs = 0.0;
};

struct PlanResult {
  std::optional<Plan> plan;
  PlanStats stats;
  bool success() const { return plan.has_value(); }
};

// Result of one expansion attempt, exposed for tests.
struct Expansion {
  Configuration sample;
  std::vector<std::size_t> neighbors;
  std::vector<std::optional<Configuration>> candidates;  // per neighbor, nullopt when unusable
  std::optional<std::size_t> added;
};

class Planner {
 public:
  Planner(const Assignment& assignment, const Roadmap& map, PlannerParams params)
      : map_(&map),
        assignment_(assignment),
        params_(params),
        space_(assignment, map, params.delta),
        tree_(assignment.start_configuration(), map),
        goal_(assignment.goal_configuration()),
        rng_(params.seed),
        cache_(map) {
    params_.validate();
  }

  const SearchTree& tree() const { return tree_; }
  const SampleSpace& sample_space() const { return space_; }
  const PlannerParams& params() const { return params_; }

  Expansion expand_detailed() {
    Expansion e;
    e.sample = random_sample(space_, rng_);
    e.neighbors = tree_.nearest(e.sample, params_.improved_expansion ? params_.nn_count : 1);
    double best_cost = kInfinity;
    std::size_t best_index = 0;
    for (std::size_t n = 0; n < e.neighbors.size(); ++n) {
      const auto& origin = tree_.node(e.neighbors[n]);
      auto candidate = oracle_extend(origin.config, e.sample, *map_, rng_, &space_);
      if (candidate && (*candidate == origin.config || tree_.find(*candidate))) candidate.reset();
      if (candidate) {
        const double cost = origin.cost + composite_distance(origin.config, *candidate, *map_);
        if (cost < best_cost) {
          best_cost = cost;
          best_index = n;
        }
      }
      e.candidates.push_back(std::move(candidate));
    }
    if (best_cost < kInfinity) {
      e.added = tree_.add(e.neighbors[best_index], CompositePath{*e.candidates[best_index]});
    }
    return e;
  }

  std::optional<std::size_t> expand() { return expand_detailed().added; }

  // Returns the number of nodes re-parented under `node`.
  std::size_t rewire(std::size_t node) {
    const Configuration origin = tree_.node(node).config;
    auto neighbors = tree_.nearest(origin, params_.nn_count, [&](std::size_t c) { return tree_.is_ancestor(c, node); });
    std::size_t changed = 0;
    for (std::size_t c : neighbors) {
      auto path = local_connector(origin, tree_.node(c).config, *map_, params_.connector_orderings, rng_, &cache_);
      if (!path || path->empty()) continue;
      const double through = tree_.node(node).cost + path_length(origin, *path, *map_);
      if (through < tree_.node(c).cost - 1e-9) {
        tree_.reparent(c, node, std::move(*path));
        ++changed;
      }
    }
    return changed;
  }

  std::optional<CompositePath> connect_to_target(std::size_t node) {
    return local_connector(tree_.node(node).config, goal_, *map_, params_.connector_orderings, rng_, &cache_);
  }

  // One main-loop iteration without the target connection.
  std::optional<std::size_t> grow() {
    auto added = expand();
    if (added && params_.rewiring) rewire(*added);
    return added;
  }

  PlanResult run() {
    const auto started = std::chrono::steady_clock::now();
    PlanResult result;
    auto finish = [&](std::optional<std::size_t> node, std::optional<CompositePath> suffix) {
      if (node) {
        Plan plan;
        plan.steps = tree_.path_to(*node);
        plan.steps.insert(plan.steps.end(), std::make_move_iterator(suffix->begin()),
                          std::make_move_iterator(suffix->end()));
        result.stats.plan_steps = plan.makespan();
        result.stats.sum_of_costs = plan.sum_of_costs(*map_);
        result.plan = std::move(plan);
      }
      result.stats.tree_size = tree_.size();
      result.stats.runtime_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
      return result;
    };

    if (auto suffix = connect_to_target(0)) return finish(0, std::move(suffix));
    for (std::size_t it = 1; it <= params_.max_iterations; ++it) {
      result.stats.iterations = it;
      auto added = grow();
      if (!added) continue;
      if (auto suffix = connect_to_target(*added)) return finish(added, std::move(suffix));
    }
    return finish(std::nullopt, std::nullopt);
  }

 private:
  const Roadmap* map_;
  Assignment assignment_;
  PlannerParams params_;
  SampleSpace space_;
  SearchTree tree_;
  Configuration goal_;
  std::mt19937_64 rng_;
  carp::HopDistanceCache cache_;
};

inline PlanResult plan(const Assignment& assignment, const Roadmap& map, const PlannerParams& params) {
  const auto started = std::chrono::steady_clock::now();
  Planner planner(assignment, map, params);
  PlanResult result = planner.run();
  result.stats.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace mapf::mrdrrt
