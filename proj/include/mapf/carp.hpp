#pragma once

// Context-aware route planning: agents are planned one at a time with A* over
// the free time windows left by the agents planned before them.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mapf/roadmap.hpp"

namespace mapf::carp {

using Time = std::int64_t;
inline constexpr Time kForever = std::numeric_limits<Time>::max();

// Half-open interval [begin, end) of integer time.
struct Interval {
  Time begin = 0;
  Time end = kForever;

  bool contains(Time t) const { return begin <= t && t < end; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

class ReservationConflict : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A move from `from` to `to` that leaves at `depart` and arrives at depart + 1.
struct Traversal {
  VertexId from = 0;
  VertexId to = 0;
  Time depart = 0;
  friend bool operator==(const Traversal&, const Traversal&) = default;
};

struct TraversalHash {
  std::size_t operator()(const Traversal& t) const noexcept {
    std::uint64_t h = static_cast<std::uint32_t>(t.from);
    h = h * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint32_t>(t.to);
    h = h * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(t.depart);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

// Per-vertex sorted free intervals plus directional edge traversal records.
class FreeTimeWindowGraph {
 public:
  explicit FreeTimeWindowGraph(std::size_t vertex_count) : windows_(vertex_count, {Interval{0, kForever}}) {}

  std::size_t vertex_count() const { return windows_.size(); }

  std::span<const Interval> free_windows(VertexId v) const { return windows_.at(v); }

  std::optional<std::size_t> window_containing(VertexId v, Time t) const {
    const auto& ws = windows_.at(v);
    auto it = std::upper_bound(ws.begin(), ws.end(), t, [](Time x, const Interval& w) { return x < w.begin; });
    if (it == ws.begin()) return std::nullopt;
    --it;
    if (!it->contains(t)) return std::nullopt;
    return static_cast<std::size_t>(it - ws.begin());
  }

  bool is_free(VertexId v, Interval occupancy) const {
    auto idx = window_containing(v, occupancy.begin);
    return idx && windows_[v][*idx].end >= occupancy.end;
  }

  // True when some reserved agent crosses the same edge head-on during this step.
  bool is_head_on(VertexId from, VertexId to, Time depart) const {
    return traversals_.contains(Traversal{to, from, depart});
  }

  const std::unordered_set<Traversal, TraversalHash>& traversals() const { return traversals_; }

  void reserve_vertex(VertexId v, Interval occupancy) {
    if (occupancy.begin >= occupancy.end) throw std::invalid_argument("reserve_vertex: empty interval");
    auto idx = window_containing(v, occupancy.begin);
    if (!idx || windows_[v][*idx].end < occupancy.end) {
      throw ReservationConflict("vertex " + std::to_string(v) + " is not free on [" +
                                std::to_string(occupancy.begin) + ", " + end_string(occupancy.end) + ")");
    }
    auto& ws = windows_[v];
    Interval w = ws[*idx];
    ws.erase(ws.begin() + static_cast<std::ptrdiff_t>(*idx));
    auto at = ws.begin() + static_cast<std::ptrdiff_t>(*idx);
    if (occupancy.end < w.end) at = ws.insert(at, Interval{occupancy.end, w.end});
    if (w.begin < occupancy.begin) ws.insert(at, Interval{w.begin, occupancy.begin});
  }

  void reserve_traversal(const Traversal& t) {
    if (is_head_on(t.from, t.to, t.depart)) {
      throw ReservationConflict("head-on traversal of edge (" + std::to_string(t.from) + ", " +
                                std::to_string(t.to) + ") at time " + std::to_string(t.depart));
    }
    traversals_.insert(t);
  }

  friend bool operator==(const FreeTimeWindowGraph&, const FreeTimeWindowGraph&) = default;

 private:
  static std::string end_string(Time t) { return t == kForever ? "inf" : std::to_string(t); }

  std::vector<std::vector<Interval>> windows_;
  std::unordered_set<Traversal, TraversalHash> traversals_;
};

struct PathEntry {
  VertexId vertex = 0;
  Time entry = 0;
  Time exit = kForever;
  friend bool operator==(const PathEntry&, const PathEntry&) = default;
};

// Visited vertices with their occupancy intervals; the last entry parks forever.
struct TimeWindowPath {
  std::vector<PathEntry> entries;

  Time arrival() const { return entries.back().entry; }
  VertexId position_at(Time t) const {
    for (const auto& e : entries) {
      if (e.entry <= t && t < e.exit) return e.vertex;
    }
    return entries.front().vertex;
  }
};

// Lazily computed hop-distance tables keyed by target vertex.
class HopDistanceCache {
 public:
  explicit HopDistanceCache(const Roadmap& map) : map_(&map), tables_(map.vertex_count()) {}

  const std::vector<std::int32_t>& to(VertexId goal) {
    auto& table = tables_.at(goal);
    if (table.empty()) table = hop_distances(goal, *map_);
    return table;
  }

 private:
  const Roadmap* map_;
  std::vector<std::vector<std::int32_t>> tables_;
};

namespace detail {

struct SearchNode {
  VertexId vertex;
  std::size_t window;
  Time arrival;
  std::int64_t parent;
};

inline std::optional<TimeWindowPath> plan_single_with(VertexId start, VertexId goal,
                                                      const FreeTimeWindowGraph& windows, const Roadmap& map,
                                                      Time start_time, const std::vector<std::int32_t>& heuristic) {
  auto start_window = windows.window_containing(start, start_time);
  if (!start_window || heuristic[start] == kUnreachableHops) return std::nullopt;

  std::vector<SearchNode> nodes;
  std::vector<std::vector<Time>> best(map.vertex_count());
  auto best_slot = [&](VertexId v, std::size_t w) -> Time& {
    auto& slots = best[v];
    if (slots.empty()) slots.assign(windows.free_windows(v).size(), kForever);
    return slots[w];
  };

  // (f, vertex, window, node index); smaller vertex id wins ties on f.
  using Key = std::tuple<Time, VertexId, std::size_t, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> open;

  nodes.push_back({start, *start_window, start_time, -1});
  best_slot(start, *start_window) = start_time;
  open.emplace(start_time + heuristic[start], start, *start_window, 0);

  while (!open.empty()) {
    auto [f, v, wi, idx] = open.top();
    open.pop();
    const SearchNode node = nodes[idx];
    if (node.arrival > best_slot(v, wi)) continue;

    const Interval here = windows.free_windows(v)[wi];
    if (v == goal && here.end == kForever) {
      TimeWindowPath path;
      for (std::int64_t i = static_cast<std::int64_t>(idx); i >= 0; i = nodes[i].parent) {
        path.entries.push_back({nodes[i].vertex, nodes[i].arrival, kForever});
      }
      std::reverse(path.entries.begin(), path.entries.end());
      for (std::size_t i = 0; i + 1 < path.entries.size(); ++i) path.entries[i].exit = path.entries[i + 1].entry;
      return path;
    }

    for (VertexId w : map.neighbors(v)) {
      if (heuristic[w] == kUnreachableHops) continue;
      const auto target_windows = windows.free_windows(w);
      for (std::size_t wj = 0; wj < target_windows.size(); ++wj) {
        const Interval there = target_windows[wj];
        // Departure step d: stay in v on [arrival, d + 1), be in w at d + 1 < there.end.
        Time lo = std::max(node.arrival, there.begin - 1);
        Time hi = here.end == kForever ? kForever : here.end - 1;
        if (there.end != kForever) hi = std::min(hi, there.end - 2);
        if (lo > hi) continue;
        Time depart = lo;
        while (depart <= hi && windows.is_head_on(v, w, depart)) ++depart;
        if (depart > hi) continue;
        Time arrival = depart + 1;
        Time& slot = best_slot(w, wj);
        if (arrival >= slot) continue;
        slot = arrival;
        nodes.push_back({w, wj, arrival, static_cast<std::int64_t>(idx)});
        open.emplace(arrival + heuristic[w], w, wj, nodes.size() - 1);
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Earliest-arrival path from start to goal through the free windows, ending in a
// goal window that stays free forever. Empty optional when no such path exists.
inline std::optional<TimeWindowPath> plan_single(VertexId start, VertexId goal, const FreeTimeWindowGraph& windows,
                                                 const Roadmap& map, Time start_time = 0,
                                                 HopDistanceCache* cache = nullptr) {
  map.require(start);
  map.require(goal);
  if (cache) return detail::plan_single_with(start, goal, windows, map, start_time, cache->to(goal));
  return detail::plan_single_with(start, goal, windows, map, start_time, hop_distances(goal, map));
}

// Removes the path's occupancy from the free windows and records its edge
// traversals. All-or-nothing: throws ReservationConflict without mutating.
inline void reserve(const TimeWindowPath& path, FreeTimeWindowGraph& windows) {
  const auto& es = path.entries;
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (!windows.is_free(es[i].vertex, Interval{es[i].entry, es[i].exit})) {
      throw ReservationConflict("vertex " + std::to_string(es[i].vertex) + " already reserved at time " +
                                std::to_string(es[i].entry));
    }
    if (i + 1 < es.size() && windows.is_head_on(es[i].vertex, es[i + 1].vertex, es[i + 1].entry - 1)) {
      throw ReservationConflict("head-on traversal into vertex " + std::to_string(es[i + 1].vertex));
    }
  }
  for (std::size_t i = 0; i < es.size(); ++i) {
    windows.reserve_vertex(es[i].vertex, Interval{es[i].entry, es[i].exit});
    if (i + 1 < es.size()) windows.reserve_traversal({es[i].vertex, es[i + 1].vertex, es[i + 1].entry - 1});
  }
}

// Samples each agent's position at every integer time from start_time to the
// latest arrival.
inline Plan to_plan(std::span<const TimeWindowPath> paths, Time start_time = 0) {
  Plan plan;
  if (paths.empty()) return plan;
  Time horizon = start_time;
  for (const auto& p : paths) horizon = std::max(horizon, p.arrival());
  plan.steps.reserve(static_cast<std::size_t>(horizon - start_time + 1));
  std::vector<std::size_t> cursor(paths.size(), 0);
  for (Time t = start_time; t <= horizon; ++t) {
    Configuration c;
    c.positions.reserve(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const auto& es = paths[i].entries;
      while (es[cursor[i]].exit <= t) ++cursor[i];
      c.positions.push_back(es[cursor[i]].vertex);
    }
    plan.steps.push_back(std::move(c));
  }
  return plan;
}

// Plans agents in the given priority order on a fresh window graph. Paths are
// returned indexed by agent, not by priority.
inline std::optional<std::vector<TimeWindowPath>> plan_ordered(const Assignment& assignment, const Roadmap& map,
                                                               std::span<const AgentId> ordering,
                                                               Time start_time = 0,
                                                               HopDistanceCache* cache = nullptr) {
  FreeTimeWindowGraph windows(map.vertex_count());
  std::vector<TimeWindowPath> paths(assignment.agent_count());
  for (AgentId agent : ordering) {
    auto path = plan_single(assignment.starts[agent], assignment.goals[agent], windows, map, start_time, cache);
    if (!path) return std::nullopt;
    reserve(*path, windows);
    paths[agent] = std::move(*path);
  }
  return paths;
}

struct CarpParams {
  int max_shuffles = 1;
  Time start_time = 0;
  std::uint64_t seed = 0;
};

struct CarpResult {
  std::optional<Plan> plan;
  std::vector<TimeWindowPath> paths;
  std::vector<AgentId> ordering;  // priority order that succeeded
  int shuffles_used = 0;          // orderings tried, including the successful one

  bool success() const { return plan.has_value(); }
};

// Tries `first` and then random permutations until one ordering plans every
// agent or max_shuffles orderings have been tried.
template <class Rng>
CarpResult plan_with_orderings(const Assignment& assignment, const Roadmap& map, std::vector<AgentId> first,
                               int max_shuffles, Time start_time, Rng& rng, HopDistanceCache* cache = nullptr) {
  if (max_shuffles < 1) throw std::invalid_argument("carp: max_shuffles must be >= 1");
  CarpResult result;
  std::vector<AgentId> ordering = std::move(first);
  for (int attempt = 1; attempt <= max_shuffles; ++attempt) {
    if (attempt > 1) std::shuffle(ordering.begin(), ordering.end(), rng);
    result.shuffles_used = attempt;
    if (auto paths = plan_ordered(assignment, map, ordering, start_time, cache)) {
      result.plan = to_plan(*paths, start_time);
      result.paths = std::move(*paths);
      result.ordering = ordering;
      return result;
    }
  }
  return result;
}

inline CarpResult plan_all(const Assignment& assignment, const Roadmap& map, const CarpParams& params) {
  assignment.validate(map);
  std::mt19937_64 rng(params.seed);
  std::vector<AgentId> ordering(assignment.agent_count());
  std::iota(ordering.begin(), ordering.end(), AgentId{0});
  HopDistanceCache cache(map);
  return plan_with_orderings(assignment, map, std::move(ordering), params.max_shuffles, params.start_time, rng,
                             &cache);
}

}  // namespace mapf::carp
