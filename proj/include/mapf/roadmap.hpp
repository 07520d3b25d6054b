#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mapf {

using VertexId = std::int32_t;
using AgentId = std::size_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

using Edge = std::pair<VertexId, VertexId>;

// Undirected roadmap embedded in the plane. Vertex ids are dense (0..N-1),
// edges are stored normalized (first < second) and adjacency lists are sorted.
class Roadmap {
 public:
  Roadmap() = default;

  Roadmap(std::vector<Point> vertices, std::vector<Edge> edges)
      : vertices_(std::move(vertices)), adjacency_(vertices_.size()) {
    for (const auto& p : vertices_) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw std::invalid_argument("roadmap: non-finite vertex coordinate");
      }
    }
    edges_.reserve(edges.size());
    for (auto [a, b] : edges) {
      if (!contains(a) || !contains(b)) {
        throw std::invalid_argument("roadmap: edge references unknown vertex");
      }
      if (a == b) {
        throw std::invalid_argument("roadmap: self-loop on vertex " + std::to_string(a));
      }
      edges_.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
      throw std::invalid_argument("roadmap: duplicate edge");
    }
    for (auto [a, b] : edges_) {
      adjacency_[a].push_back(b);
      adjacency_[b].push_back(a);
    }
    for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
  }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  bool contains(VertexId v) const {
    return v >= 0 && static_cast<std::size_t>(v) < vertices_.size();
  }

  const Point& position(VertexId v) const {
    require(v);
    return vertices_[v];
  }

  std::span<const VertexId> neighbors(VertexId v) const {
    require(v);
    return adjacency_[v];
  }

  std::size_t degree(VertexId v) const { return neighbors(v).size(); }

  bool has_edge(VertexId a, VertexId b) const {
    if (!contains(a) || !contains(b)) return false;
    const auto& nbrs = adjacency_[a];
    return std::binary_search(nbrs.begin(), nbrs.end(), b);
  }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }

  void require(VertexId v) const {
    if (!contains(v)) {
      throw std::invalid_argument("unknown vertex id " + std::to_string(v));
    }
  }

 private:
  std::vector<Point> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::vector<VertexId>> adjacency_;
};

// One vertex per agent. Tree nodes and plan steps are collision-free
// configurations; sampled steering targets reuse the type without that guarantee.
struct Configuration {
  std::vector<VertexId> positions;

  Configuration() = default;
  explicit Configuration(std::vector<VertexId> p) : positions(std::move(p)) {}
  Configuration(std::initializer_list<VertexId> p) : positions(p) {}

  std::size_t size() const { return positions.size(); }
  VertexId operator[](std::size_t i) const { return positions[i]; }
  VertexId& operator[](std::size_t i) { return positions[i]; }

  bool is_collision_free() const {
    std::vector<VertexId> sorted = positions;
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
  }

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (VertexId v : c.positions) {
      h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(v));
      h *= 0x100000001b3ULL;
    }
    return h;
  }
};

struct Assignment {
  std::vector<VertexId> starts;
  std::vector<VertexId> goals;

  std::size_t agent_count() const { return starts.size(); }
  Configuration start_configuration() const { return Configuration(starts); }
  Configuration goal_configuration() const { return Configuration(goals); }

  void validate(const Roadmap& map) const {
    if (starts.empty() || starts.size() != goals.size()) {
      throw std::invalid_argument("assignment: starts and goals must be non-empty and of equal length");
    }
    for (std::size_t i = 0; i < starts.size(); ++i) {
      if (!map.contains(starts[i]) || !map.contains(goals[i])) {
        throw std::invalid_argument("assignment: agent " + std::to_string(i) + " references unknown vertex");
      }
    }
    if (!start_configuration().is_collision_free()) {
      throw std::invalid_argument("assignment: starts are not pairwise distinct");
    }
    if (!goal_configuration().is_collision_free()) {
      throw std::invalid_argument("assignment: goals are not pairwise distinct");
    }
  }
};

inline double euclidean_distance(VertexId a, VertexId b, const Roadmap& map) {
  const Point& p = map.position(a);
  const Point& q = map.position(b);
  return std::hypot(p.x - q.x, p.y - q.y);
}

inline double euclidean_distance(const Point& p, const Point& q) {
  return std::hypot(p.x - q.x, p.y - q.y);
}

// Sum of per-agent Euclidean distances.
inline double composite_distance(const Configuration& a, const Configuration& b, const Roadmap& map) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("composite_distance: agent count mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += euclidean_distance(a[i], b[i], map);
  return sum;
}

// Time-indexed sequence of configurations, one per synchronous step.
struct Plan {
  std::vector<Configuration> steps;

  std::size_t agent_count() const { return steps.empty() ? 0 : steps.front().size(); }
  std::size_t makespan() const { return steps.empty() ? 0 : steps.size() - 1; }

  // First step after which the agent never moves again.
  std::vector<std::size_t> arrival_times() const {
    std::vector<std::size_t> arrival(agent_count(), 0);
    for (std::size_t t = 1; t < steps.size(); ++t) {
      for (std::size_t i = 0; i < arrival.size(); ++i) {
        if (steps[t][i] != steps[t - 1][i]) arrival[i] = t;
      }
    }
    return arrival;
  }

  // Total travelled Euclidean length; waiting is free.
  double sum_of_costs(const Roadmap& map) const {
    double sum = 0.0;
    for (std::size_t t = 1; t < steps.size(); ++t) sum += composite_distance(steps[t - 1], steps[t], map);
    return sum;
  }
};

// Single-source shortest path lengths with Euclidean edge weights.
// Unreachable vertices hold kInfinity.
inline std::vector<double> dijkstra_distances(VertexId source, const Roadmap& map) {
  map.require(source);
  std::vector<double> dist(map.vertex_count(), kInfinity);
  using Entry = std::pair<double, VertexId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[source] = 0.0;
  open.emplace(0.0, source);
  while (!open.empty()) {
    auto [d, v] = open.top();
    open.pop();
    if (d > dist[v]) continue;
    for (VertexId w : map.neighbors(v)) {
      double nd = d + euclidean_distance(v, w, map);
      if (nd < dist[w]) {
        dist[w] = nd;
        open.emplace(nd, w);
      }
    }
  }
  return dist;
}

inline constexpr std::int32_t kUnreachableHops = std::numeric_limits<std::int32_t>::max();

// Unit-weight BFS distances (number of moves).
inline std::vector<std::int32_t> hop_distances(VertexId source, const Roadmap& map) {
  map.require(source);
  std::vector<std::int32_t> dist(map.vertex_count(), kUnreachableHops);
  std::vector<VertexId> frontier{source};
  dist[source] = 0;
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    VertexId v = frontier[head];
    for (VertexId w : map.neighbors(v)) {
      if (dist[w] == kUnreachableHops) {
        dist[w] = dist[v] + 1;
        frontier.push_back(w);
      }
    }
  }
  return dist;
}

inline bool is_connected(const Roadmap& map) {
  if (map.vertex_count() == 0) return true;
  auto d = hop_distances(0, map);
  return std::none_of(d.begin(), d.end(), [](std::int32_t h) { return h == kUnreachableHops; });
}

}  // namespace mapf
