#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mapf/roadmap.hpp"

namespace mapf::mapgen {

struct GridSpec {
  int side = 20;
  int connectivity = 8;  // 4 or 8
  double spacing = 1.0;

  void validate() const {
    if (side < 2) throw std::invalid_argument("grid side must be at least 2");
    if (connectivity != 4 && connectivity != 8) throw std::invalid_argument("grid connectivity must be 4 or 8");
    if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  }
};

// side x side lattice; vertex id = row * side + column.
inline Roadmap grid(const GridSpec& spec) {
  spec.validate();
  const int n = spec.side;
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) vertices.push_back({c * spec.spacing, r * spec.spacing});
  }
  auto id = [n](int r, int c) { return static_cast<VertexId>(r * n + c); };
  std::vector<Edge> edges;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (c + 1 < n) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < n) edges.emplace_back(id(r, c), id(r + 1, c));
      if (spec.connectivity == 8 && r + 1 < n) {
        if (c + 1 < n) edges.emplace_back(id(r, c), id(r + 1, c + 1));
        if (c > 0) edges.emplace_back(id(r, c), id(r + 1, c - 1));
      }
    }
  }
  return Roadmap(std::move(vertices), std::move(edges));
}

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

// Spanning tree by Kruskal over a shuffled edge list. All grid edges are
// treated as equal weight, so the shuffle decides which tree comes out.
template <class Rng>
Roadmap mst_base(const Roadmap& map, Rng& rng) {
  if (!is_connected(map)) throw std::invalid_argument("mst_base: input roadmap is disconnected");
  std::vector<Edge> order = map.edges();
  std::shuffle(order.begin(), order.end(), rng);
  detail::DisjointSets sets(map.vertex_count());
  std::vector<Edge> tree;
  tree.reserve(map.vertex_count() == 0 ? 0 : map.vertex_count() - 1);
  for (auto [a, b] : order) {
    if (sets.unite(a, b)) tree.emplace_back(a, b);
  }
  return Roadmap(map.vertices(), std::move(tree));
}

// map_0 = tree, each following map adds floor(unused / steps) random unused
// grid edges; the last map absorbs the remainder and equals the full grid.
template <class Rng>
std::vector<Roadmap> density_sweep(const Roadmap& full, const Roadmap& tree, int step_count, Rng& rng) {
  if (step_count < 1) throw std::invalid_argument("density_sweep: step_count must be positive");
  const auto& tree_edges = tree.edges();
  std::vector<Edge> unused;
  for (const auto& e : full.edges()) {
    if (!std::binary_search(tree_edges.begin(), tree_edges.end(), e)) unused.push_back(e);
  }
  if (unused.size() + tree_edges.size() != full.edge_count()) {
    throw std::invalid_argument("density_sweep: tree is not a subgraph of the grid");
  }
  const std::size_t per_step = unused.size() / static_cast<std::size_t>(step_count);
  if (per_step == 0) throw std::invalid_argument("density_sweep: not enough unused edges for a strictly growing sweep");
  std::shuffle(unused.begin(), unused.end(), rng);

  std::vector<Roadmap> sweep{tree};
  std::vector<Edge> edges = tree_edges;
  std::size_t taken = 0;
  for (int j = 1; j <= step_count; ++j) {
    const std::size_t add = j == step_count ? unused.size() - taken : per_step;
    edges.insert(edges.end(), unused.begin() + static_cast<std::ptrdiff_t>(taken),
                 unused.begin() + static_cast<std::ptrdiff_t>(taken + add));
    taken += add;
    sweep.emplace_back(full.vertices(), edges);
  }
  return sweep;
}

// Distinct uniform starts and, independently, distinct uniform goals.
template <class Rng>
Assignment random_assignment(const Roadmap& map, std::size_t agents, Rng& rng) {
  if (agents == 0 || agents > map.vertex_count()) {
    throw std::invalid_argument("random_assignment: agent count must be in [1, vertex count]");
  }
  std::vector<VertexId> ids(map.vertex_count());
  std::iota(ids.begin(), ids.end(), VertexId{0});
  Assignment a;
  std::shuffle(ids.begin(), ids.end(), rng);
  a.starts.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(agents));
  std::shuffle(ids.begin(), ids.end(), rng);
  a.goals.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(agents));
  return a;
}

struct AdversarialSpec {
  std::size_t agents = 2;
  std::uint64_t seed = 0;

  void validate() const {
    if (agents < 2 || agents % 2 != 0) throw std::invalid_argument("adversarial: agent count must be even and >= 2");
  }
};

struct AdversarialInstance {
  Roadmap map;
  Assignment assignment;
};

namespace detail {

struct TreeBuilder {
  std::size_t vertex_count = 0;
  std::vector<Edge> edges;
  std::vector<std::size_t> degree;
  Assignment assignment;

  VertexId add_vertex() {
    degree.push_back(0);
    return static_cast<VertexId>(vertex_count++);
  }
  void connect(VertexId a, VertexId b) {
    edges.emplace_back(a, b);
    ++degree[a];
    ++degree[b];
  }
  void add_swapping_pair(VertexId a, VertexId b) {
    assignment.starts.push_back(a);
    assignment.goals.push_back(b);
    assignment.starts.push_back(b);
    assignment.goals.push_back(a);
  }
  // Path left - center - right with a spur on the center; the pair swaps the
  // path ends and the spur is the only place to step aside. Returns the spur.
  VertexId add_gadget() {
    VertexId left = add_vertex(), center = add_vertex(), right = add_vertex(), spur = add_vertex();
    connect(left, center);
    connect(center, right);
    connect(center, spur);
    add_swapping_pair(left, right);
    return spur;
  }
};

// Layered tidy layout: depth from vertex 0 gives y, leaves get consecutive x
// slots in DFS order and inner vertices sit at the mean of their children.
inline std::vector<Point> layout_tree(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<VertexId>> adj(n);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& l : adj) std::sort(l.begin(), l.end());
  std::vector<Point> pos(n);
  std::vector<int> depth(n, -1);
  double next_leaf = 0.0;
  // Iterative post-order DFS from the root.
  struct Frame {
    VertexId v;
    std::size_t child;
  };
  std::vector<Frame> stack{{0, 0}};
  depth[0] = 0;
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.child < adj[f.v].size()) {
      VertexId w = adj[f.v][f.child++];
      if (depth[w] < 0) {
        depth[w] = depth[f.v] + 1;
        stack.push_back({w, 0});
      }
      continue;
    }
    VertexId v = f.v;
    stack.pop_back();
    double sum = 0.0;
    int children = 0;
    for (VertexId w : adj[v]) {
      if (depth[w] == depth[v] + 1) {
        sum += pos[w].x;
        ++children;
      }
    }
    pos[v].x = children == 0 ? next_leaf++ : sum / children;
    pos[v].y = -static_cast<double>(depth[v]);
  }
  return pos;
}

}  // namespace detail

// Tree maps with swapping agent pairs that no priority ordering can plan.
// Starts from one gadget and repeatedly grows from a random leaf, either
// with a new pair swapping across that leaf or with a fresh gadget hung off it.
inline AdversarialInstance adversarial(const AdversarialSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  detail::TreeBuilder b;
  b.add_gadget();
  while (b.assignment.agent_count() < spec.agents) {
    std::vector<VertexId> leaves;
    for (std::size_t v = 0; v < b.vertex_count; ++v) {
      if (b.degree[v] == 1) leaves.push_back(static_cast<VertexId>(v));
    }
    const VertexId leaf = leaves[std::uniform_int_distribution<std::size_t>(0, leaves.size() - 1)(rng)];
    if (std::bernoulli_distribution(0.5)(rng)) {
      VertexId a = b.add_vertex(), c = b.add_vertex();
      b.connect(leaf, a);
      b.connect(leaf, c);
      b.add_swapping_pair(a, c);
    } else {
      VertexId spur = b.add_gadget();
      b.connect(leaf, spur);
    }
  }
  auto points = detail::layout_tree(b.vertex_count, b.edges);
  return {Roadmap(std::move(points), std::move(b.edges)), std::move(b.assignment)};
}

}  // namespace mapf::mapgen
