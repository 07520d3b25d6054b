#pragma once

// Instances shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "mapf/carp.hpp"
#include "mapf/mapgen.hpp"
#include "mapf/roadmap.hpp"
#include "oracles.hpp"

namespace fixtures {

using namespace mapf;

inline Roadmap corridor(int n) {
  std::vector<Point> pts;
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) pts.push_back({double(i), 0.0});
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Roadmap(pts, edges);
}

// Two-agent crossing on a 3x3 four-connected grid:
//   0 A 2
//   C X D
//   6 B 8
// Agent 0 goes A -> B straight through X and parks on B from time 2. Agent 1
// goes C -> D; going over the top via A takes four steps and the bottom row
// is cut off by B, so waiting one step at C and crossing X is best.
struct CrossingInstance {
  static constexpr VertexId A = 1, C = 3, X = 4, D = 5, B = 7;
  Roadmap map = mapgen::grid({3, 4, 1.0});
  Assignment assignment{{A, C}, {B, D}};
};

// Connected random roadmap: random tree plus a few chords, random coordinates.
inline Roadmap random_connected_map(std::mt19937_64& rng, int n, int chords) {
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back({coord(rng), coord(rng)});
  std::set<Edge> edges;
  for (int i = 1; i < n; ++i) edges.insert({std::uniform_int_distribution<int>(0, i - 1)(rng), i});
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int e = 0; e < chords; ++e) {
    VertexId a = pick(rng), b = pick(rng);
    if (a != b) edges.insert({std::min(a, b), std::max(a, b)});
  }
  return Roadmap(pts, {edges.begin(), edges.end()});
}

inline std::vector<VertexId> trajectory(const carp::TimeWindowPath& p) {
  std::vector<VertexId> at;
  for (carp::Time t = 0; t <= p.arrival(); ++t) at.push_back(p.position_at(t));
  return at;
}

// A single-agent query against a table holding up to three reserved paths,
// with the same reservations mirrored into the oracle's representation.
struct ReservedQuery {
  Roadmap map;
  carp::FreeTimeWindowGraph windows;
  oracle::Reservations reservations;
  std::vector<carp::TimeWindowPath> reserved;
  std::vector<VertexId> reserved_starts, reserved_goals;
  VertexId start = 0, goal = 0;
};

inline ReservedQuery random_reserved_query(std::mt19937_64& rng) {
  const int n = std::uniform_int_distribution<int>(6, 30)(rng);
  const int chords = std::uniform_int_distribution<int>(0, n / 2)(rng);
  ReservedQuery q{random_connected_map(rng, n, chords), carp::FreeTimeWindowGraph(std::size_t(n)), {}, {}, {}, {}};
  std::vector<VertexId> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<VertexId> goals = ids;
  std::shuffle(goals.begin(), goals.end(), rng);
  const int paths = std::uniform_int_distribution<int>(0, 3)(rng);
  std::set<VertexId> used_goals;
  for (int i = 0; i < paths; ++i) {
    const VertexId s = ids[i];
    VertexId g = goals[i];
    if (used_goals.contains(g)) continue;
    auto p = carp::plan_single(s, g, q.windows, q.map);
    if (!p) continue;
    carp::reserve(*p, q.windows);
    q.reservations.add_trajectory(trajectory(*p));
    q.reserved.push_back(*p);
    q.reserved_starts.push_back(s);
    q.reserved_goals.push_back(g);
    used_goals.insert(g);
  }
  q.start = ids[3];
  q.goal = goals[3];
  return q;
}

}  // namespace fixtures
