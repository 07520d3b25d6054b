#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "mapf/carp.hpp"
#include "mapf/mapgen.hpp"
#include "mapf/validate.hpp"
#include "oracles.hpp"

using namespace mapf;
using namespace mapf::carp;

TEST(FreeWindows, ReserveSplitsInterval) {
  FreeTimeWindowGraph g(3);
  g.reserve_vertex(1, {1, 2});
  auto ws = g.free_windows(1);
  ASSERT_EQ(ws.size(), 2u);
  EXPECT_EQ(ws[0], (Interval{0, 1}));
  EXPECT_EQ(ws[1], (Interval{2, kForever}));
  EXPECT_FALSE(g.window_containing(1, 1));
  EXPECT_EQ(g.window_containing(1, 5), 1u);
  EXPECT_THROW(g.reserve_vertex(1, {0, 2}), ReservationConflict);
  EXPECT_THROW(g.reserve_vertex(1, {3, 3}), std::invalid_argument);
}

TEST(FreeWindows, GoalReservationTruncatesToArrival) {
  auto map = fixtures::corridor(4);
  FreeTimeWindowGraph g(map.vertex_count());
  auto p = plan_single(0, 3, g, map);
  ASSERT_TRUE(p);
  reserve(*p, g);
  auto ws = g.free_windows(3);
  ASSERT_EQ(ws.size(), 1u);
  EXPECT_EQ(ws[0], (Interval{0, p->arrival()}));
  EXPECT_EQ(p->arrival(), 3);
}

TEST(FreeWindows, HeadOnTraversalIsRejected) {
  FreeTimeWindowGraph g(2);
  g.reserve_traversal({0, 1, 4});
  EXPECT_TRUE(g.is_head_on(1, 0, 4));
  EXPECT_FALSE(g.is_head_on(0, 1, 4));  // same direction pipelining
  EXPECT_FALSE(g.is_head_on(1, 0, 5));
  EXPECT_THROW(g.reserve_traversal({1, 0, 4}), ReservationConflict);
}

TEST(Reserve, IsAllOrNothing) {
  auto map = fixtures::corridor(3);
  FreeTimeWindowGraph g(3);
  g.reserve_vertex(2, {2, 3});
  const FreeTimeWindowGraph before = g;
  TimeWindowPath p{{{0, 0, 1}, {1, 1, 2}, {2, 2, kForever}}};
  EXPECT_THROW(reserve(p, g), ReservationConflict);
  EXPECT_EQ(g, before);
}

TEST(Reserve, OrderOfDisjointPathsDoesNotMatter) {
  auto map = mapgen::grid({4, 4, 1.0});
  TimeWindowPath top{{{0, 0, 1}, {1, 1, 2}, {2, 2, 3}, {3, 3, kForever}}};
  TimeWindowPath bottom{{{12, 0, 2}, {13, 2, 3}, {14, 3, kForever}}};
  FreeTimeWindowGraph ab(map.vertex_count()), ba(map.vertex_count());
  reserve(top, ab);
  reserve(bottom, ab);
  reserve(bottom, ba);
  reserve(top, ba);
  EXPECT_EQ(ab, ba);
}

TEST(PlanSingle, EmptyTableGivesStaticShortestPath) {
  auto map = mapgen::grid({5, 4, 1.0});
  FreeTimeWindowGraph g(map.vertex_count());
  auto p = plan_single(0, 24, g, map);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->arrival(), 8);
  EXPECT_EQ(p->entries.size(), 9u);  // no waiting
  for (std::size_t i = 0; i + 1 < p->entries.size(); ++i) {
    EXPECT_TRUE(map.has_edge(p->entries[i].vertex, p->entries[i + 1].vertex));
  }
}

TEST(PlanSingle, WaitsOneStepBeforeCrossingReservedVertex) {
  fixtures::CrossingInstance inst;
  using I = fixtures::CrossingInstance;
  FreeTimeWindowGraph g(inst.map.vertex_count());
  auto first = plan_single(I::A, I::B, g, inst.map);
  ASSERT_TRUE(first);
  EXPECT_EQ(fixtures::trajectory(*first), (std::vector<VertexId>{I::A, I::X, I::B}));
  reserve(*first, g);
  EXPECT_EQ(g.free_windows(I::X)[0], (Interval{0, 1}));
  EXPECT_EQ(g.free_windows(I::B).back(), (Interval{0, 2}));

  auto second = plan_single(I::C, I::D, g, inst.map);
  ASSERT_TRUE(second);
  EXPECT_EQ(fixtures::trajectory(*second), (std::vector<VertexId>{I::C, I::C, I::X, I::D}));
  EXPECT_EQ(second->entries.front(), (PathEntry{I::C, 0, 2}));
}

TEST(PlanSingle, FailsWhenGoalIsTakenForever) {
  auto map = fixtures::corridor(4);
  FreeTimeWindowGraph g(map.vertex_count());
  g.reserve_vertex(3, {2, kForever});
  EXPECT_FALSE(plan_single(0, 3, g, map));
}

TEST(PlanSingle, StartOutsideFreeWindowFails) {
  auto map = fixtures::corridor(3);
  FreeTimeWindowGraph g(map.vertex_count());
  g.reserve_vertex(0, {0, 1});
  EXPECT_FALSE(plan_single(0, 2, g, map));
  EXPECT_TRUE(plan_single(0, 2, g, map, 1));
}

TEST(PlanSingle, AvoidsHeadOnCrossing) {
  // Corridor 0-1-2-3 with a side vertex 4 on 1. A reserved agent walks 3 -> 0;
  // the new agent from 0 to 3 has to duck into the side vertex.
  Roadmap map({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {1, 1}}, {{0, 1}, {1, 2}, {2, 3}, {1, 4}});
  FreeTimeWindowGraph g(map.vertex_count());
  auto other = plan_single(3, 0, g, map);
  ASSERT_TRUE(other);
  reserve(*other, g);
  auto p = plan_single(4, 3, g, map);
  ASSERT_TRUE(p);
  Plan plan = to_plan(std::vector<TimeWindowPath>{*other, *p});
  EXPECT_FALSE(validate_plan(plan, Assignment{{3, 4}, {0, 3}}, map));
}

TEST(PlanSingle, MatchesTimeExpandedOracle) {
  std::mt19937_64 rng(2024);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto q = fixtures::random_reserved_query(rng);
    auto p = plan_single(q.start, q.goal, q.windows, q.map);
    auto expected = oracle::time_expanded_arrival(q.map, q.reservations, q.start, q.goal, 50);
    ASSERT_EQ(p.has_value(), expected.has_value()) << "trial " << trial;
    if (!p) continue;
    ++solved;
    EXPECT_EQ(p->arrival(), *expected) << "trial " << trial;

    // The new path composes with the reserved ones into a valid plan.
    auto paths = q.reserved;
    paths.push_back(*p);
    Assignment a{q.reserved_starts, q.reserved_goals};
    a.starts.push_back(q.start);
    a.goals.push_back(q.goal);
    EXPECT_FALSE(validate_plan(to_plan(paths), a, q.map));
  }
  EXPECT_GT(solved, 30);
}

TEST(PlanAll, SingleAgentMatchesPlanSingle) {
  auto map = mapgen::grid({6, 8, 1.0});
  auto r = plan_all(Assignment{{0}, {35}}, map, {});
  ASSERT_TRUE(r.success());
  EXPECT_EQ(r.shuffles_used, 1);
  FreeTimeWindowGraph g(map.vertex_count());
  EXPECT_EQ(r.paths[0].entries, plan_single(0, 35, g, map)->entries);
}

TEST(PlanAll, DisjointCorridorsUseStaticPaths) {
  auto map = mapgen::grid({6, 4, 1.0});
  auto r = plan_all(Assignment{{0, 30}, {5, 33}}, map, {});
  ASSERT_TRUE(r.success());
  EXPECT_EQ(r.plan->makespan(), 5u);
  EXPECT_EQ(r.plan->arrival_times(), (std::vector<std::size_t>{5, 3}));
  EXPECT_DOUBLE_EQ(r.plan->sum_of_costs(map), 8.0);
}

TEST(PlanAll, CrossingInstanceMakespan) {
  fixtures::CrossingInstance inst;
  auto r = plan_all(inst.assignment, inst.map, {});
  ASSERT_TRUE(r.success());
  EXPECT_EQ(r.plan->makespan(), 3u);
  EXPECT_FALSE(validate_plan(*r.plan, inst.assignment, inst.map));
}

TEST(PlanAll, AdversarialBaseFailsForEveryOrdering) {
  auto inst = mapgen::adversarial({2, 0});
  for (std::vector<AgentId> order : {std::vector<AgentId>{0, 1}, std::vector<AgentId>{1, 0}}) {
    EXPECT_FALSE(plan_ordered(inst.assignment, inst.map, order));
  }
  auto r = plan_all(inst.assignment, inst.map, {1000, 0, 4});
  EXPECT_FALSE(r.success());
  EXPECT_EQ(r.shuffles_used, 1000);
  EXPECT_TRUE(oracle::tree_feasible(inst.map, inst.assignment));
}

TEST(PlanAll, DeterministicAndAlwaysValid) {
  std::mt19937_64 rng(9);
  auto map = mapgen::grid({8, 8, 1.0});
  for (int trial = 0; trial < 20; ++trial) {
    auto a = mapgen::random_assignment(map, 12, rng);
    auto r1 = plan_all(a, map, {10, 0, std::uint64_t(trial)});
    auto r2 = plan_all(a, map, {10, 0, std::uint64_t(trial)});
    EXPECT_EQ(r1.ordering, r2.ordering);
    EXPECT_EQ(r1.shuffles_used, r2.shuffles_used);
    ASSERT_EQ(r1.success(), r2.success());
    if (!r1.success()) continue;
    EXPECT_EQ(r1.plan->steps, r2.plan->steps);
    EXPECT_FALSE(validate_plan(*r1.plan, a, map));
  }
}

TEST(PlanAll, FirstOrderingIsInputOrder) {
  auto map = fixtures::corridor(5);
  auto r = plan_all(Assignment{{0, 4, 2}, {1, 3, 2}}, map, {});
  ASSERT_TRUE(r.success());
  EXPECT_EQ(r.ordering, (std::vector<AgentId>{0, 1, 2}));
}
