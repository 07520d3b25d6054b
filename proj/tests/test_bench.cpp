#include <gtest/gtest.h>

#include <random>

#include "mapf/bench.hpp"
#include "mapf/mapgen.hpp"
#include "oracles.hpp"

using namespace mapf;
using namespace mapf::bench;

namespace {

RunRecord record(bool success, double steps, double iterations = 1, double runtime = 1) {
  RunRecord r;
  r.map_id = "m";
  r.variant = "mrdrrt-exp-rew";
  r.success = success;
  r.steps = success ? steps : 0;
  r.sum_of_costs = success ? steps * 1.5 : 0;
  r.iterations = iterations;
  r.runtime_ms = runtime;
  return r;
}

const MapInfo kInfo{"5x5", 40};

}  // namespace

TEST(Median, OddAndEven) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_THROW(median({}), std::invalid_argument);
}

TEST(Aggregate, AllSuccessUsesRawMedians) {
  auto row = aggregate_group({record(true, 5, 10), record(true, 9, 30), record(true, 7, 20)}, kInfo);
  EXPECT_DOUBLE_EQ(row.success_rate, 1.0);
  EXPECT_DOUBLE_EQ(row.median_steps, 7.0);
  EXPECT_DOUBLE_EQ(row.median_iterations, 20.0);
  EXPECT_EQ(row.grid, "5x5");
  EXPECT_EQ(row.edge_count, 40u);
}

TEST(Aggregate, FailureBecomesTwiceTheWorstSuccess) {
  std::vector<RunRecord> g{record(true, 10), record(true, 20), record(false, 0)};
  auto substituted = g;
  substitute_failures(substituted);
  EXPECT_DOUBLE_EQ(substituted[2].steps, 40.0);
  EXPECT_DOUBLE_EQ(substituted[2].sum_of_costs, 60.0);
  auto row = aggregate_group(g, kInfo);
  EXPECT_DOUBLE_EQ(row.median_steps, 20.0);
  EXPECT_NEAR(row.success_rate, 2.0 / 3.0, 1e-15);
}

TEST(Aggregate, AllFailedUsesSentinel) {
  auto row = aggregate_group({record(false, 0), record(false, 0)}, kInfo);
  EXPECT_DOUBLE_EQ(row.median_steps, 100000.0);
  EXPECT_DOUBLE_EQ(kAllFailedValue, 100000.0);
  EXPECT_DOUBLE_EQ(row.success_rate, 0.0);
}

TEST(Aggregate, SubstitutionNeverLowersTheMedian) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> value(1, 100);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RunRecord> successes;
    const int n = 1 + trial % 7;
    for (int i = 0; i < n; ++i) successes.push_back(record(true, std::round(value(rng))));
    auto with_failures = successes;
    for (int i = 0; i < trial % 4; ++i) with_failures.push_back(record(false, 0));
    EXPECT_GE(aggregate_group(with_failures, kInfo).median_steps, aggregate_group(successes, kInfo).median_steps);
  }
  EXPECT_THROW(aggregate_group({}, kInfo), std::invalid_argument);
}

TEST(Aggregate, GroupsByGridEdgeCountAndVariant) {
  std::vector<RunRecord> rs{record(true, 1), record(true, 3)};
  rs[1].map_id = "other";
  rs.push_back(record(true, 5));
  rs.back().variant = "carp-1";
  std::map<std::string, MapInfo> infos{{"m", {"5x5", 40}}, {"other", {"5x5", 40}}};
  auto rows = aggregate(rs, infos);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].variant, "mrdrrt-exp-rew");
  EXPECT_DOUBLE_EQ(rows[0].median_steps, 2.0);
  EXPECT_EQ(rows[1].variant, "carp-1");
  EXPECT_EQ(aggregate(rs, infos), rows);  // pure function of the records
  EXPECT_THROW(aggregate(rs, {}), std::invalid_argument);
}

TEST(RunOne, FailureConventions) {
  auto inst = mapgen::adversarial({4, 3});
  auto carp = run_one(inst.map, inst.assignment, VariantSpec::carp(1000), 5);
  EXPECT_FALSE(carp.success);
  EXPECT_DOUBLE_EQ(carp.iterations, 1000.0);
  EXPECT_GE(carp.runtime_ms, 0.0);

  mrdrrt::PlannerParams cap;
  cap.max_iterations = 50;
  auto corridor = Roadmap({{0, 0}, {1, 0}, {2, 0}}, {{0, 1}, {1, 2}});
  auto mr = run_one(corridor, Assignment{{0, 2}, {2, 0}}, VariantSpec::mrdrrt(true, true, cap), 1);
  EXPECT_FALSE(mr.success);
  EXPECT_DOUBLE_EQ(mr.iterations, 50.0);
  EXPECT_EQ(kMrdrrtIterationCap, 500000u);
  EXPECT_EQ(mrdrrt::PlannerParams{}.max_iterations, kMrdrrtIterationCap);
}

TEST(VariantSpec, NamesAndParsing) {
  for (const auto& name : default_variant_names()) EXPECT_EQ(VariantSpec::parse(name).name(), name);
  EXPECT_THROW(VariantSpec::parse("carp-7"), std::invalid_argument);
  EXPECT_THROW(VariantSpec::parse("carp-10x"), std::invalid_argument);
  EXPECT_THROW(VariantSpec::parse("rrt"), std::invalid_argument);
  EXPECT_EQ(carp_variants().size(), 4u);
  EXPECT_EQ(mrdrrt_variants().size(), 4u);
}

TEST(RunMatrix, SingleCellAndPlansRevalidate) {
  std::mt19937_64 rng(2);
  auto map = mapgen::grid({5, 8, 1.0});
  MapEntry entry{"g", "5x5", map.edge_count(), map, {mapgen::random_assignment(map, 3, rng)}};
  auto one = run_matrix({entry}, {VariantSpec::carp(1)}, {1, 1, true});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].map_id, "g");
  if (one[0].success) { EXPECT_FALSE(validate_plan(*one[0].plan, entry.assignments[0], map)); }
}

TEST(RunMatrix, ParallelMatchesSerialExceptRuntime) {
  std::mt19937_64 rng(3);
  auto map = mapgen::grid({6, 8, 1.0});
  MapEntry entry{"g", "6x6", map.edge_count(), map, {}};
  for (int i = 0; i < 4; ++i) entry.assignments.push_back(mapgen::random_assignment(map, 4, rng));
  mrdrrt::PlannerParams p;
  p.max_iterations = 2000;
  std::vector<VariantSpec> variants{VariantSpec::carp(10), VariantSpec::mrdrrt(true, true, p),
                                    VariantSpec::mrdrrt(false, false, p)};
  auto serial = run_matrix({entry}, variants, {7, 1, true});
  auto parallel = run_matrix({entry}, variants, {7, 4, true});
  ASSERT_EQ(serial.size(), 12u);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    auto a = serial[i], b = parallel[i];
    a.runtime_ms = b.runtime_ms = 0;
    EXPECT_TRUE(a.same_fields(b)) << i;
    if (a.success) {
      EXPECT_EQ(a.plan->steps, b.plan->steps);
      EXPECT_FALSE(validate_plan(*a.plan, entry.assignments[a.assignment_id], map));
    }
  }
}

TEST(Csv, RoundTrips) {
  std::vector<RunRecord> rs{record(true, 5, 17, 0.1), record(false, 0, 500000, 1234.5678901234)};
  rs[0].seed = 0xffffffffffffffffULL;
  rs[1].assignment_id = 7;
  auto parsed = runs_from_csv(runs_to_csv(rs));
  ASSERT_EQ(parsed.size(), rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) EXPECT_TRUE(parsed[i].same_fields(rs[i]));

  std::vector<AggregateRow> rows{{"20x20", 519, "carp-10", 1.0 / 3.0, 100000, 10, 0.123456789012345},
                                 {"adv-k4", 0, "mrdrrt-base", 0.95, 12.5, 3.5, 1e-3}};
  EXPECT_EQ(aggregate_from_csv(aggregate_to_csv(rows)), rows);
  EXPECT_EQ(aggregate_to_csv({}), std::string(kAggregateHeader) + "\n");
  EXPECT_EQ(runs_to_csv({}).substr(0, std::string(kRunsHeader).size()), kRunsHeader);
  EXPECT_THROW(aggregate_from_csv("wrong,header\n"), std::invalid_argument);
}

TEST(Experiments, DensitySmokeConfig) {
  DensityConfig c;
  c.sides = {5};
  c.assignments = 5;
  c.agents = 3;
  c.step_count = 3;
  mrdrrt::PlannerParams p;
  p.max_iterations = 2000;
  c.variants = {VariantSpec::carp(10), VariantSpec::mrdrrt(true, true, p)};
  c.workers = 2;
  auto r = experiment_density(c);
  EXPECT_EQ(r.maps.size(), 4u);
  EXPECT_EQ(r.records.size(), 4u * 5u * 2u);
  EXPECT_EQ(r.rows.size(), 4u * 2u);
  auto csv = aggregate_to_csv(r.rows);
  EXPECT_EQ(aggregate_from_csv(csv), r.rows);

  auto again = experiment_density(c);
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    auto a = r.records[i], b = again.records[i];
    a.runtime_ms = b.runtime_ms = 0;
    EXPECT_TRUE(a.same_fields(b));
  }
}

TEST(Experiments, AdversarialCarpNeverSucceeds) {
  AdversarialConfig c;
  c.agent_counts = {2, 4};
  c.instances = 3;
  c.variants = {VariantSpec::carp(1000), VariantSpec::mrdrrt(true, true)};
  auto r = experiment_adversarial(c);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.edge_count, 0u);
    if (row.variant == "carp-1000") {
      EXPECT_DOUBLE_EQ(row.success_rate, 0.0);
      EXPECT_DOUBLE_EQ(row.median_iterations, 1000.0);
    } else {
      EXPECT_DOUBLE_EQ(row.success_rate, 1.0);
    }
  }
  c.instances = 0;
  auto empty = experiment_adversarial(c);
  EXPECT_EQ(aggregate_to_csv(empty.rows), std::string(kAggregateHeader) + "\n");
  c.agent_counts = {3};
  EXPECT_THROW(experiment_adversarial(c), std::invalid_argument);
}

TEST(Experiments, DenserMapsAreNotHarderForMrdrrt) {
  DensityConfig c;
  c.sides = {6};
  c.assignments = 8;
  c.agents = 10;
  c.step_count = 4;
  mrdrrt::PlannerParams p;
  p.max_iterations = 300;
  c.variants = {VariantSpec::mrdrrt(true, true, p), VariantSpec::mrdrrt(false, true, p)};
  auto r = experiment_density(c);
  std::vector<double> edges, success;
  for (const auto& row : r.rows) {
    edges.push_back(double(row.edge_count));
    success.push_back(row.success_rate);
  }
  EXPECT_GT(oracle::spearman(edges, success), 0.0);
}

TEST(Config, JsonParsing) {
  auto c = density_config_from_json(nlohmann::json::parse(
      R"({"sides":[5],"agents":4,"assignments":2,"steps":3,"variants":["carp-1","mrdrrt-exp"],"max_iterations":77,"nn":3})"));
  EXPECT_EQ(c.sides, std::vector<int>{5});
  EXPECT_EQ(c.agents, 4u);
  ASSERT_EQ(c.variants.size(), 2u);
  EXPECT_EQ(c.variants[1].params.max_iterations, 77u);
  EXPECT_EQ(c.variants[1].params.nn_count, 3u);
  EXPECT_FALSE(c.variants[1].params.rewiring);
  auto d = density_config_from_json(nlohmann::json::object());
  EXPECT_EQ(d.variants.size(), 8u);
  auto adv = adversarial_config_from_json(nlohmann::json::object());
  EXPECT_EQ(adv.agent_counts, (std::vector<std::size_t>{4, 8, 12, 16}));
  EXPECT_EQ(adv.instances, 25u);
}
