// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/planner.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "innet/error.hpp"
#include "oracles.hpp"

namespace innet {
namespace {

StageNeed predict_stage(std::size_t entries, int segment = 0, int group = -1) {
  StageNeed s;
  s.tables = {{TableKind::kDtPredict, 0, entries}};
  s.segment = segment;
  s.group = group;
  return s;
}

PlannerProblem line_problem(int devices, const DeviceConfig& cfg, std::vector<StageNeed> stages) {
  const NetworkModel net = line(devices, cfg);
  PlannerProblem pb;
  pb.shape.stages = std::move(stages);
  pb.paths = enumerate_paths(net, 0, 1);
  pb.capacity = CapacityView(net);
  return pb;
}

DeviceConfig with_stages(int n) {
  DeviceConfig c;
  c.stage_count = n;
  return c;
}

std::set<int> devices_of(const DeploymentPlan& plan) {
  std::set<int> out;
  for (const auto& p : plan.placements) out.insert(p.device);
  return out;
}

TEST(Objective, AllZeroVariables) {
  PlannerProblem pb = line_problem(3, with_stages(2), {predict_stage(1)});
  const auto v = DecisionVars::zeros(1, 2, 3, 1);
  const Objective o = objective(v, pb);
  EXPECT_EQ(o.latency, 0.0);
  EXPECT_EQ(o.devices, 0.0);
  EXPECT_EQ(o.overhead, 0.0);
  EXPECT_EQ(o.total, 0.0);
}

// One device at position 1 of a 3-device path, l_e = l_p = 1, l_t^r = 2,
// l_t^s = 1: 1 + 3 + 2 + 2 = 8.
TEST(Objective, LatencyExample) {
  PlannerProblem pb = line_problem(3, with_stages(2), {predict_stage(1)});
  pb.cost = CostModel{1.0, 1.0, 2.0, 1.0, 0.0, 0.0};
  auto v = DecisionVars::zeros(1, 2, 3, 1);
  v.x[0][0][0] = 1;
  v.y[0] = 1;
  v.z[0] = 1;
  v.c[0][0] = 1;
  const Objective o = objective(v, pb);
  EXPECT_DOUBLE_EQ(o.latency, 8.0);
  EXPECT_DOUBLE_EQ(o.devices, 1.0);
}

TEST(Objective, OverheadGrowsWithLastPosition) {
  PlannerProblem pb = line_problem(4, with_stages(2), {predict_stage(1)});
  pb.cost.request_bytes = 30;
  pb.cost.response_bytes = 4;
  double prev = -1;
  for (int d = 0; d < 4; ++d) {
    DeploymentPlan plan;
    plan.path = pb.paths[0];
    plan.placements = {{d, 0}};
    plan.last_device = d;
    const Objective o = plan_objective(plan, pb);
    EXPECT_GT(o.overhead, prev);
    prev = o.overhead;
    EXPECT_DOUBLE_EQ(o.total, objective(to_decision_vars(plan, pb), pb).total);
  }
}

TEST(Weights, Validation) {
  EXPECT_NO_THROW(Weights{}.validate());
  EXPECT_THROW((Weights{0.5, 0.5, 0.0}.validate()), Error);
  EXPECT_THROW((Weights{0.5, 0.5, 0.5}.validate()), Error);
}

TEST(Solve, SingleProgrammableDeviceIsForced) {
  PlannerProblem pb = line_problem(3, with_stages(4), {predict_stage(1), predict_stage(1), predict_stage(1)});
  NetworkModel net = line(3, with_stages(4));
  net.devices[0].config.programmable = false;
  net.devices[2].config.programmable = false;
  pb.capacity = CapacityView(net);
  const auto plan = solve(pb);
  EXPECT_EQ(plan.placements, (std::vector<Placement>{{1, 0}, {1, 1}, {1, 2}}));
  EXPECT_EQ(plan.last_device, 1);
  EXPECT_TRUE(validate_plan(plan, pb).ok);
}

TEST(Solve, ShortDevicesForceASplit) {
  PlannerProblem pb = line_problem(2, with_stages(2), {predict_stage(1), predict_stage(1), predict_stage(1)});
  const auto plan = solve(pb);
  EXPECT_EQ(devices_of(plan), (std::set<int>{0, 1}));
  EXPECT_EQ(plan.last_device, 1);
  EXPECT_TRUE(validate_plan(plan, pb).ok);
  EXPECT_NEAR(plan.objective.total, oracle::brute_force_plan(pb).best, 1e-9);
}

TEST(Solve, CoLocationGroupsHold) {
  PlannerProblem pb = line_problem(2, with_stages(3), {predict_stage(1, 0, 0), predict_stage(1, 0, 0),
                                                       predict_stage(1, 0, 1), predict_stage(1, 0, 1)});
  const auto plan = solve(pb);
  EXPECT_EQ(plan.placements[0].device, plan.placements[1].device);
  EXPECT_EQ(plan.placements[2].device, plan.placements[3].device);
  EXPECT_TRUE(validate_plan(plan, pb).ok);
  EXPECT_NEAR(plan.objective.total, oracle::brute_force_plan(pb).best, 1e-9);
}

TEST(Solve, UsesPreexistingLoad) {
  DeviceConfig cfg = with_stages(2);
  cfg.sram_capacity = 10;
  PlannerProblem pb = line_problem(2, cfg, {predict_stage(6)});
  pb.capacity.add_usage(0, 0, TableKind::kDtPredict, 0, 5);
  pb.capacity.add_usage(0, 1, TableKind::kDtPredict, 0, 5);
  const auto plan = solve(pb);
  EXPECT_EQ(plan.placements[0].device, 1);
}

TEST(Solve, InfeasibleNamesTheTightestTable) {
  DeviceConfig cfg = with_stages(2);
  cfg.sram_capacity = 10;
  PlannerProblem pb = line_problem(2, cfg, {predict_stage(11)});
  try {
    solve(pb);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
    EXPECT_NE(std::string(e.what()).find("dt_predict[0]"), std::string::npos) << e.what();
  }
  pb = line_problem(2, with_stages(1), {predict_stage(1), predict_stage(1), predict_stage(1)});
  EXPECT_THROW(solve(pb), Error);
}

TEST(Solve, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(77);
  int feasible = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const PlannerProblem pb = oracle::random_instance(rng);
    const auto bf = oracle::brute_force_plan(pb);
    if (!bf.feasible) {
      EXPECT_THROW(solve(pb), Error) << trial;
      continue;
    }
    ++feasible;
    const auto plan = solve(pb);
    EXPECT_NEAR(plan.objective.total, bf.best, 1e-9) << trial;
    const auto v = validate_plan(plan, pb);
    EXPECT_TRUE(v.ok) << trial << ": " << (v.violations.empty() ? "" : v.violations[0]);
  }
  EXPECT_GT(feasible, 50);
}

TEST(Solve, HeavyDeviceWeightMinimisesDevices) {
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 60; ++trial) {
    PlannerProblem pb = oracle::random_instance(rng);
    pb.cost = CostModel{};
    pb.weights = Weights{0.01, 0.98, 0.01};
    const auto bf = oracle::brute_force_plan(pb);
    if (!bf.feasible) continue;
    EXPECT_EQ(static_cast<int>(devices_of(solve(pb)).size()), bf.min_devices) << trial;
  }
}

TEST(Solve, ThreadsDoNotChangeTheAnswer) {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 40; ++trial) {
    PlannerProblem pb = oracle::random_instance(rng);
    if (!oracle::brute_force_plan(pb).feasible) continue;
    const auto one = solve(pb);
    pb.threads = 3;
    const auto many = solve(pb);
    EXPECT_EQ(one.placements, many.placements);
    EXPECT_EQ(one.path_index, many.path_index);
  }
}

TEST(PlanMulti, TreesLandInOrderOnDistinctDevices) {
  PlannerProblem pb = line_problem(2, with_stages(2), {predict_stage(1, 0), predict_stage(1, 0),
                                                       predict_stage(1, 1), predict_stage(1, 1)});
  const auto plans = plan_multi(pb);
  ASSERT_EQ(plans.size(), 2u);
  EXPECT_EQ(devices_of(plans[0]), (std::set<int>{0}));
  EXPECT_EQ(devices_of(plans[1]), (std::set<int>{1}));
  const auto merged = merge_plans(plans, pb);
  EXPECT_EQ(merged.placements, (std::vector<Placement>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
  EXPECT_TRUE(validate_plan(merged, pb).ok);
}

TEST(PlanMulti, HyperplaneGroupsStayTogether) {
  // Two hyperplanes of two co-located stages each; 3 stages per device.
  PlannerProblem pb = line_problem(2, with_stages(3), {predict_stage(1, 0, 0), predict_stage(1, 0, 0),
                                                       predict_stage(1, 1, 1), predict_stage(1, 1, 1)});
  const auto merged = merge_plans(plan_multi(pb), pb);
  EXPECT_EQ(merged.placements[2].device, merged.placements[3].device);
  EXPECT_EQ(merged.placements[2].device, 1);
  EXPECT_TRUE(validate_plan(merged, pb).ok);
}

TEST(PlanMulti, SingleSegmentIsPlainSolve) {
  PlannerProblem pb = line_problem(2, with_stages(2), {predict_stage(1), predict_stage(1)});
  const auto plans = plan_multi(pb);
  ASSERT_EQ(plans.size(), 1u);
  EXPECT_EQ(plans[0].placements, solve(pb).placements);
}

bool has_family(const Validation& v, const std::string& family) {
  for (const auto& s : v.violations) {
    if (s.rfind(family + ":", 0) == 0) return true;
  }
  return false;
}

TEST(ValidatePlan, ReportsEachFamily) {
  DeviceConfig cfg = with_stages(2);
  cfg.sram_capacity = 4;
  PlannerProblem pb = line_problem(2, cfg, {predict_stage(3, 0, 0), predict_stage(3, 0, 0)});
  DeploymentPlan good = solve(pb);
  EXPECT_TRUE(validate_plan(good, pb).ok);

  DeploymentPlan backwards = good;
  backwards.placements = {{1, 0}, {0, 1}};
  backwards.last_device = 0;
  const auto v1 = validate_plan(backwards, pb);
  EXPECT_TRUE(has_family(v1, "dependency"));
  EXPECT_TRUE(has_family(v1, "co-location"));

  DeploymentPlan crowded = good;
  crowded.placements = {{0, 0}, {0, 0}};
  const auto v2 = validate_plan(crowded, pb);
  EXPECT_TRUE(has_family(v2, "resource"));

  DeploymentPlan bad_stage = good;
  bad_stage.placements = {{0, 0}, {0, 5}};
  EXPECT_TRUE(has_family(validate_plan(bad_stage, pb), "resource"));

  DeploymentPlan wrong_last = good;
  wrong_last.last_device = 1 - good.last_device;
  EXPECT_TRUE(has_family(validate_plan(wrong_last, pb), "last-stage"));

  DeploymentPlan wrong_j = good;
  wrong_j.objective.total += 1;
  EXPECT_TRUE(has_family(validate_plan(wrong_j, pb), "objective"));
}

TEST(PlanFile, RoundTrip) {
  PlannerProblem pb = line_problem(3, with_stages(2), {predict_stage(1), predict_stage(1), predict_stage(1)});
  const auto plan = solve(pb);
  const auto back = parse_plan(serialize_plan(plan));
  EXPECT_EQ(back.path, plan.path);
  EXPECT_EQ(back.path_index, plan.path_index);
  EXPECT_EQ(back.placements, plan.placements);
  EXPECT_EQ(back.last_device, plan.last_device);
  EXPECT_DOUBLE_EQ(back.objective.total, plan.objective.total);
  EXPECT_TRUE(validate_plan(back, pb).ok);
  EXPECT_THROW(parse_plan("{}"), Error);
}

}  // namespace
}  // namespace innet
