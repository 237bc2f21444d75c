// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "quadplan/benchmarks.hpp"
#include "quadplan/dsl/parser.hpp"
#include "quadplan/dsl/validator.hpp"
#include "quadplan/executor.hpp"
#include "quadplan/scene_io.hpp"

using namespace quadplan;

namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(QUADPLAN_SOURCE_DIR) + "/" + rel);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

dsl::Program golden(TaskKind task) {
  return dsl::parse_program(slurp("data/plans/golden/" + std::string(task_name(task)) + ".plan"));
}

Scene scene_for(TaskKind task, std::uint64_t seed) {
  TaskConfig cfg;
  cfg.task = task;
  cfg.seed = seed;
  return build_scene(cfg);
}

class PerTask : public ::testing::TestWithParam<TaskKind> {};

}  // namespace

TEST(Scenes, SameSeedSameScene) {
  for (TaskKind t : all_tasks()) {
    EXPECT_EQ(scene_to_json(scene_for(t, 7)), scene_to_json(scene_for(t, 7))) << task_name(t);
    EXPECT_NE(scene_to_json(scene_for(t, 7)), scene_to_json(scene_for(t, 8))) << task_name(t);
  }
}

TEST(Scenes, TaskNamesRoundTrip) {
  for (TaskKind t : all_tasks()) EXPECT_EQ(task_from_name(task_name(t)), t);
  EXPECT_THROW(task_from_name("kitchen"), BenchmarkError);
}

TEST(Scenes, BoxNeededAtTheRangeMassAboveTheLimit) {
  // First rise ~ U[0.25, 0.45] against a 0.35 limit: half the scenes need the box.
  const int n = 10000;
  int needs = 0;
  for (int s = 0; s < n; ++s) needs += light_needs_box(scene_for(TaskKind::LightSwitching, s)) ? 1 : 0;
  const double frac = static_cast<double>(needs) / n;
  // Binomial std at p = 0.5 is 0.005; allow four of them.
  EXPECT_NEAR(frac, 0.5, 0.02);
}

TEST(Scenes, ButtonNeverReachableFromTheGround) {
  for (int s = 0; s < 500; ++s) {
    const Scene sc = scene_for(TaskKind::LightSwitching, s);
    EXPECT_GT(touch_point(sc.object("button"))->z, sc.limits.bipedal_reach_height) << "seed " << s;
  }
}

TEST(Scenes, ElevatorCoversUpAndDown) {
  bool up = false;
  bool down = false;
  for (int s = 0; s < 100; ++s) {
    const Scene sc = scene_for(TaskKind::ElevatorRide, s);
    const int target = static_cast<int>(sc.params.at("target_floor"));
    ASSERT_NE(target, sc.robot.floor);
    (target > sc.robot.floor ? up : down) = true;
  }
  EXPECT_TRUE(up);
  EXPECT_TRUE(down);
}

TEST(Scenes, InfeasibleRangesRaiseAfterResampling) {
  TaskConfig cfg;
  cfg.first_rise = {2.0, 2.5};
  try {
    build_scene(cfg);
    FAIL() << "expected InfeasibleConfig";
  } catch (const BenchmarkError& e) {
    EXPECT_EQ(e.kind(), BenchmarkError::Kind::InfeasibleConfig);
    EXPECT_NE(std::string(e.what()).find("10 draws"), std::string::npos);
  }
  cfg.first_rise = {0.4, 0.3};
  EXPECT_THROW(build_scene(cfg), BenchmarkError);
}

TEST(Scenes, ConfigJsonRoundTrip) {
  TaskConfig cfg;
  cfg.task = TaskKind::PackageDelivery;
  cfg.seed = 42;
  cfg.human_response_prob = 0.0;
  const TaskConfig back = task_config_from_json(task_config_to_json(cfg));
  EXPECT_EQ(task_config_to_json(back), task_config_to_json(cfg));
}

TEST(Scenes, PlannerViewHasNoNumerals) {
  for (TaskKind t : all_tasks()) {
    const auto env = describe(t, scene_for(t, 3));
    EXPECT_FALSE(agents::contains_numeral(env.render_for_planner())) << task_name(t);
    EXPECT_FALSE(env.globals.empty());
  }
}

TEST_P(PerTask, GoldenPlanValidatesClean) {
  const TaskKind t = GetParam();
  std::vector<Scene> scenes;
  for (int s = 0; s < 5; ++s) scenes.push_back(scene_for(t, s));
  const auto faults = dsl::validate_plan(golden(t), scenes);
  for (const auto& f : faults) ADD_FAILURE() << f.rule << " @" << f.location << ": " << f.message;
}

TEST_P(PerTask, GoldenPlanSucceedsWithoutNoise) {
  const TaskKind t = GetParam();
  const dsl::Program plan = golden(t);
  RunConfig cfg;
  cfg.noise = NoiseRegime::zero();
  for (int s = 0; s < 60; ++s) {
    cfg.seed = s;
    const ExecutionTrace tr = execute(plan, scene_for(t, s), cfg);
    EXPECT_TRUE(success(t, tr)) << task_name(t) << " seed " << s << ": " << outcome_name(tr.outcome) << " "
                                << tr.outcome_detail << "\n"
                                << tr.to_jsonl();
    if (HasFailure()) return;
  }
}

TEST_P(PerTask, NormDistStartsAtOneAndNeverIncreases) {
  const TaskKind t = GetParam();
  RunConfig cfg;
  cfg.seed = 1;
  const ExecutionTrace tr = execute(golden(t), scene_for(t, 1), cfg);
  const double initial = task_distance(t, tr.initial_scene, take_snapshot(tr.initial_scene));
  ASSERT_GT(initial, 0.0);
  double running = 1.0;
  for (const auto& e : tr.entries) {
    if (!e.snapshot) continue;
    const double here = std::min(running, task_distance(t, tr.initial_scene, *e.snapshot) / initial);
    EXPECT_LE(here, running);
    running = here;
  }
  EXPECT_DOUBLE_EQ(running, norm_dist(t, tr));
}

INSTANTIATE_TEST_SUITE_P(Tasks, PerTask, ::testing::ValuesIn(all_tasks()),
                         [](const auto& info) { return std::string(task_name(info.param)); });

TEST(Metrics, NoMovementIsOne) {
  const Scene sc = scene_for(TaskKind::BridgeBuilding, 2);
  const ExecutionTrace tr = execute(dsl::parse_program(""), sc, RunConfig{});
  EXPECT_DOUBLE_EQ(norm_dist(TaskKind::BridgeBuilding, tr), 1.0);
  EXPECT_FALSE(success(TaskKind::BridgeBuilding, tr));
}

TEST(Metrics, LightSuccessImpliesContactWithinEpsilon) {
  RunConfig cfg;
  const dsl::Program plan = golden(TaskKind::LightSwitching);
  for (int s = 0; s < 30; ++s) {
    cfg.seed = s;
    const Scene sc = scene_for(TaskKind::LightSwitching, s);
    const ExecutionTrace tr = execute(plan, sc, cfg);
    if (!success(TaskKind::LightSwitching, tr)) continue;
    const double initial = task_distance(TaskKind::LightSwitching, sc, take_snapshot(sc));
    EXPECT_LE(norm_dist(TaskKind::LightSwitching, tr), sc.limits.touch_epsilon / initial + 1e-12);
  }
}

TEST(Metrics, SuccessRespectsTheTimeLimit) {
  RunConfig cfg;
  cfg.noise = NoiseRegime::zero();
  const ExecutionTrace tr = execute(golden(TaskKind::LightSwitching), scene_for(TaskKind::LightSwitching, 4), cfg);
  ASSERT_TRUE(success(TaskKind::LightSwitching, tr));
  EXPECT_FALSE(success(TaskKind::LightSwitching, tr, 5.0));
}

TEST(Metrics, PackageHalfwayThroughTheDoorIsNotDelivered) {
  const Scene sc = scene_for(TaskKind::PackageDelivery, 5);
  Snapshot snap = take_snapshot(sc);
  const double door_far = sc.object("door").bounds().max.x;
  snap.movable["package"].position.x = door_far;
  EXPECT_FALSE(task_done(TaskKind::PackageDelivery, sc, snap));
  snap.movable["package"].position.x = door_far + sc.object("package").size.x / 2 + 0.01;
  EXPECT_TRUE(task_done(TaskKind::PackageDelivery, sc, snap));
}
