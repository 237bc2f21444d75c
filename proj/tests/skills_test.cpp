// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "quadplan/navigation.hpp"
#include "quadplan/skill_catalog.hpp"
#include "quadplan/skills.hpp"

using namespace quadplan;

namespace {

const NoiseRegime kZero = NoiseRegime::zero();

ObjectSpec make(const std::string& id, ObjectKind kind, Vec3 bottom_center, Vec3 size, bool movable = false,
                double mass = 0.0) {
  ObjectSpec o;
  o.id = id;
  o.kind = std::move(kind);
  o.pose.position = bottom_center;
  o.size = size;
  o.movable = movable;
  o.mass = mass;
  return o;
}

Scene ground(double x = 0.0, double y = 0.0) {
  Scene s;
  place_robot(s.robot, s.limits, x, y, 0.0, Stance::Quadrupedal);
  return s;
}

ObjectSpec stairs(const std::string& id, double min_x, std::vector<double> rises, double depth, double width = 1.2) {
  double total = 0;
  for (double r : rises) total += r;
  const double n = static_cast<double>(rises.size());
  return make(id, StairsKind{std::move(rises), depth}, {min_x + n * depth / 2, 0, 0}, {n * depth, width, total});
}

}  // namespace

// --- walk ------------------------------------------------------------------

TEST(Walk, IdentityTakesNoTime) {
  Scene s = ground(1.0, 1.0);
  const auto out = walk_to_position(s, Pose{{1.0, 1.0, 0.0}, 0.0}, std::nullopt, kZero);
  EXPECT_TRUE(out.ok());
  EXPECT_DOUBLE_EQ(out.duration, 0.0);
}

TEST(Walk, TargetInsideInflatedWallIsNoPath) {
  Scene s = ground(-2.0, 0.0);
  add_object(s, make("wall", WallKind{}, {1.0, 0, 0}, {0.2, 4.0, 2.0}));
  const auto out = walk_to_position(s, Pose{{0.75, 0.0, 0.0}, 0.0}, std::nullopt, kZero);
  EXPECT_FALSE(out.ok());
  EXPECT_EQ(out.reason, FailReason::NoPath);
  EXPECT_DOUBLE_EQ(s.clock, 0.0);
}

TEST(Walk, StraightCorridorDurationIsDistanceOverSpeed) {
  Scene s = ground(-2.0, 0.0);
  add_object(s, make("left", WallKind{}, {0, 0.6, 0}, {4.0, 0.2, 1.0}));
  add_object(s, make("right", WallKind{}, {0, -0.6, 0}, {4.0, 0.2, 1.0}));
  const auto out = walk_to_position(s, Pose{{2.0, 0.0, 0.0}, 0.0}, std::nullopt, kZero);
  ASSERT_TRUE(out.ok()) << out.detail;
  EXPECT_DOUBLE_EQ(out.duration, 8.0);
  EXPECT_DOUBLE_EQ(s.robot.base.position.x, 2.0);
}

TEST(Walk, DetoursAroundObstacle) {
  Scene s = ground(-2.0, 0.0);
  add_object(s, make("block", BoxKind{}, {0, 0, 0}, {0.5, 1.0, 0.5}));
  const auto out = walk_to_position(s, Pose{{2.0, 0.0, 0.0}, 0.5}, std::nullopt, kZero);
  ASSERT_TRUE(out.ok()) << out.detail;
  EXPECT_GT(out.duration, 8.0);
  EXPECT_LT(out.duration, 12.0);
  EXPECT_NEAR(s.robot.base.yaw, 0.5, 1e-12);
}

TEST(Walk, AvoidAddsMargin) {
  Scene s = ground(-2.0, 0.0);
  add_object(s, make("crate", BoxKind{}, {0, 0.65, 0}, {0.4, 0.4, 0.3}, true, 3.0));
  const auto plain = Navigator(s, {s.robot.base.position, {2, 0, 0}, 0, s.limits.body_radius(), std::nullopt}).plan();
  NavRequest req{s.robot.base.position, {2, 0, 0}, 0, s.limits.body_radius(), std::string("crate")};
  const auto careful = Navigator(s, req).plan();
  ASSERT_TRUE(plain && careful);
  EXPECT_DOUBLE_EQ(path_length(*plain), 4.0);
  EXPECT_GT(path_length(*careful), 4.0);
}

TEST(Walk, WrongLevelOrStanceFails) {
  Scene s = ground();
  EXPECT_EQ(walk_to_position(s, Pose{{1, 0, 0.3}, 0}, std::nullopt, kZero).reason, FailReason::NoPath);
  stand_up(s, kZero);
  EXPECT_EQ(walk_to_position(s, Pose{{1, 0, 0}, 0}, std::nullopt, kZero).reason, FailReason::BadStance);
}

TEST(Walk, ClosedDoorBlocksOpenDoorPasses) {
  Scene s = ground(-2.0, 0.0);
  add_object(s, make("wall_a", WallKind{}, {0, 2.0, 0}, {0.2, 3.0, 2.0}));
  add_object(s, make("wall_b", WallKind{}, {0, -2.0, 0}, {0.2, 3.0, 2.0}));
  add_object(s, make("door", DoorKind{false}, {0, 0, 0}, {0.2, 1.0, 2.0}));
  s.bounds = {-3, -3.5, 3, 3.5};
  add_object(s, make("wall_c", WallKind{}, {0, 3.45, 0}, {0.2, 0.1, 2.0}));
  add_object(s, make("wall_d", WallKind{}, {0, -3.45, 0}, {0.2, 0.1, 2.0}));
  Scene closed = s;
  EXPECT_EQ(walk_to_position(closed, Pose{{2, 0, 0}, 0}, std::nullopt, kZero).reason, FailReason::NoPath);
  s.object("door").as<DoorKind>().open = true;
  EXPECT_TRUE(walk_to_position(s, Pose{{2, 0, 0}, 0}, std::nullopt, kZero).ok());
}

// --- push ------------------------------------------------------------------

TEST(Push, TargetAtCurrentPoseOnlyApproaches) {
  Scene s = ground(-2.0, 0.0);
  add_object(s, make("box", BoxKind{}, {0, 0, 0}, {0.5, 0.5, 0.2}, true, 5.0));
  const auto out = push_to_position(s, "box", Pose{{0, 0, 0}, 0}, kZero);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(s.object("box").pose.position, (Vec3{0, 0, 0}));
  // Approach from (-2, 0) to the contact pose at x = -(0.25 + 0.3).
  EXPECT_NEAR(out.duration, (2.0 - 0.55) / s.limits.push_speed, 1e-9);
}

TEST(Push, ImmovableOrHeavyIsUnpushable) {
  Scene s = ground(-2.0, 0.0);
  add_object(s, make("fixed", BoxKind{}, {0, 0, 0}, {0.5, 0.5, 0.2}));
  add_object(s, make("heavy", BoxKind{}, {0, 2, 0}, {0.5, 0.5, 0.2}, true, 30.0));
  EXPECT_EQ(push_to_position(s, "fixed", Pose{{1, 0, 0}, 0}, kZero).reason, FailReason::Unpushable);
  EXPECT_EQ(push_to_position(s, "heavy", Pose{{1, 2, 0}, 0}, kZero).reason, FailReason::Unpushable);
}

TEST(Push, RobotEndsBehindObject) {
  Scene s = ground(-2.0, 0.0);
  add_object(s, make("box", BoxKind{}, {0, 0, 0}, {0.5, 0.5, 0.2}, true, 5.0));
  const auto out = push_to_position(s, "box", Pose{{1.0, 0, 0}, 0}, kZero);
  ASSERT_TRUE(out.ok());
  EXPECT_NEAR(s.object("box").pose.position.x, 1.0, 1e-12);
  EXPECT_NEAR(s.robot.base.position.x, 1.0 - 0.25 - 0.3, 1e-12);
  EXPECT_NEAR(out.duration, (1.45 + 1.0) / 0.2, 1e-9);
}

TEST(Push, StopsFlushAgainstStatic) {
  Scene s = ground(-2.0, 0.0);
  add_object(s, make("box", BoxKind{}, {0, 0, 0}, {0.5, 0.5, 0.2}, true, 5.0));
  add_object(s, stairs("stairs", 1.0, {0.4}, 0.7));
  const auto out = push_to_position(s, "box", Pose{{2.0, 0, 0}, 0}, kZero);
  EXPECT_EQ(out.reason, FailReason::Blocked);
  EXPECT_NEAR(s.object("box").bounds().max.x, 1.0, 1e-9);
  EXPECT_NO_THROW(validate_scene(s));
}

TEST(Push, FlushTargetWithNoiseNeverPenetrates) {
  for (int seed = 0; seed < 200; ++seed) {
    Scene s = ground(-2.0, 0.0);
    s.rng = Rng(seed);
    add_object(s, make("box", BoxKind{}, {0, 0, 0}, {0.5, 0.5, 0.2}, true, 5.0));
    add_object(s, stairs("stairs", 1.0, {0.4}, 0.7));
    const auto out = push_to_position(s, "box", Pose{{0.75, 0, 0}, 0}, NoiseRegime::raw());
    ASSERT_TRUE(out.ok());
    ASSERT_LE(s.object("box").bounds().max.x, 1.0 + 1e-9);
    ASSERT_FALSE(aabb_overlap(s.object("box"), s.object("stairs")));
  }
}

TEST(Push, LevelMismatchWhenRobotElevated) {
  Scene s = ground(-2.0, 0.0);
  add_object(s, make("box", BoxKind{}, {0, 0, 0}, {0.5, 0.5, 0.2}, true, 5.0));
  place_robot(s.robot, s.limits, -2.0, 0.0, 0.3, Stance::Quadrupedal);
  EXPECT_EQ(push_to_position(s, "box", Pose{{1.0, 0, 0}, 0}, kZero).reason, FailReason::LevelMismatch);
}

// Oracle: E|(X, Y)| for independent N(0, s^2) truncated to [-2s, 2s], by
// midpoint quadrature over the truncated square.
TEST(Push, TerminalNoiseMatchesTruncatedGaussianOracle) {
  const double sigma = 0.05;
  const int grid = 800;
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double u = -2.0 + 4.0 * (i + 0.5) / grid;
    for (int j = 0; j < grid; ++j) {
      const double v = -2.0 + 4.0 * (j + 0.5) / grid;
      const double w = std::exp(-0.5 * (u * u + v * v));
      num += w * sigma * std::hypot(u, v);
      den += w;
    }
  }
  const double oracle = num / den;
  ASSERT_GT(oracle, 0.03);
  ASSERT_LT(oracle, 0.06);

  Scene base = ground(-3.0, 0.0);
  add_object(base, make("box", BoxKind{}, {-1.0, 0, 0}, {0.5, 0.5, 0.2}, true, 5.0));
  NoiseRegime noise;
  noise.push_terminal_sigma = sigma;
  double total = 0.0;
  const int n = 10000;
  Scene s = base;
  for (int k = 0; k < n; ++k) {
    s.object("box").pose.position = {-1.0, 0, 0};
    place_robot(s.robot, s.limits, -3.0, 0.0, 0.0, Stance::Quadrupedal);
    push_to_position(s, "box", Pose{{1.0, 0, 0}, 0}, noise);
    const Vec3 p = s.object("box").pose.position;
    total += std::hypot(p.x - 1.0, p.y);
  }
  const double mean = total / n;
  EXPECT_GE(mean, 0.03);
  EXPECT_LE(mean, 0.06);
  EXPECT_NEAR(mean, oracle, 0.002);
}

// --- climb -----------------------------------------------------------------

TEST(Climb, FeasibleStairs) {
  Scene s = ground(0.0, 0.0);
  add_object(s, stairs("stairs", 0.5, {0.20, 0.30}, 0.7));
  const auto out = climb_to_position(s, {1.6, 0, 0.5}, kZero);
  ASSERT_TRUE(out.ok()) << out.detail;
  EXPECT_DOUBLE_EQ(s.robot.support_height, 0.5);
  EXPECT_NEAR(out.duration, 1.6 / 0.5 + 2 * 1.5, 1e-12);
}

TEST(Climb, RiseAboveLimitIsStepTooHigh) {
  Scene s = ground(0.0, 0.0);
  add_object(s, stairs("stairs", 0.5, {0.36}, 0.7));
  const auto out = climb_to_position(s, {0.85, 0, 0.36}, kZero);
  EXPECT_EQ(out.reason, FailReason::StepTooHigh);
  ASSERT_TRUE(out.rise.has_value());
  EXPECT_NEAR(*out.rise, 0.36, 1e-12);
  EXPECT_DOUBLE_EQ(s.robot.support_height, 0.0);
}

TEST(Climb, ExactLimitIsFeasible) {
  Scene s = ground(0.0, 0.0);
  add_object(s, stairs("stairs", 0.5, {0.35}, 0.7));
  EXPECT_TRUE(climb_to_position(s, {0.85, 0, 0.35}, kZero).ok());
}

TEST(Climb, ShallowTreadRejected) {
  Scene s = ground(0.0, 0.0);
  add_object(s, stairs("stairs", 0.5, {0.2, 0.2, 0.2}, 0.2));
  add_object(s, make("top", PlatformKind{}, {1.6, 0, 0}, {0.8, 1.2, 0.6}));
  EXPECT_EQ(climb_to_position(s, {1.6, 0, 0.6}, kZero).reason, FailReason::TreadTooShallow);
}

TEST(Climb, TargetInsideStairVolumeIsBadTarget) {
  Scene s = ground(0.0, 0.0);
  add_object(s, stairs("stairs", 0.5, {0.2, 0.3}, 0.7));
  // Center of the stairs volume: z is half the total height.
  const auto out = climb_to_position(s, {1.2, 0, 0.25}, kZero);
  EXPECT_EQ(out.reason, FailReason::BadTarget);
}

TEST(Climb, BodyMustFitOnFinalSurface) {
  Scene s = ground(0.0, 0.0);
  add_object(s, stairs("stairs", 0.5, {0.2, 0.3}, 0.7));
  // Target near the front edge of the top step; the back half hangs over step one.
  EXPECT_EQ(climb_to_position(s, {1.3, 0, 0.5}, kZero).reason, FailReason::BadTarget);
}

TEST(Climb, ShortGapIsSteppedOver) {
  Scene s = ground(0.0, 0.0);
  add_object(s, make("a", PlatformKind{}, {1.0, 0, 0}, {1.0, 1.2, 0.3}));
  add_object(s, make("b", PlatformKind{}, {2.04, 0, 0}, {1.0, 1.2, 0.3}));
  place_robot(s.robot, s.limits, 1.0, 0.0, 0.3, Stance::Quadrupedal);
  EXPECT_TRUE(climb_to_position(s, {2.1, 0, 0.3}, kZero).ok());
}

TEST(Climb, WideGapIsADrop) {
  Scene s = ground(0.0, 0.0);
  add_object(s, make("a", PlatformKind{}, {1.0, 0, 0}, {1.0, 1.2, 0.45}));
  add_object(s, make("b", PlatformKind{}, {2.9, 0, 0}, {1.0, 1.2, 0.45}));
  place_robot(s.robot, s.limits, 1.0, 0.0, 0.45, Stance::Quadrupedal);
  const auto out = climb_to_position(s, {2.9, 0, 0.45}, kZero);
  EXPECT_EQ(out.reason, FailReason::StepTooHigh);
  EXPECT_NEAR(*out.rise, 0.45, 1e-12);
}

TEST(Climb, SlipEndsOnLastStableSurface) {
  Scene s = ground(0.0, 0.0);
  add_object(s, stairs("stairs", 0.5, {0.2, 0.3}, 0.7));
  NoiseRegime noise;
  noise.climb_slip_prob = 1.0;
  const auto out = climb_to_position(s, {1.6, 0, 0.5}, noise);
  EXPECT_EQ(out.reason, FailReason::Slip);
  EXPECT_EQ(s.robot.stance, Stance::Quadrupedal);
  EXPECT_DOUBLE_EQ(s.robot.support_height, 0.0);

  Scene hard = ground(0.0, 0.0);
  hard.limits.hard_fall = true;
  add_object(hard, stairs("stairs", 0.5, {0.2, 0.3}, 0.7));
  climb_to_position(hard, {1.6, 0, 0.5}, noise);
  EXPECT_EQ(hard.robot.stance, Stance::Fallen);
  EXPECT_TRUE(recover(hard, kZero).ok());
  EXPECT_EQ(hard.robot.stance, Stance::Quadrupedal);
}

// Oracle: a stair stack is climbable iff every individual rise, the first one
// from the ground included, is within the limit.
TEST(Climb, VerdictMatchesBruteForceRiseEnumeration) {
  Rng rng(2024);
  int agree = 0;
  int feasible_count = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = rng.uniform_int(1, 5);
    std::vector<double> rises;
    for (int k = 0; k < n; ++k) rises.push_back(rng.uniform() < 0.1 ? 0.0 : rng.uniform(0.05, 0.5));
    if (rises.back() == 0.0) rises.back() = 0.1;
    bool brute = true;
    for (double r : rises) brute = brute && r <= 0.35;
    feasible_count += brute;

    Scene s = ground(-0.5, 0.0);
    add_object(s, stairs("stairs", 0.0, rises, 0.55));
    double top = 0;
    for (double r : rises) top += r;
    const double x = (n - 0.5) * 0.55;
    for (double slip : {0.0, 0.5}) {
      NoiseRegime noise;
      noise.climb_slip_prob = slip;
      Scene run = s;
      const auto out = climb_to_position(run, {x, 0, top}, noise);
      const bool verdict = out.reason != FailReason::StepTooHigh && out.reason != FailReason::TreadTooShallow &&
                           out.reason != FailReason::BadTarget;
      ASSERT_EQ(verdict, brute) << "trial " << trial << " reason " << fail_reason_name(out.reason);
    }
    ++agree;
  }
  EXPECT_EQ(agree, 1000);
  EXPECT_GT(feasible_count, 50);
  EXPECT_LT(feasible_count, 950);
}

// --- bipedal ---------------------------------------------------------------

TEST(Stand, QuadrupedalToBipedal) {
  Scene s = ground();
  const auto out = stand_up(s, kZero);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(s.robot.stance, Stance::Bipedal);
  ASSERT_TRUE(s.robot.toe.has_value());
  EXPECT_DOUBLE_EQ(out.duration, 3.0);
  EXPECT_NO_THROW(validate_scene(s));
}

TEST(Stand, AlreadyBipedalIsBadStance) {
  Scene s = ground();
  stand_up(s, kZero);
  EXPECT_EQ(stand_up(s, kZero).reason, FailReason::BadStance);
}

TEST(Stand, LowCeilingIsNoClearance) {
  Scene s = ground();
  add_object(s, make("shelf", PlatformKind{}, {0, 0, 0.5}, {2, 2, 0.1}));
  EXPECT_EQ(stand_up(s, kZero).reason, FailReason::NoClearance);
}

TEST(Touch, TargetAtToeSucceeds) {
  Scene s = ground();
  stand_up(s, kZero);
  const Vec3 toe = *s.robot.toe;
  const auto out = hand_touch_position(s, toe, kZero);
  EXPECT_TRUE(out.ok());
  EXPECT_NEAR(*out.min_distance, 0.0, 1e-12);
}

TEST(Touch, TooHighIsOutOfReach) {
  Scene s = ground();
  stand_up(s, kZero);
  const Vec3 target{0.1, 0, s.limits.bipedal_reach_height + 0.10};
  const auto out = hand_touch_position(s, target, kZero);
  EXPECT_EQ(out.reason, FailReason::OutOfReach);
  EXPECT_GE(*out.min_distance, 0.10 - 1e-12);
}

TEST(Touch, ButtonOnEnvelopeBoundaryFires) {
  Scene s = ground();
  stand_up(s, kZero);
  // Horizontal distance exactly reach_radius, height exactly the ceiling.
  add_object(s, make("button", ButtonKind{"light_off", ""}, {0.35, 0, 0.85 - 0.04}, {0.02, 0.08, 0.08}));
  const auto out = hand_touch_position(s, {0.35, 0, 0.85}, kZero);
  EXPECT_TRUE(out.ok()) << out.detail;
  EXPECT_TRUE(s.events.contains("light_off"));
}

// Oracle: sample poses and targets; success must imply membership of the
// closed envelope computed independently from the limits.
TEST(Touch, EnvelopeSoundnessUnderSampling) {
  Rng rng(99);
  NoiseRegime noise;
  noise.touch_jitter_sigma = 0.02;
  for (int k = 0; k < 10000; ++k) {
    Scene s = ground(rng.uniform(-1, 1), rng.uniform(-1, 1));
    s.rng = Rng(k);
    const double support = rng.uniform() < 0.5 ? 0.0 : 0.4;
    if (support > 0) {
      add_object(s, make("deck", PlatformKind{}, {0, 0, 0}, {4, 4, 0.4}));
      place_robot(s.robot, s.limits, s.robot.base.position.x, s.robot.base.position.y, 0.4, Stance::Quadrupedal);
    }
    stand_up(s, kZero);
    const Vec3 base = s.robot.base.position;
    const Vec3 target{base.x + rng.uniform(-0.5, 0.5), base.y + rng.uniform(-0.5, 0.5), support + rng.uniform(-0.2, 1.1)};
    const bool inside = std::hypot(target.x - base.x, target.y - base.y) <= 0.35 + 1e-9 &&
                        target.z >= support - 1e-9 && target.z <= support + 0.85 + 1e-9;
    const auto out = hand_touch_position(s, target, rng.uniform() < 0.5 ? kZero : noise);
    if (out.ok()) {
      ASSERT_TRUE(inside);
    }
    if (inside && std::abs(target.z - support - 0.85) > 1e-6) {
      // Zero-jitter touches inside the envelope always succeed.
      Scene again = s;
      again.robot.toe = default_toe(again.robot);
      ASSERT_TRUE(hand_touch_position(again, target, kZero).ok());
    }
    ASSERT_GE(*out.min_distance, 0.0);
  }
}

TEST(Sit, Transitions) {
  Scene s = ground();
  EXPECT_EQ(sit_down(s, kZero).reason, FailReason::BadStance);
  stand_up(s, kZero);
  const auto out = sit_down(s, kZero);
  EXPECT_TRUE(out.ok());
  EXPECT_DOUBLE_EQ(out.duration, 2.0);
  EXPECT_EQ(s.robot.stance, Stance::Quadrupedal);
  place_robot(s.robot, s.limits, 0, 0, 0, Stance::Fallen);
  EXPECT_EQ(sit_down(s, kZero).reason, FailReason::BadStance);
}

TEST(Recover, AlwaysEndsQuadrupedal) {
  Scene s = ground();
  const auto idle = recover(s, kZero);
  EXPECT_TRUE(idle.ok());
  EXPECT_DOUBLE_EQ(idle.duration, 0.0);
  stand_up(s, kZero);
  const auto out = recover(s, kZero);
  EXPECT_TRUE(out.ok());
  EXPECT_DOUBLE_EQ(out.duration, 4.0);
  EXPECT_EQ(s.robot.stance, Stance::Quadrupedal);
  EXPECT_FALSE(s.robot.toe.has_value());
}

namespace {

Scene bell_scene(double prob) {
  Scene s = ground();
  add_object(s, make("door", DoorKind{false}, {2, 0, 0}, {0.1, 1, 2}));
  add_object(s, make("bell", BellKind{"doorbell", "door_opened", "door", prob, 5.0}, {1.9, 1, 0.5}, {0.02, 0.06, 0.06}));
  return s;
}

}  // namespace

TEST(Wait, AlreadyFiredIsImmediate) {
  Scene s = bell_scene(1.0);
  fire_event(s, "doorbell");
  advance_clock(s, 6);
  const auto out = wait_for_event(s, "door_opened", 10, kZero);
  EXPECT_TRUE(out.ok());
  EXPECT_DOUBLE_EQ(out.duration, 0.0);
}

TEST(Wait, ScriptedFireWithinTimeout) {
  Scene s = bell_scene(1.0);
  fire_event(s, "doorbell");
  const auto out = wait_for_event(s, "door_opened", 10, kZero);
  EXPECT_TRUE(out.ok());
  EXPECT_DOUBLE_EQ(out.duration, 5.0);
  EXPECT_TRUE(s.object("door").as<DoorKind>().open);
}

TEST(Wait, NoResponseTimesOut) {
  Scene s = bell_scene(0.0);
  fire_event(s, "doorbell");
  const auto out = wait_for_event(s, "door_opened", 10, kZero);
  EXPECT_EQ(out.reason, FailReason::Timeout);
  EXPECT_DOUBLE_EQ(out.duration, 10.0);
  EXPECT_THROW(wait_for_event(s, "door_opened", 0.0, kZero), SkillError);
  EXPECT_THROW(wait_for_event(s, "nothing", 1.0, kZero), SkillError);
}

// --- properties ------------------------------------------------------------

namespace {

Scene property_scene() {
  Scene s = ground(-2.0, 0.0);
  add_object(s, stairs("stairs", 1.0, {0.2, 0.25}, 0.7));
  add_object(s, make("box", BoxKind{}, {-0.5, 1.5, 0}, {0.5, 0.5, 0.2}, true, 5.0));
  add_object(s, make("button", ButtonKind{"light_off", ""}, {2.3, 0, 1.0}, {0.02, 0.08, 0.08}));
  return s;
}

SkillInvocation random_call(Rng& rng) {
  switch (rng.uniform_int(0, 6)) {
    case 0: return {"walk_to_position", {rng.uniform(-3, 0.5), rng.uniform(-2, 2), 0.0, rng.uniform(-3, 3)}};
    case 1: return {"push_to_position", {std::string("box"), rng.uniform(-2, 0.5), rng.uniform(-2, 2), 0.0}};
    case 2: return {"climb_to_position", {rng.uniform(-1, 2.2), rng.uniform(-0.4, 0.4), rng.uniform() < 0.5 ? 0.45 : 0.2}};
    case 3: return {"stand_up", {}};
    case 4: return {"hand_touch_position", {rng.uniform(-2, 2.4), rng.uniform(-1, 1), rng.uniform(0, 1.4)}};
    case 5: return {"sit_down", {}};
    default: return {"recover", {}};
  }
}

}  // namespace

TEST(Properties, StanceMachineAndClockAdditivity) {
  Rng pick(5);
  for (int run = 0; run < 200; ++run) {
    Scene s = property_scene();
    s.rng = Rng(run);
    NoiseRegime noise = NoiseRegime::raw();
    noise.climb_slip_prob = 0.3;
    s.limits.hard_fall = run % 2 == 0;
    double total = 0.0;
    for (int k = 0; k < 12; ++k) {
      const Stance before = s.robot.stance;
      const auto call = random_call(pick);
      const auto out = invoke_skill(s, call, noise);
      total += out.duration;
      const Stance after = s.robot.stance;
      if (before != after) {
        const bool legal = (call.name == "stand_up" && before == Stance::Quadrupedal && after == Stance::Bipedal) ||
                           (call.name == "sit_down" && before == Stance::Bipedal && after == Stance::Quadrupedal) ||
                           (call.name == "recover" && after == Stance::Quadrupedal) ||
                           (out.reason == FailReason::Slip && after == Stance::Fallen);
        ASSERT_TRUE(legal) << call.name << " " << stance_name(before) << "->" << stance_name(after);
      }
      ASSERT_GE(out.duration, 0.0);
      ASSERT_NEAR(s.clock, total, 1e-9);
      ASSERT_EQ(s.robot.toe.has_value(), s.robot.stance == Stance::Bipedal);
    }
  }
}

TEST(Properties, ZeroNoiseRepeatability) {
  Rng pick(8);
  std::vector<SkillInvocation> calls;
  for (int k = 0; k < 40; ++k) calls.push_back(random_call(pick));
  Scene a = property_scene();
  Scene b = property_scene();
  for (const auto& c : calls) {
    invoke_skill(a, c, kZero);
    invoke_skill(b, c, kZero);
  }
  EXPECT_EQ(a, b);
}

TEST(Properties, ClimbVerdictIndependentOfNoise) {
  Rng rng(17);
  for (int k = 0; k < 300; ++k) {
    Scene s = property_scene();
    const Vec3 target{rng.uniform(-1, 2.2), rng.uniform(-0.5, 0.5), rng.uniform() < 0.5 ? 0.45 : 0.0};
    NoiseRegime heavy;
    heavy.climb_slip_prob = 0.9;
    Scene quiet = s;
    Scene noisy = s;
    const auto a = climb_to_position(quiet, target, kZero);
    const auto b = climb_to_position(noisy, target, heavy);
    const bool a_geom = !a.ok() && a.reason != FailReason::Slip;
    const bool b_geom = !b.ok() && b.reason != FailReason::Slip;
    ASSERT_EQ(a_geom, b_geom);
    if (a_geom) {
      ASSERT_EQ(a.reason, b.reason);
    }
  }
}

TEST(Dispatch, RejectsBadCalls) {
  Scene s = ground();
  EXPECT_THROW(invoke_skill(s, {"fly_to", {}}, kZero), SkillError);
  EXPECT_THROW(invoke_skill(s, {"stand_up", {1.0}}, kZero), SkillError);
  EXPECT_THROW(invoke_skill(s, {"push_to_position", {1.0, 1.0, 1.0, 0.0}}, kZero), SkillError);
  EXPECT_THROW(invoke_skill(s, {"push_to_position", {std::string("ghost"), 1.0, 1.0, 0.0}}, kZero), SkillError);
}

TEST(Noise, Presets) {
  const auto raw = NoiseRegime::preset("raw");
  const auto fine = NoiseRegime::preset("chained-finetuned");
  EXPECT_DOUBLE_EQ(fine.push_terminal_sigma * 2, raw.push_terminal_sigma);
  EXPECT_DOUBLE_EQ(fine.climb_slip_prob * 2, raw.climb_slip_prob);
  EXPECT_EQ(NoiseRegime::preset("zero"), NoiseRegime{});
  EXPECT_THROW(NoiseRegime::preset("wild"), std::invalid_argument);
}

TEST(Catalog, ExactlyTheExposedSkills) {
  const auto& cat = SkillCatalog::standard();
  std::vector<std::string> names;
  for (const auto& [n, sig] : cat.entries()) names.push_back(n);
  EXPECT_EQ(names, (std::vector<std::string>{"climb_to_position", "hand_touch_position", "push_to_position",
                                             "recover", "sit_down", "stand_up", "wait_for_event",
                                             "walk_to_position"}));
  EXPECT_EQ(cat.find("walk_to_position")->signature_text(), "walk_to_position(x, y, z, yaw[, avoid])");
}

TEST(Catalog, DocsFileMatchesRenderedCatalog) {
  std::ifstream in(std::string(QUADPLAN_SOURCE_DIR) + "/docs/skills.md");
  ASSERT_TRUE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::string body = SkillCatalog::standard().render_text();
  EXPECT_NE(text.find(body), std::string::npos) << "docs/skills.md is stale; regenerate with `quadplan catalog`";
}
