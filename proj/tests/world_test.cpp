// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>

#include "quadplan/scene_io.hpp"
#include "quadplan/world.hpp"

using namespace quadplan;

namespace {

ObjectSpec box(const std::string& id, Vec3 bottom_center, Vec3 size, bool movable = false, double mass = 1.0) {
  ObjectSpec o;
  o.id = id;
  o.kind = BoxKind{};
  o.pose.position = bottom_center;
  o.size = size;
  o.movable = movable;
  o.mass = mass;
  return o;
}

Scene empty_scene() {
  Scene s;
  place_robot(s.robot, s.limits, -3.0, 0.0, 0.0, Stance::Quadrupedal);
  return s;
}

}  // namespace

TEST(SupportHeight, EmptySceneIsGround) {
  Scene s = empty_scene();
  EXPECT_DOUBLE_EQ(support_height_at(s, 0, 0), 0.0);
}

TEST(SupportHeight, BoxTop) {
  Scene s = empty_scene();
  add_object(s, box("b", {0, 0, 0}, {1, 1, 0.3}));
  EXPECT_DOUBLE_EQ(support_height_at(s, 0, 0), 0.3);
  EXPECT_DOUBLE_EQ(support_height_at(s, 0, 0, std::string_view("b")), 0.0);
}

TEST(SupportHeight, StackedBoxesSum) {
  Scene s = empty_scene();
  add_object(s, box("lower", {0, 0, 0}, {1, 1, 0.3}));
  add_object(s, box("upper", {0, 0, 0.3}, {0.5, 0.5, 0.25}, true));
  validate_scene(s);
  EXPECT_DOUBLE_EQ(support_height_at(s, 0, 0), 0.55);
}

TEST(SupportHeight, OutOfBoundsThrows) {
  Scene s = empty_scene();
  try {
    support_height_at(s, 6.0, 0.0);
    FAIL() << "expected OutOfBounds";
  } catch (const WorldError& e) {
    EXPECT_EQ(e.kind(), WorldError::Kind::OutOfBounds);
  }
}

TEST(SupportHeight, StairsStepsAscendAlongX) {
  Scene s = empty_scene();
  ObjectSpec st;
  st.id = "stairs";
  st.kind = StairsKind{{0.2, 0.3}, 0.5};
  st.pose.position = {1.0, 0.0, 0.0};
  st.size = {1.0, 1.0, 0.5};
  add_object(s, st);
  validate_scene(s);
  EXPECT_DOUBLE_EQ(support_height_at(s, 0.6, 0.0), 0.2);
  EXPECT_DOUBLE_EQ(support_height_at(s, 1.2, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(support_height_at(s, 0.4, 0.0), 0.0);
}

TEST(SupportHeight, MarkersDoNotSupport) {
  Scene s = empty_scene();
  ObjectSpec gap;
  gap.id = "gap";
  gap.kind = GapKind{0.4};
  gap.pose.position = {0, 0, 0};
  gap.size = {0.4, 1.0, 0.01};
  add_object(s, gap);
  EXPECT_DOUBLE_EQ(support_height_at(s, 0, 0), 0.0);
}

// Oracle: sort all objects by top z and return the first that covers the point.
TEST(SupportHeight, MatchesBruteForceScanOverRandomStacks) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    Scene s = empty_scene();
    const int columns = rng.uniform_int(1, 4);
    int n = 0;
    for (int c = 0; c < columns; ++c) {
      const double cx = -3.0 + 2.0 * c;
      double z = 0.0;
      double w = rng.uniform(0.6, 1.2);
      const int height = rng.uniform_int(1, 4);
      for (int k = 0; k < height; ++k) {
        const double h = rng.uniform(0.05, 0.4);
        add_object(s, box("b" + std::to_string(n++), {cx + rng.uniform(-0.05, 0.05), 0, z}, {w, w, h}, k > 0));
        z += h;
        w *= rng.uniform(0.5, 0.95);
      }
    }
    settle(s);
    for (int q = 0; q < 20; ++q) {
      const double x = rng.uniform(-4.5, 4.5);
      const double y = rng.uniform(-0.7, 0.7);
      std::vector<const ObjectSpec*> all;
      for (const auto& [id, o] : s.objects) all.push_back(&o);
      std::sort(all.begin(), all.end(), [](auto* a, auto* b) { return a->top_z() > b->top_z(); });
      double expected = 0.0;
      for (const auto* o : all) {
        const Aabb bb = o->bounds();
        if (x >= bb.min.x && x <= bb.max.x && y >= bb.min.y && y <= bb.max.y) {
          expected = o->top_z();
          break;
        }
      }
      ASSERT_DOUBLE_EQ(support_height_at(s, x, y), expected) << "trial " << trial;
    }
  }
}

TEST(AabbOverlap, IdenticalBoxes) {
  EXPECT_TRUE(aabb_overlap(box("a", {0, 0, 0}, {1, 1, 1}), box("b", {0, 0, 0}, {1, 1, 1})));
}

TEST(AabbOverlap, FarApart) {
  EXPECT_FALSE(aabb_overlap(box("a", {0, 0, 0}, {1, 1, 1}), box("b", {2, 0, 0}, {1, 1, 1})));
}

TEST(AabbOverlap, FaceTouchingIsNotOverlap) {
  EXPECT_FALSE(aabb_overlap(box("a", {0, 0, 0}, {1, 1, 1}), box("b", {1, 0, 0}, {1, 1, 1})));
  EXPECT_TRUE(aabb_overlap(box("a", {0, 0, 0}, {1, 1, 1}), box("b", {0.999, 0, 0}, {1, 1, 1})));
}

namespace {

Scene bell_scene(double prob) {
  Scene s = empty_scene();
  ObjectSpec door;
  door.id = "door";
  door.kind = DoorKind{false};
  door.pose.position = {2, 0, 0};
  door.size = {0.1, 1.0, 2.0};
  add_object(s, door);
  ObjectSpec bell;
  bell.id = "bell";
  bell.kind = BellKind{"doorbell", "door_opened", "door", prob, 5.0};
  bell.pose.position = {1.9, 1.0, 0.6};
  bell.size = {0.02, 0.06, 0.06};
  add_object(s, bell);
  ObjectSpec sw;
  sw.id = "light_button";
  sw.kind = ButtonKind{"light_off", ""};
  sw.pose.position = {1.9, -1.0, 1.2};
  sw.size = {0.02, 0.08, 0.08};
  add_object(s, sw);
  return s;
}

}  // namespace

TEST(FireEvent, LightOffIsRecorded) {
  Scene s = bell_scene(1.0);
  fire_event(s, "light_off");
  EXPECT_TRUE(s.events.contains("light_off"));
}

TEST(FireEvent, DoorbellOpensDoorAfterDelay) {
  Scene s = bell_scene(1.0);
  s.clock = 3.0;
  fire_event(s, "doorbell");
  EXPECT_FALSE(s.object("door").as<DoorKind>().open);
  ASSERT_TRUE(scheduled_time(s, "door_opened").has_value());
  EXPECT_DOUBLE_EQ(*scheduled_time(s, "door_opened"), 8.0);
  advance_clock(s, 7.9);
  EXPECT_FALSE(s.object("door").as<DoorKind>().open);
  const auto fired = advance_clock(s, 8.0);
  ASSERT_EQ(fired.size(), 1u);
  EXPECT_TRUE(s.object("door").as<DoorKind>().open);
  EXPECT_TRUE(s.events.contains("door_opened"));
}

TEST(FireEvent, DoorbellWithZeroProbabilityNeverAnswers) {
  Scene s = bell_scene(0.0);
  fire_event(s, "doorbell");
  advance_clock(s, 100.0);
  EXPECT_FALSE(s.object("door").as<DoorKind>().open);
  EXPECT_FALSE(s.events.contains("door_opened"));
}

TEST(FireEvent, UnknownEventThrows) {
  Scene s = bell_scene(1.0);
  try {
    fire_event(s, "fire_alarm");
    FAIL();
  } catch (const WorldError& e) {
    EXPECT_EQ(e.kind(), WorldError::Kind::UnknownEvent);
  }
}

TEST(FireEvent, EventsAreMonotone) {
  Scene s = bell_scene(1.0);
  fire_event(s, "light_off");
  fire_event(s, "doorbell");
  advance_clock(s, 20);
  fire_event(s, "light_off");
  EXPECT_EQ(s.events, (std::set<std::string>{"light_off", "doorbell", "door_opened"}));
}

TEST(AdvanceClock, FiresInTimeOrder) {
  Scene s = bell_scene(1.0);
  s.scheduled.push_back({4.0, "light_off"});
  s.scheduled.push_back({2.0, "doorbell"});
  const auto fired = advance_clock(s, 10.0);
  ASSERT_EQ(fired.size(), 3u);
  EXPECT_EQ(fired[0], "doorbell");
  EXPECT_EQ(fired[1], "light_off");
  EXPECT_EQ(fired[2], "door_opened");
  EXPECT_DOUBLE_EQ(s.clock, 10.0);
}

TEST(Elevator, CallArrivalAndRide) {
  Scene s = empty_scene();
  s.robot.floor = 2;
  ObjectSpec door;
  door.id = "lift_door";
  door.kind = DoorKind{false};
  door.pose.position = {1, 0, 0};
  door.size = {0.1, 1, 2};
  add_object(s, door);
  ObjectSpec plate;
  plate.id = "cabin";
  plate.kind = PlatformKind{};
  plate.pose.position = {2, 0, -3};
  plate.size = {1.2, 1.2, 0.005};
  add_object(s, plate);
  ObjectSpec call;
  call.id = "call_up";
  call.kind = ElevatorCallKind{Direction::Up, "lift_door", "cabin", 8.0};
  call.pose.position = {0.9, 0.8, 0.6};
  call.size = {0.02, 0.06, 0.06};
  add_object(s, call);
  ObjectSpec panel;
  panel.id = "panel";
  panel.kind = ElevatorPanelKind{{1, 2, 3, 4}, 0.12, 4.0, "lift_door", "cabin"};
  panel.pose.position = {2.58, 0, 0.3};
  panel.size = {0.02, 0.1, 0.48};
  add_object(s, panel);
  s.elevator = ElevatorState{2, std::nullopt, std::nullopt};
  validate_scene(s);

  fire_event(s, "call_up");
  advance_clock(s, 8.0);
  EXPECT_TRUE(s.object("lift_door").as<DoorKind>().open);
  EXPECT_DOUBLE_EQ(s.object("cabin").pose.position.z, 0.0);

  place_robot(s.robot, s.limits, 2.0, 0.0, 0.005, Stance::Quadrupedal);
  s.elevator->selected_floor = 4;
  fire_event(s, "floor_selected");
  EXPECT_FALSE(s.object("lift_door").as<DoorKind>().open);
  advance_clock(s, 8.0 + 8.0);
  EXPECT_EQ(s.robot.floor, 4);
  EXPECT_EQ(s.elevator->cabin_floor, 4);
  EXPECT_TRUE(s.events.contains("floor_reached"));

  const auto p = touch_point(s.object("panel"), 3);
  ASSERT_TRUE(p.has_value());
  EXPECT_NEAR(p->z, 0.3 + 2.5 * 0.12, 1e-12);
}

TEST(Elevator, WrongDirectionDoesNotTravel) {
  Scene s = empty_scene();
  ObjectSpec panel;
  panel.id = "panel";
  panel.kind = ElevatorPanelKind{{1, 2, 3}, 0.12, 4.0, "", ""};
  panel.pose.position = {2.58, 0, 0.3};
  panel.size = {0.02, 0.1, 0.36};
  add_object(s, panel);
  ObjectSpec call;
  call.id = "call_down";
  call.kind = ElevatorCallKind{Direction::Down, "", "", 8.0};
  call.pose.position = {0.9, 0.8, 0.6};
  call.size = {0.02, 0.06, 0.06};
  add_object(s, call);
  s.elevator = ElevatorState{2, std::nullopt, std::nullopt};
  fire_event(s, "call_down");
  advance_clock(s, 10);
  s.elevator->selected_floor = 3;
  fire_event(s, "floor_selected");
  EXPECT_FALSE(scheduled_time(s, "floor_reached").has_value());
}

TEST(Validation, RejectsInterpenetratingStaticObjects) {
  Scene s = empty_scene();
  add_object(s, box("a", {0, 0, 0}, {1, 1, 1}));
  add_object(s, box("b", {0.5, 0, 0}, {1, 1, 1}));
  EXPECT_THROW(validate_scene(s), WorldError);
}

TEST(Validation, RejectsFloatingMovable) {
  Scene s = empty_scene();
  add_object(s, box("a", {0, 0, 0.2}, {1, 1, 1}, true));
  EXPECT_THROW(validate_scene(s), WorldError);
  settle(s);
  EXPECT_NO_THROW(validate_scene(s));
}

TEST(Validation, MovableWallRejected) {
  Scene s = empty_scene();
  ObjectSpec w = box("w", {0, 0, 0}, {1, 1, 1}, true);
  w.kind = WallKind{};
  add_object(s, w);
  EXPECT_THROW(validate_scene(s), WorldError);
}

TEST(Geometry, YawNormalization) {
  EXPECT_DOUBLE_EQ(normalize_yaw(std::numbers::pi), -std::numbers::pi);
  EXPECT_NEAR(normalize_yaw(3 * std::numbers::pi / 2), -std::numbers::pi / 2, 1e-12);
  EXPECT_DOUBLE_EQ(normalize_yaw(0.25), 0.25);
  for (double a = -20; a < 20; a += 0.37) {
    const double w = normalize_yaw(a);
    EXPECT_GE(w, -std::numbers::pi);
    EXPECT_LT(w, std::numbers::pi);
  }
}

TEST(SceneIo, RoundTripIsIdentical) {
  Scene s = bell_scene(0.5);
  add_object(s, box("crate", {-1, 1, 0}, {0.5, 0.5, 0.3}, true, 4.0));
  s.params["target_floor"] = 3;
  const auto doc = scene_to_json(s);
  const Scene back = scene_from_json(doc);
  EXPECT_EQ(back, s);
  EXPECT_EQ(scene_to_json(back).dump(), doc.dump());
}

TEST(SceneIo, RuntimeSnapshotKeepsRngAndSchedule) {
  Scene s = bell_scene(1.0);
  s.rng.uniform();
  fire_event(s, "doorbell");
  const Scene back = scene_from_json(scene_to_json(s, true));
  EXPECT_EQ(back, s);
}

TEST(SceneIo, UnknownKeysRejected) {
  auto doc = scene_to_json(bell_scene(1.0));
  doc["weather"] = "rain";
  EXPECT_THROW(scene_from_json(doc), WorldError);
  doc.erase("weather");
  doc["objects"][0]["colour"] = "red";
  EXPECT_THROW(scene_from_json(doc), WorldError);
}

TEST(SceneIo, SameSeedSameSnapshot) {
  const auto doc = scene_to_json(bell_scene(1.0));
  Scene a = scene_from_json(doc);
  Scene b = scene_from_json(doc);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.rng.uniform(), b.rng.uniform());
  EXPECT_EQ(scene_to_json(a, true).dump(), scene_to_json(b, true).dump());
}

TEST(Rng, TruncatedNormalStaysWithinTwoSigma) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.truncated_normal(0.05);
    ASSERT_LE(std::abs(v), 0.1);
  }
  EXPECT_EQ(rng.truncated_normal(0.0), 0.0);
}
