// SPDX-License-Identifier: Apache-2.0
#include "quadplan/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quadplan/skill_catalog.hpp"

namespace quadplan {

namespace {

constexpr int kMaxAttempts = 10;

struct TaskInfo {
  TaskKind task;
  std::string_view name;
};

constexpr TaskInfo kTasks[] = {
    {TaskKind::LightSwitching, "light"},
    {TaskKind::PackageDelivery, "delivery"},
    {TaskKind::BridgeBuilding, "bridge"},
    {TaskKind::ElevatorRide, "elevator"},
};

[[noreturn]] void infeasible(const std::string& why) {
  throw BenchmarkError(BenchmarkError::Kind::InfeasibleConfig, why);
}

/// Draws with the configured relative jitter around a nominal value.
double jitter(Rng& rng, double nominal, double rel) { return nominal * rng.uniform(1.0 - rel, 1.0 + rel); }

ObjectSpec make(std::string id, ObjectKind kind, Vec3 bottom_center, Vec3 size) {
  ObjectSpec o;
  o.id = std::move(id);
  o.kind = std::move(kind);
  o.pose.position = bottom_center;
  o.size = size;
  return o;
}

/// Solid slab spanning [x0, x1] x [y0, y1] from the ground up to `height`.
ObjectSpec slab(std::string id, ObjectKind kind, double x0, double x1, double y0, double y1, double height) {
  return make(std::move(id), std::move(kind), {(x0 + x1) / 2, (y0 + y1) / 2, 0.0}, {x1 - x0, y1 - y0, height});
}

Scene blank(std::uint64_t seed, TaskKind task) {
  Scene s;
  s.seed = seed;
  s.rng = Rng(mix_seed(seed, 0x5CE7E + static_cast<std::uint64_t>(task)));
  return s;
}

void place_start(Scene& s, double x, double y) {
  place_robot(s.robot, s.limits, x, y, 0.0, Stance::Quadrupedal);
  s.robot.base.yaw = 0.0;
}

void check_common(const Scene& s) {
  try {
    validate_scene(s);
  } catch (const WorldError& e) {
    infeasible(e.what());
  }
  const Aabb body = robot_body_bounds(s.robot, s.limits);
  for (const auto& [id, obj] : s.objects) {
    if (obj.solid() && overlaps_with_volume(body, obj.bounds())) infeasible("robot starts inside " + id);
  }
  if (!s.bounds.contains(s.robot.base.position.x, s.robot.base.position.y)) infeasible("robot starts out of bounds");
}

// --- (a) light switching ----------------------------------------------------

Scene light_scene(const TaskConfig& cfg, Rng& rng) {
  Scene s = blank(cfg.seed, cfg.task);
  const double xw = rng.uniform(2.8, 3.2);
  const double r1 = rng.uniform(cfg.first_rise.lo, cfg.first_rise.hi);
  const double r2 = rng.uniform(0.2, 0.3);
  const double depth = rng.uniform(0.65, 0.75);
  const double sy = rng.uniform(-0.5, 0.5);
  const double top = r1 + r2;

  add_object(s, slab("wall", WallKind{}, xw, xw + 0.2, -2.0, 2.0, 2.5));
  ObjectSpec stairs = make("stairs", StairsKind{{r1, r2}, depth}, {xw - depth, sy, 0.0}, {2 * depth, 1.2, top});
  add_object(s, stairs);

  const double by = sy + rng.uniform(-0.2, 0.2);
  const double bz = top + rng.uniform(0.45, 0.75);
  add_object(s, make("button", ButtonKind{"light_off", ""}, {xw - 0.01, by, bz - 0.04}, {0.02, 0.08, 0.08}));

  ObjectSpec box = make("box", BoxKind{},
                        {xw - 2 * depth - rng.uniform(1.0, 1.6),
                         sy + (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(1.0, 1.5), 0.0},
                        {jitter(rng, 0.5, cfg.size_jitter), jitter(rng, 0.6, cfg.size_jitter),
                         jitter(rng, 0.22, cfg.size_jitter)});
  box.movable = true;
  box.mass = jitter(rng, 5.0, cfg.mass_jitter);
  add_object(s, box);

  place_start(s, xw - 2 * depth - 3.0 + rng.uniform(-cfg.pose_jitter, cfg.pose_jitter) * 0.5,
              rng.uniform(-0.5, 0.5));

  check_common(s);
  const double reach = s.limits.bipedal_reach_height;
  if (bz <= reach) infeasible("button within reach from the ground");
  if (bz - top > reach - 0.05) infeasible("button out of reach from the top step");
  if (bz + 0.04 > 2.5) infeasible("button above the wall");
  if (r2 > s.limits.max_step_height) infeasible("second rise above the step limit");
  const double h = s.object("box").size.z;
  if (r1 > s.limits.max_step_height && (h > s.limits.max_step_height || r1 - h > s.limits.max_step_height)) {
    infeasible("box does not split the first rise");
  }
  return s;
}

// --- (b) package delivery ---------------------------------------------------

Scene delivery_scene(const TaskConfig& cfg, Rng& rng) {
  Scene s = blank(cfg.seed, cfg.task);
  const double xd = rng.uniform(1.0, 1.4);
  const double dy = rng.uniform(-0.4, 0.4);
  const double half_door = 0.5;

  add_object(s, slab("wall_south", WallKind{}, xd, xd + 0.2, s.bounds.min_y, dy - half_door, 2.5));
  add_object(s, slab("wall_north", WallKind{}, xd, xd + 0.2, dy + half_door, s.bounds.max_y, 2.5));
  add_object(s, slab("door", DoorKind{false}, xd, xd + 0.2, dy - half_door, dy + half_door, 2.1));

  BellKind bell{"bell_rung", "door_opened", "door", cfg.human_response_prob, rng.uniform(3.0, 6.0)};
  const double bell_z = rng.uniform(0.55, 0.7);
  add_object(s, make("bell", bell, {xd - 0.01, dy + 0.8, bell_z - 0.05}, {0.02, 0.1, 0.1}));
  const double switch_z = rng.uniform(0.6, 0.8);
  add_object(s, make("door_switch", ButtonKind{"door_switch_pressed", "door"}, {xd - 0.01, dy - 0.8, switch_z - 0.04},
                     {0.02, 0.08, 0.08}));

  const double side = jitter(rng, 0.45, cfg.size_jitter * 0.5);
  ObjectSpec pkg = make("package", PackageKind{},
                        {xd - rng.uniform(2.0, 2.6), dy + rng.uniform(-cfg.pose_jitter, cfg.pose_jitter), 0.0},
                        {side, side, rng.uniform(0.3, 0.4)});
  pkg.movable = true;
  pkg.mass = jitter(rng, 4.0, 0.5);
  add_object(s, pkg);

  // The spot the package is scored against: the doorway center, one meter into the room.
  s.params["spot_x"] = xd + 0.1 + 1.0;
  s.params["spot_y"] = dy;

  place_start(s, xd - 4.2, dy + rng.uniform(-0.5, 0.5));
  check_common(s);
  if (pkg.size.y > 2 * half_door - 0.3) infeasible("package wider than the doorway allows");
  return s;
}

// --- (c) bridge building ----------------------------------------------------

Scene bridge_scene(const TaskConfig& cfg, Rng& rng) {
  Scene s = blank(cfg.seed, cfg.task);
  const double ha = rng.uniform(0.4, 0.5);
  const double w = rng.uniform(0.32, 0.45);
  const double depth = 0.7;
  const double x0 = rng.uniform(-0.3, 0.3);

  add_object(s, make("stairs", StairsKind{{ha / 2, ha / 2}, depth}, {x0 + depth, 0.0, 0.0}, {2 * depth, 1.2, ha}));
  const double gap_x = x0 + 2 * depth + w / 2;
  add_object(s, make("gap", GapKind{w}, {gap_x, 0.0, 0.0}, {w, 1.2, 0.01}));
  add_object(s, slab("platform", PlatformKind{}, x0 + 2 * depth + w, x0 + 2 * depth + w + 1.2, -0.6, 0.6, ha));

  ObjectSpec box = make("box", BoxKind{}, {gap_x, (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(1.3, 1.8), 0.0},
                        {w - rng.uniform(0.02, 0.06), jitter(rng, 0.6, cfg.size_jitter * 0.5),
                         ha + rng.uniform(-0.05, 0.05)});
  box.movable = true;
  box.mass = jitter(rng, 5.0, cfg.mass_jitter);
  add_object(s, box);

  place_start(s, x0 - rng.uniform(1.5, 2.5), rng.uniform(-0.5, 0.5));
  check_common(s);
  if (ha / 2 > s.limits.max_step_height) infeasible("stair rise above the step limit");
  if (s.object("box").size.x < s.limits.step_depth_min) infeasible("box too shallow to step on");
  return s;
}

// --- (d) elevator ride ------------------------------------------------------

Scene elevator_scene(const TaskConfig& cfg, Rng& rng) {
  if (cfg.floors < 2) infeasible("an elevator needs at least two floors");
  Scene s = blank(cfg.seed, cfg.task);
  const double xe = rng.uniform(1.2, 1.6);
  const double half_door = 0.5;
  const double spacing = 0.12;

  add_object(s, slab("wall_south", WallKind{}, xe, xe + 0.2, s.bounds.min_y, -half_door, 2.5));
  add_object(s, slab("wall_north", WallKind{}, xe, xe + 0.2, half_door, s.bounds.max_y, 2.5));
  add_object(s, slab("elevator_door", DoorKind{false}, xe, xe + 0.2, -half_door, half_door, 2.1));
  add_object(s, slab("cabin_left", WallKind{}, xe + 0.2, xe + 2.0, 0.8, 1.0, 2.5));
  add_object(s, slab("cabin_right", WallKind{}, xe + 0.2, xe + 2.0, -1.0, -0.8, 2.5));
  add_object(s, slab("cabin_back", WallKind{}, xe + 1.8, xe + 2.0, -0.8, 0.8, 2.5));
  ObjectSpec plate = slab("cabin", PlatformKind{}, xe + 0.2, xe + 1.8, -0.8, 0.8, 0.005);
  plate.pose.position.z = -3.0;
  add_object(s, plate);

  const double delay = rng.uniform(5.0, 10.0);
  const double up_z = rng.uniform(0.7, 0.8);
  const double down_z = rng.uniform(0.7, 0.8);
  add_object(s, make("call_up", ElevatorCallKind{Direction::Up, "elevator_door", "cabin", delay},
                     {xe - 0.01, 0.8, up_z - 0.04}, {0.02, 0.08, 0.08}));
  add_object(s, make("call_down", ElevatorCallKind{Direction::Down, "elevator_door", "cabin", delay},
                     {xe - 0.01, -0.8, down_z - 0.04}, {0.02, 0.08, 0.08}));

  std::vector<int> floors;
  for (int f = 1; f <= cfg.floors; ++f) floors.push_back(f);
  const double panel_z = rng.uniform(0.3, 0.35);
  add_object(s, make("panel", ElevatorPanelKind{floors, spacing, 4.0, "elevator_door", "cabin"},
                     {xe + 1.79, rng.uniform(-0.3, 0.3), panel_z}, {0.02, 0.1, spacing * cfg.floors}));

  const int current = rng.uniform_int(1, cfg.floors);
  int target = rng.uniform_int(1, cfg.floors - 1);
  if (target >= current) ++target;
  place_start(s, xe - rng.uniform(2.0, 2.6), rng.uniform(-0.6, 0.6));
  s.robot.floor = current;
  s.elevator = ElevatorState{rng.uniform_int(1, cfg.floors), std::nullopt, std::nullopt};
  s.params["target_floor"] = target;

  check_common(s);
  const double top_button = panel_z + (cfg.floors - 0.5) * spacing;
  if (top_button > 0.005 + s.limits.bipedal_reach_height - 0.05) infeasible("top panel button out of reach");
  return s;
}

Vec3 light_button(const Scene& initial) { return *touch_point(initial.object("button")); }

Vec3 elevator_button(const Scene& initial) {
  const int target = static_cast<int>(initial.params.at("target_floor"));
  return *touch_point(initial.object("panel"), target);
}

double toe_distance(const RobotState& robot, const RobotLimits& limits, Vec3 target) {
  if (robot.stance == Stance::Bipedal && robot.toe) return distance(*robot.toe, target);
  const Aabb body = robot_body_bounds(robot, limits);
  return distance(body.clamp(target), target);
}

Snapshot initial_snapshot(const ExecutionTrace& trace) { return take_snapshot(trace.initial_scene); }

}  // namespace

std::string_view task_name(TaskKind task) {
  for (const auto& t : kTasks) {
    if (t.task == task) return t.name;
  }
  return "unknown";
}

TaskKind task_from_name(std::string_view name) {
  for (const auto& t : kTasks) {
    if (t.name == name) return t.task;
  }
  throw BenchmarkError(BenchmarkError::Kind::UnknownTask, "unknown task '" + std::string(name) + "'");
}

const std::vector<TaskKind>& all_tasks() {
  static const std::vector<TaskKind> tasks{TaskKind::LightSwitching, TaskKind::PackageDelivery,
                                           TaskKind::BridgeBuilding, TaskKind::ElevatorRide};
  return tasks;
}

void TaskConfig::check() const {
  if (!(first_rise.lo >= 0 && first_rise.hi >= first_rise.lo)) infeasible("first_rise range is empty or negative");
  if (!(size_jitter >= 0 && size_jitter < 1 && pose_jitter >= 0 && mass_jitter >= 0 && mass_jitter < 1)) {
    infeasible("jitter out of range");
  }
  if (!(human_response_prob >= 0 && human_response_prob <= 1)) infeasible("human_response_prob outside [0, 1]");
  if (floors < 2) infeasible("floors must be at least 2");
}

nlohmann::json task_config_to_json(const TaskConfig& cfg) {
  return {{"task", task_name(cfg.task)},
          {"seed", cfg.seed},
          {"first_rise", {cfg.first_rise.lo, cfg.first_rise.hi}},
          {"size_jitter", cfg.size_jitter},
          {"pose_jitter", cfg.pose_jitter},
          {"mass_jitter", cfg.mass_jitter},
          {"human_response_prob", cfg.human_response_prob},
          {"floors", cfg.floors}};
}

TaskConfig task_config_from_json(const nlohmann::json& doc) {
  TaskConfig cfg;
  cfg.task = task_from_name(doc.at("task").get<std::string>());
  cfg.seed = doc.value("seed", std::uint64_t{0});
  if (doc.contains("first_rise")) {
    cfg.first_rise = {doc.at("first_rise").at(0).get<double>(), doc.at("first_rise").at(1).get<double>()};
  }
  cfg.size_jitter = doc.value("size_jitter", cfg.size_jitter);
  cfg.pose_jitter = doc.value("pose_jitter", cfg.pose_jitter);
  cfg.mass_jitter = doc.value("mass_jitter", cfg.mass_jitter);
  cfg.human_response_prob = doc.value("human_response_prob", cfg.human_response_prob);
  cfg.floors = doc.value("floors", cfg.floors);
  return cfg;
}

Scene build_scene(const TaskConfig& cfg) {
  cfg.check();
  Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(cfg.task) + 1));
  std::string last;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    try {
      switch (cfg.task) {
        case TaskKind::LightSwitching: return light_scene(cfg, rng);
        case TaskKind::PackageDelivery: return delivery_scene(cfg, rng);
        case TaskKind::BridgeBuilding: return bridge_scene(cfg, rng);
        case TaskKind::ElevatorRide: return elevator_scene(cfg, rng);
      }
    } catch (const BenchmarkError& e) {
      last = e.what();
    } catch (const WorldError& e) {
      last = e.what();
    }
  }
  infeasible(std::string(task_name(cfg.task)) + " seed " + std::to_string(cfg.seed) + ": no constructible scene after " +
             std::to_string(kMaxAttempts) + " draws (" + last + ")");
}

bool light_needs_box(const Scene& scene) {
  const auto& stairs = scene.object("stairs").as<StairsKind>();
  return stairs.step_heights.front() > scene.limits.max_step_height;
}

agents::EnvDescription describe(TaskKind task, const Scene& scene) {
  agents::EnvDescription env;
  env.task = std::string(task_name(task));
  switch (task) {
    case TaskKind::LightSwitching:
      env.prose =
          "The robot must turn off the light by pressing a button mounted high on a wall. The button is "
          "beyond the reach of the robot from the ground. Fixed stairs with two steps lead up against the "
          "wall below the button. The first step may be higher than the robot can climb. A movable box "
          "stands nearby and can be pushed in front of the stairs to serve as an intermediate step.";
      break;
    case TaskKind::PackageDelivery:
      env.prose =
          "The robot must deliver a package into the room behind a closed door. A doorbell hangs on the "
          "wall beside the door; ringing it asks a human inside to open the door, which may or may not "
          "happen. A door switch on the other side of the door also opens it. The package rests on the "
          "floor in front of the wall and must be pushed through the doorway to the delivery spot given by "
          "spot_x and spot_y.";
      break;
    case TaskKind::BridgeBuilding:
      env.prose =
          "The robot must reach a target platform. Fixed stairs lead up to a landing that is separated from "
          "the platform by a gap too wide to cross and too deep to climb out of. A movable box lying in the "
          "trench beside the gap can be pushed into the gap to build a bridge between the landing and the "
          "platform.";
      break;
    case TaskKind::ElevatorRide:
      env.prose =
          "The robot must ride the elevator to the floor given by target_floor. It starts on the floor "
          "given by robot_floor. Call buttons for up and down are on the wall beside the elevator door; the "
          "cabin arrives after a delay and opens the door. Inside the cabin a panel carries one button per "
          "floor, stacked upward from the panel bottom, with the lowest button for the lowest floor. The "
          "buttons are spaced panel_button_spacing apart.";
      break;
  }
  for (const auto& [name, value] : scene_globals(scene)) env.globals.push_back(name);
  for (const auto& [id, obj] : scene.objects) env.objects.push_back(id + " (" + std::string(kind_name(obj.kind)) + ")");
  for (const auto& ev : defined_events(scene)) env.events.push_back(ev);
  env.constraints = {
      "The robot can climb a single rise no higher than max_step_height.",
      "A tread narrower than step_depth_min cannot be stepped on.",
      "Standing on its hind legs the robot reaches up to bipedal_reach_height above the surface it stands on, "
      "within reach_radius horizontally of its base.",
      "Walking, pushing and climbing need the quadrupedal stance; touching needs the bipedal stance.",
      "Only objects no heavier than push_mass_limit can be pushed, and only from the level they rest on.",
      "A touch succeeds when the toe comes within touch_epsilon of the target.",
  };
  return env;
}

bool task_done(TaskKind task, const Scene& initial, const Snapshot& state) {
  switch (task) {
    case TaskKind::LightSwitching:
      return std::find(state.events.begin(), state.events.end(), "light_off") != state.events.end();
    case TaskKind::PackageDelivery: {
      const auto it = state.movable.find("package");
      if (it == state.movable.end()) return false;
      const ObjectSpec& pkg = initial.object("package");
      const double door_far = initial.object("door").bounds().max.x;
      return it->second.position.x - pkg.size.x / 2 > door_far;
    }
    case TaskKind::BridgeBuilding: {
      const ObjectSpec& platform = initial.object("platform");
      const Vec3& p = state.robot.base.position;
      return state.robot.stance != Stance::Fallen && platform.bounds().contains_xy(p.x, p.y) &&
             std::abs(state.robot.support_height - platform.top_z()) < 1e-6;
    }
    case TaskKind::ElevatorRide: {
      const int target = static_cast<int>(initial.params.at("target_floor"));
      return state.robot.floor == target && state.selected_floor == target;
    }
  }
  return false;
}

bool success(TaskKind task, const ExecutionTrace& trace, double time_limit) {
  for (const auto& e : trace.entries) {
    if (e.kind != EntryKind::SkillOutcome || !e.snapshot) continue;
    if (e.clock > time_limit) break;
    if (task_done(task, trace.initial_scene, *e.snapshot)) return true;
  }
  return false;
}

double task_distance(TaskKind task, const Scene& initial, const Snapshot& state) {
  switch (task) {
    case TaskKind::LightSwitching: return toe_distance(state.robot, initial.limits, light_button(initial));
    case TaskKind::ElevatorRide: return toe_distance(state.robot, initial.limits, elevator_button(initial));
    case TaskKind::PackageDelivery: {
      const Vec3 spot{initial.params.at("spot_x"), initial.params.at("spot_y"), 0.0};
      const auto it = state.movable.find("package");
      return it == state.movable.end() ? 0.0 : distance_xy(it->second.position, spot);
    }
    case TaskKind::BridgeBuilding: {
      const ObjectSpec& platform = initial.object("platform");
      const Vec3 dest{platform.pose.position.x, platform.pose.position.y, platform.top_z()};
      const Vec3 base{state.robot.base.position.x, state.robot.base.position.y, state.robot.support_height};
      return distance(base, dest);
    }
  }
  return 0.0;
}

double norm_dist(TaskKind task, const ExecutionTrace& trace) {
  const double initial = task_distance(task, trace.initial_scene, initial_snapshot(trace));
  if (initial <= 0.0) return 0.0;
  double best = initial;
  for (const auto& e : trace.entries) {
    if (e.kind != EntryKind::SkillOutcome || !e.snapshot) continue;
    best = std::min(best, task_distance(task, trace.initial_scene, *e.snapshot));
  }
  return best / initial;
}

MetricSample measure(TaskKind task, const ExecutionTrace& trace, double time_limit) {
  MetricSample m;
  m.success = success(task, trace, time_limit);
  m.norm_dist = norm_dist(task, trace);
  m.clock = trace.final_scene.clock;
  m.replans = trace.replans;
  m.outcome = trace.outcome;
  return m;
}

}  // namespace quadplan
