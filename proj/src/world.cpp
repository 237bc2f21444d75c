// SPDX-License-Identifier: Apache-2.0
#include "quadplan/world.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace quadplan {

namespace {

constexpr double kEps = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string direction_event(Direction d) { return d == Direction::Up ? "call_up" : "call_down"; }

void invalid(const std::string& message) {
  throw WorldError(WorldError::Kind::InvalidScene, message);
}

double stairs_rise_sum(const StairsKind& stairs, std::size_t last_inclusive) {
  double total = 0.0;
  for (std::size_t i = 0; i <= last_inclusive && i < stairs.step_heights.size(); ++i) {
    total += stairs.step_heights[i];
  }
  return total;
}

}  // namespace

std::string_view kind_name(const ObjectKind& kind) {
  return std::visit(Overloaded{
                        [](const BoxKind&) { return std::string_view("Box"); },
                        [](const StairsKind&) { return std::string_view("Stairs"); },
                        [](const ButtonKind&) { return std::string_view("Button"); },
                        [](const BellKind&) { return std::string_view("Bell"); },
                        [](const DoorKind&) { return std::string_view("Door"); },
                        [](const PlatformKind&) { return std::string_view("Platform"); },
                        [](const PackageKind&) { return std::string_view("Package"); },
                        [](const GapKind&) { return std::string_view("Gap"); },
                        [](const WallKind&) { return std::string_view("Wall"); },
                        [](const ElevatorCallKind&) { return std::string_view("ElevatorCall"); },
                        [](const ElevatorPanelKind&) { return std::string_view("ElevatorPanel"); },
                    },
                    kind);
}

std::string_view stance_name(Stance stance) {
  switch (stance) {
    case Stance::Quadrupedal: return "Quadrupedal";
    case Stance::Bipedal: return "Bipedal";
    case Stance::Fallen: return "Fallen";
  }
  return "?";
}

Aabb ObjectSpec::bounds() const {
  const Vec3& p = pose.position;
  return Aabb{{p.x - size.x * 0.5, p.y - size.y * 0.5, p.z},
              {p.x + size.x * 0.5, p.y + size.y * 0.5, p.z + size.z}};
}

bool ObjectSpec::solid() const {
  return std::visit(Overloaded{
                        [](const BoxKind&) { return true; },
                        [](const StairsKind&) { return true; },
                        [](const PlatformKind&) { return true; },
                        [](const PackageKind&) { return true; },
                        [](const WallKind&) { return true; },
                        [](const DoorKind& d) { return !d.open; },
                        [](const auto&) { return false; },
                    },
                    kind);
}

std::optional<double> ObjectSpec::top_at(double x, double y) const {
  const Aabb box = bounds();
  if (!box.contains_xy(x, y)) return std::nullopt;
  if (const auto* stairs = std::get_if<StairsKind>(&kind)) {
    if (stairs->step_heights.empty() || stairs->step_depth <= 0.0) return pose.position.z;
    const auto n = static_cast<long>(stairs->step_heights.size());
    long k = static_cast<long>(std::floor((x - box.min.x) / stairs->step_depth + kEps));
    k = std::clamp(k, 0L, n - 1);
    return pose.position.z + stairs_rise_sum(*stairs, static_cast<std::size_t>(k));
  }
  return top_z();
}

bool aabb_overlap(const ObjectSpec& a, const ObjectSpec& b) {
  return overlaps_with_volume(a.bounds(), b.bounds());
}

double stance_base_height(const RobotLimits& limits, Stance stance) {
  switch (stance) {
    case Stance::Quadrupedal: return limits.quad_body.z * 0.5;
    case Stance::Bipedal: return limits.bipedal_body_height * 0.5;
    case Stance::Fallen: return limits.quad_body.y * 0.5;
  }
  return 0.0;
}

void place_robot(RobotState& robot, const RobotLimits& limits, double x, double y, double support,
                 Stance stance) {
  robot.stance = stance;
  robot.support_height = support;
  robot.base.position = {x, y, support + stance_base_height(limits, stance)};
  if (stance != Stance::Bipedal) robot.toe.reset();
}

Aabb robot_body_bounds(const RobotState& robot, const RobotLimits& limits) {
  const double c = std::abs(std::cos(robot.base.yaw));
  const double s = std::abs(std::sin(robot.base.yaw));
  const Vec3& p = robot.base.position;
  double half_x = 0.0;
  double half_y = 0.0;
  double height = 0.0;
  if (robot.stance == Stance::Bipedal) {
    // Upright: the footprint shrinks to the hind legs, the body rises.
    half_x = 0.5 * (c * limits.quad_body.z + s * limits.quad_body.y);
    half_y = 0.5 * (s * limits.quad_body.z + c * limits.quad_body.y);
    height = limits.bipedal_body_height;
  } else {
    half_x = 0.5 * (c * limits.quad_body.x + s * limits.quad_body.y);
    half_y = 0.5 * (s * limits.quad_body.x + c * limits.quad_body.y);
    height = robot.stance == Stance::Fallen ? limits.quad_body.y : limits.quad_body.z;
  }
  return Aabb{{p.x - half_x, p.y - half_y, robot.support_height},
              {p.x + half_x, p.y + half_y, robot.support_height + height}};
}

const ObjectSpec& Scene::object(std::string_view id) const {
  const auto it = objects.find(std::string(id));
  if (it == objects.end()) {
    throw WorldError(WorldError::Kind::UnknownObject, "unknown object '" + std::string(id) + "'");
  }
  return it->second;
}

ObjectSpec& Scene::object(std::string_view id) {
  const auto it = objects.find(std::string(id));
  if (it == objects.end()) {
    throw WorldError(WorldError::Kind::UnknownObject, "unknown object '" + std::string(id) + "'");
  }
  return it->second;
}

bool Scene::has_object(std::string_view id) const { return objects.contains(std::string(id)); }

void add_object(Scene& scene, ObjectSpec object) {
  if (object.id.empty()) invalid("object id must be non-empty");
  if (object.id == "robot") invalid("object id 'robot' is reserved");
  if (scene.objects.contains(object.id)) invalid("duplicate object id '" + object.id + "'");
  object.pose.yaw = normalize_yaw(object.pose.yaw);
  const std::string id = object.id;
  scene.objects.emplace(id, std::move(object));
}

double support_height_at(const Scene& scene, double x, double y,
                         std::optional<std::string_view> excluding) {
  if (!scene.bounds.contains(x, y)) {
    throw WorldError(WorldError::Kind::OutOfBounds,
                     "point (" + std::to_string(x) + ", " + std::to_string(y) + ") outside scene bounds");
  }
  double best = 0.0;
  for (const auto& [id, obj] : scene.objects) {
    if (excluding && id == *excluding) continue;
    if (!obj.solid()) continue;
    if (const auto top = obj.top_at(x, y)) best = std::max(best, *top);
  }
  return best;
}

double support_under_footprint(const Scene& scene, const Aabb& footprint,
                               std::optional<std::string_view> excluding) {
  double best = 0.0;
  for (const auto& [id, obj] : scene.objects) {
    if (excluding && id == *excluding) continue;
    if (!obj.solid()) continue;
    const Aabb box = obj.bounds();
    const double lo_x = std::max(box.min.x, footprint.min.x);
    const double hi_x = std::min(box.max.x, footprint.max.x);
    const double lo_y = std::max(box.min.y, footprint.min.y);
    const double hi_y = std::min(box.max.y, footprint.max.y);
    if (hi_x - lo_x <= kEps || hi_y - lo_y <= kEps) continue;
    // Only surfaces at or below the footprint's bottom can support it.
    if (const auto* stairs = std::get_if<StairsKind>(&obj.kind)) {
      if (stairs->step_heights.empty() || stairs->step_depth <= 0.0) continue;
      const auto n = static_cast<long>(stairs->step_heights.size());
      long k_hi = static_cast<long>(std::ceil((hi_x - box.min.x) / stairs->step_depth - kEps)) - 1;
      k_hi = std::clamp(k_hi, 0L, n - 1);
      best = std::max(best, obj.pose.position.z + stairs_rise_sum(*stairs, static_cast<std::size_t>(k_hi)));
    } else {
      best = std::max(best, obj.top_z());
    }
  }
  return best;
}

std::optional<double> ceiling_at(const Scene& scene, double x, double y, double above_z) {
  std::optional<double> lowest;
  for (const auto& [id, obj] : scene.objects) {
    if (!obj.solid()) continue;
    if (obj.pose.position.z <= above_z + 1e-6) continue;
    if (!obj.bounds().contains_xy(x, y)) continue;
    if (!lowest || obj.pose.position.z < *lowest) lowest = obj.pose.position.z;
  }
  return lowest;
}

std::set<std::string> defined_events(const Scene& scene) {
  std::set<std::string> out;
  for (const auto& [id, obj] : scene.objects) {
    std::visit(Overloaded{
                   [&](const ButtonKind& b) { out.insert(b.event); },
                   [&](const BellKind& b) {
                     out.insert(b.event);
                     out.insert(b.response_event);
                   },
                   [&](const ElevatorCallKind& c) {
                     out.insert(direction_event(c.direction));
                     out.insert("elevator_arrived");
                   },
                   [&](const ElevatorPanelKind&) {
                     out.insert("floor_selected");
                     out.insert("floor_reached");
                   },
                   [](const auto&) {},
               },
               obj.kind);
  }
  return out;
}

namespace {

void open_door(Scene& scene, const std::string& door_id, bool open) {
  if (door_id.empty()) return;
  auto it = scene.objects.find(door_id);
  if (it == scene.objects.end()) return;
  if (auto* door = std::get_if<DoorKind>(&it->second.kind)) door->open = open;
}

bool already_scheduled(const Scene& scene, const std::string& event) {
  return std::any_of(scene.scheduled.begin(), scene.scheduled.end(),
                     [&](const ScheduledEvent& s) { return s.event == event; });
}

const ElevatorPanelKind* find_panel(const Scene& scene) {
  for (const auto& [id, obj] : scene.objects) {
    if (const auto* panel = std::get_if<ElevatorPanelKind>(&obj.kind)) return panel;
  }
  return nullptr;
}

const ElevatorCallKind* find_call(const Scene& scene) {
  for (const auto& [id, obj] : scene.objects) {
    if (const auto* call = std::get_if<ElevatorCallKind>(&obj.kind)) return call;
  }
  return nullptr;
}

}  // namespace

void fire_event(Scene& scene, const std::string& event) {
  if (!defined_events(scene).contains(event)) {
    throw WorldError(WorldError::Kind::UnknownEvent, "unknown event '" + event + "'");
  }
  scene.events.insert(event);

  for (auto& [id, obj] : scene.objects) {
    if (auto* button = std::get_if<ButtonKind>(&obj.kind); button && button->event == event) {
      open_door(scene, button->opens, true);
    }
    if (auto* bell = std::get_if<BellKind>(&obj.kind)) {
      if (bell->event == event && scene.rng.bernoulli(bell->response_prob)) {
        scene.scheduled.push_back({scene.clock + bell->response_delay, bell->response_event});
      }
      if (bell->response_event == event) open_door(scene, bell->opens, true);
    }
  }

  if (!scene.elevator) return;
  ElevatorState& lift = *scene.elevator;
  const ElevatorCallKind* call = find_call(scene);
  const ElevatorPanelKind* panel = find_panel(scene);

  if (event == "call_up" || event == "call_down") {
    lift.direction = event == "call_up" ? Direction::Up : Direction::Down;
    if (call && !already_scheduled(scene, "elevator_arrived")) {
      scene.scheduled.push_back({scene.clock + call->arrival_delay, "elevator_arrived"});
    }
  } else if (event == "elevator_arrived") {
    lift.cabin_floor = scene.robot.floor;
    if (call) {
      open_door(scene, call->door, true);
      if (auto it = scene.objects.find(call->platform); it != scene.objects.end()) {
        it->second.pose.position.z = 0.0;
      }
    }
  } else if (event == "floor_selected") {
    if (!lift.selected_floor || !panel) return;
    const int delta = *lift.selected_floor - lift.cabin_floor;
    const bool compatible = delta == 0 || !lift.direction ||
                            (delta > 0 && *lift.direction == Direction::Up) ||
                            (delta < 0 && *lift.direction == Direction::Down);
    if (!compatible || already_scheduled(scene, "floor_reached")) return;
    open_door(scene, panel->door, false);
    const double travel = std::max(1.0, std::abs(delta) * panel->travel_time_per_floor);
    scene.scheduled.push_back({scene.clock + travel, "floor_reached"});
  } else if (event == "floor_reached") {
    if (!lift.selected_floor) return;
    lift.cabin_floor = *lift.selected_floor;
    if (panel) {
      if (auto it = scene.objects.find(panel->platform); it != scene.objects.end()) {
        const Vec3& p = scene.robot.base.position;
        if (it->second.bounds().contains_xy(p.x, p.y)) scene.robot.floor = lift.cabin_floor;
      }
      open_door(scene, panel->door, true);
    }
  }
}

std::vector<std::string> advance_clock(Scene& scene, double time) {
  std::vector<std::string> fired;
  for (;;) {
    auto next = scene.scheduled.end();
    for (auto it = scene.scheduled.begin(); it != scene.scheduled.end(); ++it) {
      if (it->time <= time + kEps && (next == scene.scheduled.end() || it->time < next->time)) next = it;
    }
    if (next == scene.scheduled.end()) break;
    const ScheduledEvent due = *next;
    scene.scheduled.erase(next);
    scene.clock = std::max(scene.clock, due.time);
    fire_event(scene, due.event);
    fired.push_back(due.event);
  }
  scene.clock = std::max(scene.clock, time);
  return fired;
}

std::optional<double> scheduled_time(const Scene& scene, const std::string& event) {
  std::optional<double> best;
  for (const auto& s : scene.scheduled) {
    if (s.event == event && (!best || s.time < *best)) best = s.time;
  }
  return best;
}

void settle(Scene& scene) {
  std::vector<std::string> movable;
  for (const auto& [id, obj] : scene.objects) {
    if (obj.movable) movable.push_back(id);
  }
  std::sort(movable.begin(), movable.end(), [&](const std::string& a, const std::string& b) {
    const double za = scene.objects.at(a).pose.position.z;
    const double zb = scene.objects.at(b).pose.position.z;
    return za != zb ? za < zb : a < b;
  });
  for (const auto& id : movable) {
    ObjectSpec& obj = scene.objects.at(id);
    Aabb footprint = obj.bounds();
    obj.pose.position.z = support_under_footprint(scene, footprint, id);
  }
}

void validate_scene(const Scene& scene) {
  for (const auto& [id, obj] : scene.objects) {
    if (id != obj.id) invalid("object key '" + id + "' does not match id '" + obj.id + "'");
    if (!obj.pose.position.finite() || !std::isfinite(obj.pose.yaw)) invalid(id + ": non-finite pose");
    if (!(obj.size.x > 0 && obj.size.y > 0 && obj.size.z > 0) || !obj.size.finite()) {
      invalid(id + ": size components must be positive");
    }
    if (obj.movable && !obj.is<BoxKind>() && !obj.is<PackageKind>()) {
      invalid(id + ": only boxes and packages can be movable");
    }
    if (obj.mass < 0) invalid(id + ": negative mass");
    if (const auto* stairs = std::get_if<StairsKind>(&obj.kind)) {
      if (stairs->step_heights.empty()) invalid(id + ": stairs need at least one step");
      if (stairs->step_depth <= 0) invalid(id + ": step_depth must be positive");
      for (double h : stairs->step_heights) {
        if (!(h >= 0)) invalid(id + ": step heights must be >= 0");
      }
      const double n = static_cast<double>(stairs->step_heights.size());
      if (std::abs(obj.size.x - n * stairs->step_depth) > 1e-6) {
        invalid(id + ": stairs size.x must equal step count times step_depth");
      }
      const double total = std::accumulate(stairs->step_heights.begin(), stairs->step_heights.end(), 0.0);
      if (std::abs(obj.size.z - total) > 1e-6) invalid(id + ": stairs size.z must equal the sum of rises");
    }
  }

  std::vector<const ObjectSpec*> solids;
  for (const auto& [id, obj] : scene.objects) {
    if (obj.solid()) solids.push_back(&obj);
  }
  for (std::size_t i = 0; i < solids.size(); ++i) {
    for (std::size_t j = i + 1; j < solids.size(); ++j) {
      if (aabb_overlap(*solids[i], *solids[j])) {
        invalid("objects '" + solids[i]->id + "' and '" + solids[j]->id + "' interpenetrate");
      }
    }
  }

  for (const auto& [id, obj] : scene.objects) {
    if (!obj.movable) continue;
    const double support = support_under_footprint(scene, obj.bounds(), id);
    if (std::abs(obj.pose.position.z - support) > 1e-6) invalid(id + ": movable object is not resting on a surface");
  }

  const RobotState& robot = scene.robot;
  if (robot.support_height < 0) invalid("robot support_height must be >= 0");
  if (robot.toe.has_value() != (robot.stance == Stance::Bipedal)) {
    invalid("robot toe must be present exactly in bipedal stance");
  }
  const double expected_z = robot.support_height + stance_base_height(scene.limits, robot.stance);
  if (std::abs(robot.base.position.z - expected_z) > 1e-6) invalid("robot base height inconsistent with stance");
  if (scene.limits.max_step_height <= 0 || scene.limits.reach_radius <= 0 || scene.limits.walk_speed <= 0 ||
      scene.limits.push_speed <= 0 || scene.limits.bipedal_reach_height <= 0 ||
      scene.limits.push_mass_limit <= 0) {
    invalid("robot limits must be positive");
  }
  if (scene.bounds.min_x >= scene.bounds.max_x || scene.bounds.min_y >= scene.bounds.max_y) {
    invalid("scene bounds are empty");
  }
}

std::optional<Vec3> touch_point(const ObjectSpec& object, std::optional<int> floor) {
  if (object.is<ButtonKind>() || object.is<BellKind>() || object.is<ElevatorCallKind>()) {
    return object.center();
  }
  if (const auto* panel = std::get_if<ElevatorPanelKind>(&object.kind)) {
    if (!floor) return std::nullopt;
    const auto it = std::find(panel->floors.begin(), panel->floors.end(), *floor);
    if (it == panel->floors.end()) return std::nullopt;
    const double index = static_cast<double>(it - panel->floors.begin());
    return object.pose.position + Vec3{0, 0, (index + 0.5) * panel->button_spacing};
  }
  return std::nullopt;
}

std::map<std::string, double> scene_globals(const Scene& scene) {
  std::map<std::string, double> g;
  const RobotLimits& lim = scene.limits;
  g["max_step_height"] = lim.max_step_height;
  g["bipedal_reach_height"] = lim.bipedal_reach_height;
  g["reach_radius"] = lim.reach_radius;
  g["robot_length"] = lim.quad_body.x;
  g["robot_width"] = lim.quad_body.y;
  g["robot_height"] = lim.quad_body.z;
  g["robot_radius"] = lim.body_radius();
  g["push_mass_limit"] = lim.push_mass_limit;
  g["touch_epsilon"] = lim.touch_epsilon;
  g["step_depth_min"] = lim.step_depth_min;

  const RobotState& r = scene.robot;
  g["robot_x"] = r.base.position.x;
  g["robot_y"] = r.base.position.y;
  g["robot_z"] = r.support_height;
  g["robot_yaw"] = r.base.yaw;
  g["robot_bipedal"] = r.stance == Stance::Bipedal ? 1.0 : 0.0;
  g["robot_floor"] = r.floor;

  for (const auto& [id, obj] : scene.objects) {
    const Vec3& p = obj.pose.position;
    g[id + "_x"] = p.x;
    g[id + "_y"] = p.y;
    g[id + "_z"] = p.z;
    g[id + "_yaw"] = obj.pose.yaw;
    g[id + "_size_x"] = obj.size.x;
    g[id + "_size_y"] = obj.size.y;
    g[id + "_size_z"] = obj.size.z;
    g[id + "_top_z"] = obj.top_z();
    if (obj.movable) g[id + "_mass"] = obj.mass;
    if (const auto* stairs = std::get_if<StairsKind>(&obj.kind)) {
      g[id + "_num_steps"] = static_cast<double>(stairs->step_heights.size());
      g[id + "_step_depth"] = stairs->step_depth;
      double top = p.z;
      for (std::size_t i = 0; i < stairs->step_heights.size(); ++i) {
        top += stairs->step_heights[i];
        const std::string k = std::to_string(i + 1);
        g[id + "_step" + k + "_height"] = stairs->step_heights[i];
        g[id + "_step" + k + "_top_z"] = top;
      }
    }
    if (const auto* door = std::get_if<DoorKind>(&obj.kind)) g[id + "_open"] = door->open ? 1.0 : 0.0;
    if (const auto* gap = std::get_if<GapKind>(&obj.kind)) g[id + "_width"] = gap->width;
    if (const auto* panel = std::get_if<ElevatorPanelKind>(&obj.kind)) {
      g[id + "_button_spacing"] = panel->button_spacing;
    }
  }
  if (scene.elevator) g["cabin_floor"] = scene.elevator->cabin_floor;
  for (const auto& [k, v] : scene.params) g[k] = v;
  return g;
}

std::set<std::string> scene_symbols(const Scene& scene) {
  std::set<std::string> out = defined_events(scene);
  out.insert("robot");
  for (const auto& [id, obj] : scene.objects) out.insert(id);
  return out;
}

}  // namespace quadplan
