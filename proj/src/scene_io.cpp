// SPDX-License-Identifier: Apache-2.0
#include "quadplan/scene_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace quadplan {

using nlohmann::json;

namespace {

[[noreturn]] void reject(const std::string& message) {
  throw WorldError(WorldError::Kind::InvalidScene, message);
}

void only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) reject(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) reject(where + ": unknown key '" + key + "'");
  }
}

double number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_number()) reject(where + ": '" + key + "' must be a number");
  return obj.at(key).get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return number(obj, key, where);
}

std::string string_or(const json& obj, const char* key, const std::string& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) reject(where + ": '" + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

json pose_to_json(const Pose& pose) {
  return json{{"position", vec3_to_json(pose.position)}, {"yaw", pose.yaw}};
}

Pose pose_from_json(const json& j, const std::string& where) {
  only_keys(j, {"position", "yaw"}, where);
  Pose pose;
  if (!j.contains("position")) reject(where + ": missing position");
  pose.position = vec3_from_json(j.at("position"));
  pose.yaw = normalize_yaw(number_or(j, "yaw", 0.0, where));
  return pose;
}

std::string direction_name(Direction d) { return d == Direction::Up ? "Up" : "Down"; }

Direction direction_from(const std::string& s, const std::string& where) {
  if (s == "Up") return Direction::Up;
  if (s == "Down") return Direction::Down;
  reject(where + ": direction must be Up or Down");
}

json kind_to_json(const ObjectKind& kind) {
  json j{{"type", std::string(kind_name(kind))}};
  if (const auto* s = std::get_if<StairsKind>(&kind)) {
    j["step_heights"] = s->step_heights;
    j["step_depth"] = s->step_depth;
  } else if (const auto* b = std::get_if<ButtonKind>(&kind)) {
    j["event"] = b->event;
    if (!b->opens.empty()) j["opens"] = b->opens;
  } else if (const auto* b = std::get_if<BellKind>(&kind)) {
    j["event"] = b->event;
    j["response_event"] = b->response_event;
    j["response_prob"] = b->response_prob;
    j["response_delay"] = b->response_delay;
    if (!b->opens.empty()) j["opens"] = b->opens;
  } else if (const auto* d = std::get_if<DoorKind>(&kind)) {
    j["open"] = d->open;
  } else if (const auto* g = std::get_if<GapKind>(&kind)) {
    j["width"] = g->width;
  } else if (const auto* c = std::get_if<ElevatorCallKind>(&kind)) {
    j["direction"] = direction_name(c->direction);
    j["door"] = c->door;
    j["platform"] = c->platform;
    j["arrival_delay"] = c->arrival_delay;
  } else if (const auto* p = std::get_if<ElevatorPanelKind>(&kind)) {
    j["floors"] = p->floors;
    j["button_spacing"] = p->button_spacing;
    j["travel_time_per_floor"] = p->travel_time_per_floor;
    j["door"] = p->door;
    j["platform"] = p->platform;
  }
  return j;
}

ObjectKind kind_from_json(const json& j, const std::string& where) {
  if (j.is_string()) {
    const auto t = j.get<std::string>();
    if (t == "Box") return BoxKind{};
    if (t == "Platform") return PlatformKind{};
    if (t == "Package") return PackageKind{};
    if (t == "Wall") return WallKind{};
    if (t == "Door") return DoorKind{};
    reject(where + ": kind '" + t + "' needs parameters");
  }
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) reject(where + ": kind needs a type");
  const auto t = j.at("type").get<std::string>();
  if (t == "Box" || t == "Platform" || t == "Package" || t == "Wall") {
    only_keys(j, {"type"}, where);
    return kind_from_json(json(t), where);
  }
  if (t == "Stairs") {
    only_keys(j, {"type", "step_heights", "step_depth"}, where);
    StairsKind s;
    if (!j.contains("step_heights") || !j.at("step_heights").is_array()) reject(where + ": step_heights required");
    s.step_heights = j.at("step_heights").get<std::vector<double>>();
    s.step_depth = number(j, "step_depth", where);
    return s;
  }
  if (t == "Button") {
    only_keys(j, {"type", "event", "opens"}, where);
    return ButtonKind{string_or(j, "event", "", where), string_or(j, "opens", "", where)};
  }
  if (t == "Bell") {
    only_keys(j, {"type", "event", "response_event", "response_prob", "response_delay", "opens"}, where);
    BellKind b;
    b.event = string_or(j, "event", "", where);
    b.response_event = string_or(j, "response_event", b.response_event, where);
    b.response_prob = number_or(j, "response_prob", b.response_prob, where);
    b.response_delay = number_or(j, "response_delay", b.response_delay, where);
    b.opens = string_or(j, "opens", "", where);
    return b;
  }
  if (t == "Door") {
    only_keys(j, {"type", "open"}, where);
    DoorKind d;
    if (j.contains("open")) {
      if (!j.at("open").is_boolean()) reject(where + ": open must be a boolean");
      d.open = j.at("open").get<bool>();
    }
    return d;
  }
  if (t == "Gap") {
    only_keys(j, {"type", "width"}, where);
    return GapKind{number(j, "width", where)};
  }
  if (t == "ElevatorCall") {
    only_keys(j, {"type", "direction", "door", "platform", "arrival_delay"}, where);
    ElevatorCallKind c;
    c.direction = direction_from(string_or(j, "direction", "", where), where);
    c.door = string_or(j, "door", "", where);
    c.platform = string_or(j, "platform", "", where);
    c.arrival_delay = number_or(j, "arrival_delay", c.arrival_delay, where);
    return c;
  }
  if (t == "ElevatorPanel") {
    only_keys(j, {"type", "floors", "button_spacing", "travel_time_per_floor", "door", "platform"}, where);
    ElevatorPanelKind p;
    if (!j.contains("floors") || !j.at("floors").is_array()) reject(where + ": floors required");
    p.floors = j.at("floors").get<std::vector<int>>();
    p.button_spacing = number_or(j, "button_spacing", p.button_spacing, where);
    p.travel_time_per_floor = number_or(j, "travel_time_per_floor", p.travel_time_per_floor, where);
    p.door = string_or(j, "door", "", where);
    p.platform = string_or(j, "platform", "", where);
    return p;
  }
  reject(where + ": unknown kind '" + t + "'");
}

json limits_to_json(const RobotLimits& l) {
  return json{{"max_step_height", l.max_step_height},
              {"bipedal_reach_height", l.bipedal_reach_height},
              {"quad_body", vec3_to_json(l.quad_body)},
              {"push_mass_limit", l.push_mass_limit},
              {"reach_radius", l.reach_radius},
              {"walk_speed", l.walk_speed},
              {"push_speed", l.push_speed},
              {"bipedal_body_height", l.bipedal_body_height},
              {"touch_epsilon", l.touch_epsilon},
              {"step_depth_min", l.step_depth_min},
              {"step_over_gap", l.step_over_gap},
              {"hard_fall", l.hard_fall}};
}

RobotLimits limits_from_json(const json& j) {
  const std::string where = "limits";
  only_keys(j,
            {"max_step_height", "bipedal_reach_height", "quad_body", "push_mass_limit", "reach_radius",
             "walk_speed", "push_speed", "bipedal_body_height", "touch_epsilon", "step_depth_min",
             "step_over_gap", "hard_fall"},
            where);
  RobotLimits l;
  l.max_step_height = number_or(j, "max_step_height", l.max_step_height, where);
  l.bipedal_reach_height = number_or(j, "bipedal_reach_height", l.bipedal_reach_height, where);
  if (j.contains("quad_body")) l.quad_body = vec3_from_json(j.at("quad_body"));
  l.push_mass_limit = number_or(j, "push_mass_limit", l.push_mass_limit, where);
  l.reach_radius = number_or(j, "reach_radius", l.reach_radius, where);
  l.walk_speed = number_or(j, "walk_speed", l.walk_speed, where);
  l.push_speed = number_or(j, "push_speed", l.push_speed, where);
  l.bipedal_body_height = number_or(j, "bipedal_body_height", l.bipedal_body_height, where);
  l.touch_epsilon = number_or(j, "touch_epsilon", l.touch_epsilon, where);
  l.step_depth_min = number_or(j, "step_depth_min", l.step_depth_min, where);
  l.step_over_gap = number_or(j, "step_over_gap", l.step_over_gap, where);
  if (j.contains("hard_fall")) {
    if (!j.at("hard_fall").is_boolean()) reject("limits: hard_fall must be a boolean");
    l.hard_fall = j.at("hard_fall").get<bool>();
  }
  return l;
}

Stance stance_from(const std::string& s) {
  if (s == "Quadrupedal") return Stance::Quadrupedal;
  if (s == "Bipedal") return Stance::Bipedal;
  if (s == "Fallen") return Stance::Fallen;
  reject("robot: unknown stance '" + s + "'");
}

RobotState robot_from_json(const json& j, const RobotLimits& limits) {
  only_keys(j, {"pose", "stance", "support_height", "toe", "floor"}, "robot");
  RobotState r;
  r.stance = stance_from(string_or(j, "stance", "Quadrupedal", "robot"));
  r.support_height = number_or(j, "support_height", 0.0, "robot");
  if (!j.contains("pose")) reject("robot: missing pose");
  r.base = pose_from_json(j.at("pose"), "robot.pose");
  if (j.contains("toe")) r.toe = vec3_from_json(j.at("toe"));
  if (j.contains("floor")) {
    if (!j.at("floor").is_number_integer()) reject("robot: floor must be an integer");
    r.floor = j.at("floor").get<int>();
  }
  // The base height follows from the stance; files may give only x, y.
  r.base.position.z = r.support_height + stance_base_height(limits, r.stance);
  return r;
}

}  // namespace

json vec3_to_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) reject("expected [x, y, z]");
  for (const auto& e : j) {
    if (!e.is_number()) reject("vector components must be numbers");
  }
  Vec3 v{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  if (!v.finite()) reject("vector components must be finite");
  return v;
}

json robot_to_json(const RobotState& r) {
  json j{{"pose", pose_to_json(r.base)},
         {"stance", std::string(stance_name(r.stance))},
         {"support_height", r.support_height},
         {"floor", r.floor}};
  if (r.toe) j["toe"] = vec3_to_json(*r.toe);
  return j;
}

json scene_to_json(const Scene& scene, bool include_runtime) {
  json objects = json::array();
  for (const auto& [id, obj] : scene.objects) {
    objects.push_back(json{{"id", obj.id},
                           {"kind", kind_to_json(obj.kind)},
                           {"pose", pose_to_json(obj.pose)},
                           {"size", vec3_to_json(obj.size)},
                           {"movable", obj.movable},
                           {"mass", obj.mass}});
  }
  json doc{{"objects", objects},
           {"robot", robot_to_json(scene.robot)},
           {"limits", limits_to_json(scene.limits)},
           {"bounds", json::array({scene.bounds.min_x, scene.bounds.min_y, scene.bounds.max_x, scene.bounds.max_y})},
           {"seed", scene.seed}};
  if (!scene.params.empty()) doc["params"] = scene.params;
  if (include_runtime) {
    doc["clock"] = scene.clock;
    doc["events"] = scene.events;
    json scheduled = json::array();
    for (const auto& s : scene.scheduled) scheduled.push_back(json{{"time", s.time}, {"event", s.event}});
    doc["scheduled"] = scheduled;
    if (scene.elevator) {
      json lift{{"cabin_floor", scene.elevator->cabin_floor}};
      if (scene.elevator->direction) lift["direction"] = direction_name(*scene.elevator->direction);
      if (scene.elevator->selected_floor) lift["selected_floor"] = *scene.elevator->selected_floor;
      doc["elevator"] = lift;
    }
    doc["rng_state"] = scene.rng.state();
  }
  return doc;
}

Scene scene_from_json(const json& doc) {
  only_keys(doc,
            {"objects", "robot", "limits", "bounds", "seed", "params", "clock", "events", "scheduled", "elevator",
             "rng_state"},
            "scene");
  Scene scene;
  if (doc.contains("limits")) scene.limits = limits_from_json(doc.at("limits"));
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) reject("seed must be an integer");
    scene.seed = doc.at("seed").get<std::uint64_t>();
  }
  scene.rng = Rng(scene.seed);
  if (doc.contains("bounds")) {
    const auto& b = doc.at("bounds");
    if (!b.is_array() || b.size() != 4) reject("bounds must be [min_x, min_y, max_x, max_y]");
    scene.bounds = Bounds{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
  }
  if (!doc.contains("objects") || !doc.at("objects").is_array()) reject("scene: objects must be a list");
  for (const auto& rec : doc.at("objects")) {
    only_keys(rec, {"id", "kind", "pose", "size", "movable", "mass"}, "object");
    ObjectSpec obj;
    obj.id = string_or(rec, "id", "", "object");
    const std::string where = "object '" + obj.id + "'";
    if (!rec.contains("kind")) reject(where + ": missing kind");
    obj.kind = kind_from_json(rec.at("kind"), where);
    if (!rec.contains("pose")) reject(where + ": missing pose");
    obj.pose = pose_from_json(rec.at("pose"), where);
    if (!rec.contains("size")) reject(where + ": missing size");
    obj.size = vec3_from_json(rec.at("size"));
    if (rec.contains("movable")) {
      if (!rec.at("movable").is_boolean()) reject(where + ": movable must be a boolean");
      obj.movable = rec.at("movable").get<bool>();
    }
    obj.mass = number_or(rec, "mass", 0.0, where);
    add_object(scene, std::move(obj));
  }
  if (!doc.contains("robot")) reject("scene: missing robot");
  scene.robot = robot_from_json(doc.at("robot"), scene.limits);
  if (doc.contains("params")) {
    const auto& p = doc.at("params");
    if (!p.is_object()) reject("params must be an object");
    for (const auto& [k, v] : p.items()) {
      if (!v.is_number()) reject("params." + k + " must be a number");
      scene.params[k] = v.get<double>();
    }
  }
  bool has_lift = false;
  for (const auto& [id, obj] : scene.objects) has_lift = has_lift || obj.is<ElevatorPanelKind>();
  if (has_lift) scene.elevator = ElevatorState{scene.robot.floor, std::nullopt, std::nullopt};

  if (doc.contains("clock")) scene.clock = number(doc, "clock", "scene");
  if (doc.contains("events")) scene.events = doc.at("events").get<std::set<std::string>>();
  if (doc.contains("scheduled")) {
    for (const auto& s : doc.at("scheduled")) {
      only_keys(s, {"time", "event"}, "scheduled");
      scene.scheduled.push_back({number(s, "time", "scheduled"), string_or(s, "event", "", "scheduled")});
    }
  }
  if (doc.contains("elevator")) {
    const auto& e = doc.at("elevator");
    only_keys(e, {"cabin_floor", "direction", "selected_floor"}, "elevator");
    ElevatorState lift;
    lift.cabin_floor = e.value("cabin_floor", 1);
    if (e.contains("direction")) lift.direction = direction_from(e.at("direction").get<std::string>(), "elevator");
    if (e.contains("selected_floor")) lift.selected_floor = e.at("selected_floor").get<int>();
    scene.elevator = lift;
  }
  if (doc.contains("rng_state")) scene.rng.set_state(doc.at("rng_state").get<std::string>());
  validate_scene(scene);
  return scene;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) reject("cannot open scene file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    reject("scene file " + path.string() + ": " + e.what());
  }
  return scene_from_json(doc);
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << scene_to_json(scene).dump(2) << '\n';
}

}  // namespace quadplan
