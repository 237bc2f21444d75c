// SPDX-License-Identifier: Apache-2.0
#include "quadplan/skill_catalog.hpp"

#include <sstream>

namespace quadplan {

std::string_view param_type_name(ParamType type) {
  switch (type) {
    case ParamType::Number: return "number";
    case ParamType::Object: return "object";
    case ParamType::Event: return "event";
  }
  return "?";
}

std::size_t SkillSignature::min_arity() const {
  std::size_t n = 0;
  for (const auto& p : params) {
    if (!p.optional) ++n;
  }
  return n;
}

std::string SkillSignature::signature_text() const {
  std::string out = name + "(";
  bool first = true;
  for (const auto& p : params) {
    if (p.optional) out += "[";
    if (!first) out += ", ";
    out += p.name;
    if (p.optional) out += "]";
    first = false;
  }
  return out + ")";
}

void SkillCatalog::add(SkillSignature signature) {
  const std::string key = signature.name;
  entries_.insert_or_assign(key, std::move(signature));
}

const SkillSignature* SkillCatalog::find(std::string_view name) const {
  const auto it = entries_.find(std::string(name));
  return it == entries_.end() ? nullptr : &it->second;
}

const SkillCatalog& SkillCatalog::standard() {
  static const SkillCatalog catalog = [] {
    SkillCatalog c;
    const ParamSpec x{"x", ParamType::Number, false, "target x in meters"};
    const ParamSpec y{"y", ParamType::Number, false, "target y in meters"};
    const ParamSpec z{"z", ParamType::Number, false, "target z in meters"};
    const ParamSpec yaw{"yaw", ParamType::Number, false, "final heading in radians"};

    c.add({"walk_to_position",
           {x, y, {"z", ParamType::Number, false, "support level of the target (the current floor height)"}, yaw,
            {"avoid", ParamType::Object, true, "object to keep an extra clearance from"}},
           "Walk on the current support level to the base pose (x, y, yaw), avoiding obstacles. "
           "The base ends exactly at the target.",
           {"robot must be quadrupedal",
            "z must equal the current support height (walking never changes level)",
            "the base keeps robot_radius clearance from every obstacle; avoid adds a further margin",
            "fails with NoPath when the target is blocked or unreachable"},
           Stance::Quadrupedal,
           std::nullopt});
    c.add({"push_to_position",
           {{"obj", ParamType::Object, false, "movable object to push"},
            {"x", ParamType::Number, false, "object target x (bottom center)"},
            {"y", ParamType::Number, false, "object target y (bottom center)"},
            yaw},
           "Push a movable object in a straight line so its bottom center ends at (x, y). "
           "The robot walks to the far side of the object first and ends behind it.",
           {"robot must be quadrupedal and on the same level as the object",
            "object mass must not exceed push_mass_limit",
            "the object stops flush at the first solid it would hit (Blocked)",
            "the final object pose has terminal noise"},
           Stance::Quadrupedal,
           std::nullopt});
    c.add({"climb_to_position",
           {x, y, {"z", ParamType::Number, false, "height of the surface the robot ends on"}},
           "Climb along the straight line to (x, y) and end standing on the surface at height z.",
           {"robot must be quadrupedal",
            "every rise or drop along the path must be at most max_step_height",
            "every intermediate tread must be at least step_depth_min deep",
            "z must be the top surface under (x, y), and the whole body (robot_length) must fit on it",
            "each rise may slip; a slip leaves the robot on the last stable surface"},
           Stance::Quadrupedal,
           std::nullopt});
    c.add({"stand_up",
           {},
           "Rise onto the hind legs. The front toe starts just ahead of the base.",
           {"robot must be quadrupedal", "needs free space of the bipedal body height above the robot"},
           Stance::Quadrupedal,
           Stance::Bipedal});
    c.add({"hand_touch_position",
           {x, y, z},
           "Move the front toe to (x, y, z) and touch it. Touching a button, bell or panel button fires its event.",
           {"robot must be bipedal",
            "the target must be within reach_radius horizontally from the base",
            "the target height must be between the support height and support + bipedal_reach_height",
            "success needs the toe within touch_epsilon of the target"},
           Stance::Bipedal,
           std::nullopt});
    c.add({"sit_down",
           {},
           "Return from the bipedal stance to four legs.",
           {"robot must be bipedal"},
           Stance::Bipedal,
           Stance::Quadrupedal});
    c.add({"recover",
           {},
           "Restore a stable quadrupedal stance where the robot is. Always succeeds.",
           {},
           std::nullopt,
           Stance::Quadrupedal});
    c.add({"wait_for_event",
           {{"event", ParamType::Event, false, "event name"},
            {"timeout", ParamType::Number, false, "maximum wait in seconds"}},
           "Wait until the event has fired or the timeout passes.",
           {"timeout must be positive", "fails with Timeout if the event does not fire in time"},
           std::nullopt,
           std::nullopt});
    return c;
  }();
  return catalog;
}

std::string SkillCatalog::render_text() const {
  std::ostringstream out;
  for (const auto& [name, sig] : entries_) {
    out << "### " << sig.signature_text() << "\n\n" << sig.doc << "\n\n";
    if (!sig.params.empty()) {
      out << "Parameters:\n";
      for (const auto& p : sig.params) {
        out << "- " << p.name << " (" << param_type_name(p.type) << (p.optional ? ", optional" : "") << "): " << p.doc
            << "\n";
      }
      out << "\n";
    }
    if (!sig.constraints.empty()) {
      out << "Constraints:\n";
      for (const auto& c : sig.constraints) out << "- " << c << "\n";
      out << "\n";
    }
  }
  out << "### Expression functions\n\n";
  for (const auto& b : expression_builtins()) out << "- " << b.name << ": " << b.doc << "\n";
  return out.str();
}

nlohmann::json SkillCatalog::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [name, sig] : entries_) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : sig.params) {
      params.push_back({{"name", p.name}, {"type", param_type_name(p.type)}, {"optional", p.optional}, {"doc", p.doc}});
    }
    out.push_back({{"name", name},
                   {"signature", sig.signature_text()},
                   {"doc", sig.doc},
                   {"params", params},
                   {"constraints", sig.constraints}});
  }
  return out;
}

const std::vector<BuiltinSpec>& expression_builtins() {
  static const std::vector<BuiltinSpec> builtins{
      {"abs", 1, "abs(a) absolute value"},
      {"get_position", 1, "get_position(id) bottom-center position of an object; for robot, (x, y, support height)"},
      {"get_size", 1, "get_size(id) bounding-box size of an object; for robot, the body size"},
      {"max", 2, "max(a, b)"},
      {"min", 2, "min(a, b)"},
      {"vec3", 3, "vec3(x, y, z) builds a vector; read components with .x .y .z"},
  };
  return builtins;
}

}  // namespace quadplan
