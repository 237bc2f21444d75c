// SPDX-License-Identifier: Apache-2.0
#include "quadplan/skills.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "quadplan/navigation.hpp"
#include "quadplan/skill_catalog.hpp"

namespace quadplan {

namespace {

constexpr double kEps = 1e-9;
constexpr double kLevelTolerance = 0.01;
constexpr double kStandDuration = 3.0;
constexpr double kSitDuration = 2.0;
constexpr double kTouchDuration = 2.0;
constexpr double kRecoverDuration = 4.0;
constexpr double kSecondsPerRise = 1.5;
constexpr double kToeForward = 0.15;
constexpr double kToeHeight = 0.45;
constexpr double kClimbTargetTolerance = 0.05;
constexpr double kFootMargin = 0.05;

SkillOutcome failure(const Scene& scene, FailReason reason, std::string detail) {
  SkillOutcome out;
  out.success = false;
  out.reason = reason;
  out.detail = std::move(detail);
  out.terminal = scene.robot;
  return out;
}

/// Advances the clock by the skill duration and stamps the outcome.
SkillOutcome finish(Scene& scene, SkillOutcome out, double duration) {
  out.duration = duration;
  auto fired = advance_clock(scene, scene.clock + duration);
  out.events.insert(out.events.end(), fired.begin(), fired.end());
  out.terminal = scene.robot;
  return out;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::fixed << v;
  return s.str();
}

Vec3 heading(double yaw) { return {std::cos(yaw), std::sin(yaw), 0.0}; }

}  // namespace

std::string_view fail_reason_name(FailReason reason) {
  switch (reason) {
    case FailReason::None: return "None";
    case FailReason::NoPath: return "NoPath";
    case FailReason::BadStance: return "BadStance";
    case FailReason::Unpushable: return "Unpushable";
    case FailReason::Blocked: return "Blocked";
    case FailReason::LevelMismatch: return "LevelMismatch";
    case FailReason::StepTooHigh: return "StepTooHigh";
    case FailReason::TreadTooShallow: return "TreadTooShallow";
    case FailReason::BadTarget: return "BadTarget";
    case FailReason::Slip: return "Slip";
    case FailReason::NoClearance: return "NoClearance";
    case FailReason::OutOfReach: return "OutOfReach";
    case FailReason::Timeout: return "Timeout";
  }
  return "?";
}

std::optional<FailReason> fail_reason_from_name(std::string_view name) {
  for (int r = 0; r <= static_cast<int>(FailReason::Timeout); ++r) {
    if (fail_reason_name(static_cast<FailReason>(r)) == name) return static_cast<FailReason>(r);
  }
  return std::nullopt;
}

NoiseRegime NoiseRegime::preset(std::string_view name) {
  if (name == "zero") return zero();
  if (name == "raw") return raw();
  if (name == "chained-finetuned") return chained_finetuned();
  throw std::invalid_argument("unknown noise preset '" + std::string(name) + "'");
}

nlohmann::json outcome_to_json(const SkillOutcome& o) {
  nlohmann::json j{{"status", o.success ? "Success" : "Failure"}, {"duration", o.duration}};
  if (!o.success) j["reason"] = fail_reason_name(o.reason);
  if (!o.detail.empty()) j["detail"] = o.detail;
  if (o.rise) j["rise"] = *o.rise;
  if (o.min_distance) j["min_distance"] = *o.min_distance;
  if (!o.events.empty()) j["events"] = o.events;
  return j;
}

nlohmann::json invocation_to_json(const SkillInvocation& call) {
  nlohmann::json args = nlohmann::json::array();
  for (const auto& a : call.args) {
    if (const auto* d = std::get_if<double>(&a)) {
      args.push_back(*d);
    } else {
      args.push_back(std::get<std::string>(a));
    }
  }
  return {{"skill", call.name}, {"args", args}};
}

std::string format_invocation(const SkillInvocation& call) {
  std::string out = call.name + "(";
  for (std::size_t i = 0; i < call.args.size(); ++i) {
    if (i) out += ", ";
    if (const auto* d = std::get_if<double>(&call.args[i])) {
      out += num(*d);
    } else {
      out += std::get<std::string>(call.args[i]);
    }
  }
  return out + ")";
}

Vec3 default_toe(const RobotState& robot) {
  const Vec3 fwd = heading(robot.base.yaw);
  return {robot.base.position.x + kToeForward * fwd.x, robot.base.position.y + kToeForward * fwd.y,
          robot.support_height + kToeHeight};
}

bool in_reach_envelope(const Scene& scene, Vec3 target) {
  const RobotState& r = scene.robot;
  const double dz = target.z - r.support_height;
  return distance_xy(target, r.base.position) <= scene.limits.reach_radius + kEps && dz >= -kEps &&
         dz <= scene.limits.bipedal_reach_height + kEps;
}

Vec3 closest_envelope_point(const Scene& scene, Vec3 target) {
  const RobotState& r = scene.robot;
  Vec3 out = target;
  const Vec3 off = target - r.base.position;
  const double h = off.norm_xy();
  if (h > scene.limits.reach_radius) {
    const double s = scene.limits.reach_radius / h;
    out.x = r.base.position.x + off.x * s;
    out.y = r.base.position.y + off.y * s;
  }
  out.z = std::clamp(target.z, r.support_height, r.support_height + scene.limits.bipedal_reach_height);
  return out;
}

// --- walking ---------------------------------------------------------------

SkillOutcome walk_to_position(Scene& scene, const Pose& target, const std::optional<std::string>& avoid,
                              const NoiseRegime&) {
  if (scene.robot.stance != Stance::Quadrupedal) {
    return failure(scene, FailReason::BadStance, "walk needs the quadrupedal stance");
  }
  if (avoid && !scene.has_object(*avoid)) {
    throw SkillError(SkillError::Kind::UnknownObject, "unknown object '" + *avoid + "'");
  }
  const double level = scene.robot.support_height;
  if (std::abs(target.position.z - level) > kLevelTolerance + kEps) {
    return failure(scene, FailReason::NoPath,
                   "target z " + num(target.position.z) + " is not the current support level " + num(level));
  }
  NavRequest req;
  req.start = scene.robot.base.position;
  req.goal = target.position;
  req.level = level;
  req.inflation = scene.limits.body_radius();
  req.avoid = avoid;
  Navigator nav(scene, req);
  const auto path = nav.plan();
  if (!path) {
    return failure(scene, FailReason::NoPath,
                   "no path to (" + num(target.position.x) + ", " + num(target.position.y) + ")");
  }
  const double length = path_length(*path);
  const double support = support_height_at(scene, target.position.x, target.position.y);
  place_robot(scene.robot, scene.limits, target.position.x, target.position.y, support, Stance::Quadrupedal);
  scene.robot.base.yaw = normalize_yaw(target.yaw);
  SkillOutcome out;
  out.min_distance = 0.0;
  return finish(scene, out, length / scene.limits.walk_speed);
}

// --- pushing ---------------------------------------------------------------

namespace {

/// Earliest t in [0, 1) at which `box` moved by t * delta would share volume
/// with another solid or leave the scene bounds; 1 if never.
double first_contact(const Scene& scene, const std::string& id, const Aabb& box, Vec3 delta) {
  double t_stop = 1.0;
  auto axis_window = [](double a_min, double a_max, double b_min, double b_max, double d, double& lo,
                        double& hi) {
    if (std::abs(d) < 1e-15) {
      if (a_min < b_max - kEps && b_min < a_max - kEps) {
        lo = -std::numeric_limits<double>::infinity();
        hi = std::numeric_limits<double>::infinity();
      } else {
        lo = 1.0;
        hi = 0.0;
      }
      return;
    }
    lo = (b_min - a_max) / d;
    hi = (b_max - a_min) / d;
    if (lo > hi) std::swap(lo, hi);
  };
  for (const auto& [other_id, obj] : scene.objects) {
    if (other_id == id || !obj.solid()) continue;
    const Aabb ob = obj.bounds();
    if (!(box.min.z < ob.max.z - kEps && ob.min.z < box.max.z - kEps)) continue;
    double lx, hx, ly, hy;
    axis_window(box.min.x, box.max.x, ob.min.x, ob.max.x, delta.x, lx, hx);
    axis_window(box.min.y, box.max.y, ob.min.y, ob.max.y, delta.y, ly, hy);
    const double entry = std::max(lx, ly);
    const double exit = std::min(hx, hy);
    if (exit - entry <= 1e-9 || entry >= t_stop || exit <= 1e-12) continue;
    if (entry <= 0.0) continue;  // already touching at the start: ignore
    t_stop = entry;
  }
  // Scene bounds.
  const Bounds& b = scene.bounds;
  auto bound_t = [&](double edge, double limit, double d) {
    if (d > 0 && edge + d > limit) t_stop = std::min(t_stop, std::max(0.0, (limit - edge) / d));
  };
  bound_t(box.max.x, b.max_x, delta.x);
  bound_t(box.max.y, b.max_y, delta.y);
  bound_t(-box.min.x, -b.min_x, -delta.x);
  bound_t(-box.min.y, -b.min_y, -delta.y);
  return t_stop;
}

bool overlaps_any(const Scene& scene, const std::string& id, const Aabb& box) {
  const Bounds& b = scene.bounds;
  if (box.min.x < b.min_x - kEps || box.max.x > b.max_x + kEps || box.min.y < b.min_y - kEps ||
      box.max.y > b.max_y + kEps) {
    return true;
  }
  for (const auto& [other_id, obj] : scene.objects) {
    if (other_id == id || !obj.solid()) continue;
    if (overlaps_with_volume(box, obj.bounds())) return true;
  }
  return false;
}

Aabb shifted(const Aabb& box, Vec3 d) { return {box.min + d, box.max + d}; }

}  // namespace

SkillOutcome push_to_position(Scene& scene, const std::string& object_id, const Pose& target,
                              const NoiseRegime& noise) {
  if (!scene.has_object(object_id)) {
    throw SkillError(SkillError::Kind::UnknownObject, "unknown object '" + object_id + "'");
  }
  if (scene.robot.stance != Stance::Quadrupedal) {
    return failure(scene, FailReason::BadStance, "push needs the quadrupedal stance");
  }
  ObjectSpec& obj = scene.object(object_id);
  if (!obj.movable) return failure(scene, FailReason::Unpushable, object_id + " is not movable");
  if (obj.mass > scene.limits.push_mass_limit + kEps) {
    return failure(scene, FailReason::Unpushable,
                   object_id + " weighs " + num(obj.mass) + " kg, above the push limit " +
                       num(scene.limits.push_mass_limit));
  }
  const double level = scene.robot.support_height;
  if (std::abs(obj.pose.position.z - level) > kLevelTolerance + kEps) {
    return failure(scene, FailReason::LevelMismatch,
                   "robot stands at " + num(level) + " but " + object_id + " rests at " + num(obj.pose.position.z));
  }

  const Vec3 start{obj.pose.position.x, obj.pose.position.y, 0.0};
  const Vec3 goal{target.position.x, target.position.y, 0.0};
  Vec3 delta = goal - start;
  const double commanded = delta.norm_xy();
  Vec3 dir;
  if (commanded > 1e-9) {
    dir = delta / commanded;
  } else {
    const Vec3 to_obj = Vec3{start.x, start.y, 0} - Vec3{scene.robot.base.position.x, scene.robot.base.position.y, 0};
    dir = to_obj.norm_xy() > 1e-9 ? to_obj / to_obj.norm_xy() : heading(scene.robot.base.yaw);
  }
  const double half_along = 0.5 * (obj.size.x * std::abs(dir.x) + obj.size.y * std::abs(dir.y));
  const double standoff = half_along + 0.5 * scene.limits.quad_body.x;
  const Vec3 contact_pose = start - dir * standoff;
  const double approach = distance_xy(scene.robot.base.position, contact_pose);

  const Aabb box0 = obj.bounds();
  const double t_stop = first_contact(scene, object_id, box0, delta);
  bool blocked = t_stop < 1.0 - 1e-12;
  Vec3 final_xy = start + delta * (blocked ? t_stop : 1.0);

  if (!blocked && noise.push_terminal_sigma > 0.0) {
    const Vec3 offset{scene.rng.truncated_normal(noise.push_terminal_sigma),
                      scene.rng.truncated_normal(noise.push_terminal_sigma), 0.0};
    // Noise that would push the object into a solid is clamped back to contact.
    double scale = 1.0;
    if (overlaps_any(scene, object_id, shifted(box0, final_xy - start + offset))) {
      double lo = 0.0;
      double hi = 1.0;
      for (int k = 0; k < 40; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (overlaps_any(scene, object_id, shifted(box0, final_xy - start + offset * mid))) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      scale = lo;
    }
    final_xy = final_xy + offset * scale;
  }

  obj.pose.position.x = final_xy.x;
  obj.pose.position.y = final_xy.y;
  obj.pose.yaw = normalize_yaw(target.yaw);
  obj.pose.position.z = support_under_footprint(scene, obj.bounds(), object_id);

  const Vec3 robot_xy = final_xy - dir * standoff;
  const double robot_support =
      scene.bounds.contains(robot_xy.x, robot_xy.y) ? support_height_at(scene, robot_xy.x, robot_xy.y) : level;
  place_robot(scene.robot, scene.limits, robot_xy.x, robot_xy.y,
              std::abs(robot_support - level) <= kLevelTolerance ? robot_support : level, Stance::Quadrupedal);
  scene.robot.base.yaw = normalize_yaw(std::atan2(dir.y, dir.x));

  const double moved = distance_xy(start, final_xy);
  SkillOutcome out;
  out.min_distance = distance_xy(final_xy, goal);
  if (blocked) {
    out.success = false;
    out.reason = FailReason::Blocked;
    out.detail = object_id + " stopped after " + num(moved) + " of " + num(commanded) + " m";
  }
  return finish(scene, out, (approach + moved) / scene.limits.push_speed);
}

// --- climbing --------------------------------------------------------------

std::vector<Plateau> climb_profile(const Scene& scene, Vec3 from, double from_support, Vec3 to) {
  const Vec3 d{to.x - from.x, to.y - from.y, 0.0};
  const double length = d.norm_xy();
  if (length < 1e-9) return {Plateau{0.0, 0.0, from_support}};

  std::vector<double> cuts{0.0, length};
  auto add_cut = [&](double coord, double origin, double slope) {
    if (std::abs(slope) < 1e-15) return;
    const double t = (coord - origin) / slope;
    if (t > 0.0 && t < 1.0) cuts.push_back(t * length);
  };
  for (const auto& [id, obj] : scene.objects) {
    if (!obj.solid()) continue;
    const Aabb b = obj.bounds();
    add_cut(b.min.x, from.x, d.x);
    add_cut(b.max.x, from.x, d.x);
    add_cut(b.min.y, from.y, d.y);
    add_cut(b.max.y, from.y, d.y);
    if (const auto* stairs = std::get_if<StairsKind>(&obj.kind)) {
      for (std::size_t k = 1; k < stairs->step_heights.size(); ++k) {
        add_cut(b.min.x + static_cast<double>(k) * stairs->step_depth, from.x, d.x);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());

  std::vector<Plateau> raw;
  for (std::size_t k = 1; k < cuts.size(); ++k) {
    if (cuts[k] - cuts[k - 1] < 1e-9) continue;
    const double mid = 0.5 * (cuts[k] + cuts[k - 1]) / length;
    const double h = support_height_at(scene, from.x + d.x * mid, from.y + d.y * mid);
    if (!raw.empty() && std::abs(raw.back().height - h) < 1e-9) {
      raw.back().end = cuts[k];
    } else {
      raw.push_back({cuts[k - 1], cuts[k], h});
    }
  }
  // The robot starts on its own support regardless of what lies under its center.
  if (!raw.empty() && std::abs(raw.front().height - from_support) > 1e-9) {
    if (raw.size() > 1 && std::abs(raw[1].height - from_support) < 1e-9) {
      raw[1].start = 0.0;
      raw.erase(raw.begin());
    } else {
      raw.front().height = from_support;
    }
  }

  // Step over short dips lower than both neighbours, then merge equal plateaus.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      const Plateau& p = raw[i];
      if (p.height < raw[i - 1].height && p.height < raw[i + 1].height &&
          p.end - p.start <= scene.limits.step_over_gap + 1e-9) {
        const double mid = 0.5 * (p.start + p.end);
        raw[i - 1].end = mid;
        raw[i + 1].start = mid;
        raw.erase(raw.begin() + static_cast<long>(i));
        changed = true;
        break;
      }
    }
    for (std::size_t i = 1; i < raw.size(); ++i) {
      if (std::abs(raw[i].height - raw[i - 1].height) < 1e-9) {
        raw[i - 1].end = raw[i].end;
        raw.erase(raw.begin() + static_cast<long>(i));
        changed = true;
        break;
      }
    }
  }
  return raw;
}

ClimbVerdict check_climb(const Scene& scene, Vec3 target) {
  ClimbVerdict v;
  auto reject = [&](FailReason reason, std::string detail) {
    v.feasible = false;
    v.reason = reason;
    v.detail = std::move(detail);
    return v;
  };
  if (!scene.bounds.contains(target.x, target.y)) return reject(FailReason::BadTarget, "target outside the scene");
  const RobotState& r = scene.robot;
  v.path_length = distance_xy(r.base.position, target);
  v.plateaus = climb_profile(scene, r.base.position, r.support_height, target);
  const auto& ps = v.plateaus;
  for (std::size_t k = 1; k < ps.size(); ++k) {
    const double rise = std::abs(ps[k].height - ps[k - 1].height);
    if (rise > scene.limits.max_step_height + kEps) {
      v.rise = rise;
      return reject(FailReason::StepTooHigh,
                    "rise of " + num(rise) + " m exceeds the step limit " + num(scene.limits.max_step_height));
    }
    if (k + 1 < ps.size() && ps[k].end - ps[k].start < scene.limits.step_depth_min - kEps) {
      return reject(FailReason::TreadTooShallow, "tread of " + num(ps[k].end - ps[k].start) + " m at height " +
                                                     num(ps[k].height) + " is too shallow");
    }
  }
  const double final_h = ps.back().height;
  if (std::abs(target.z - final_h) > kClimbTargetTolerance + kEps) {
    return reject(FailReason::BadTarget,
                  "target z " + num(target.z) + " is not the surface height " + num(final_h) + " under the target");
  }
  if (v.path_length > 1e-9) {
    const Vec3 dir = Vec3{target.x - r.base.position.x, target.y - r.base.position.y, 0} / v.path_length;
    const double half = 0.5 * scene.limits.quad_body.x - kFootMargin;
    for (double s : {-half, half}) {
      const Vec3 p = target + dir * s;
      if (!scene.bounds.contains(p.x, p.y) || std::abs(support_height_at(scene, p.x, p.y) - final_h) > 1e-6) {
        return reject(FailReason::BadTarget, "the body does not fit on the surface at the target");
      }
    }
  }
  return v;
}

SkillOutcome climb_to_position(Scene& scene, Vec3 target, const NoiseRegime& noise) {
  if (scene.robot.stance != Stance::Quadrupedal) {
    return failure(scene, FailReason::BadStance, "climb needs the quadrupedal stance");
  }
  const ClimbVerdict v = check_climb(scene, target);
  if (!v.feasible) {
    SkillOutcome out = failure(scene, v.reason, v.detail);
    out.rise = v.rise;
    return out;
  }
  const Vec3 from = scene.robot.base.position;
  const Vec3 dir = v.path_length > 1e-9 ? Vec3{target.x - from.x, target.y - from.y, 0} / v.path_length : Vec3{};
  const auto& ps = v.plateaus;
  for (std::size_t k = 1; k < ps.size(); ++k) {
    if (!scene.rng.bernoulli(noise.climb_slip_prob)) continue;
    // Slip on rise k: back to the middle of the last stable plateau.
    const Plateau& stable = ps[k - 1];
    const double along = k == 1 ? 0.0 : 0.5 * (stable.start + stable.end);
    const Vec3 at = from + dir * along;
    place_robot(scene.robot, scene.limits, at.x, at.y, stable.height,
                scene.limits.hard_fall ? Stance::Fallen : Stance::Quadrupedal);
    SkillOutcome out;
    out.success = false;
    out.reason = FailReason::Slip;
    out.detail = "slipped on the step up to " + num(ps[k].height) + " m";
    out.min_distance = distance(Vec3{at.x, at.y, stable.height}, target);
    return finish(scene, out,
                  along / scene.limits.walk_speed + kSecondsPerRise * static_cast<double>(k - 1));
  }
  const double yaw = v.path_length > 1e-9 ? std::atan2(dir.y, dir.x) : scene.robot.base.yaw;
  place_robot(scene.robot, scene.limits, target.x, target.y, ps.back().height, Stance::Quadrupedal);
  scene.robot.base.yaw = normalize_yaw(yaw);
  SkillOutcome out;
  out.min_distance = std::abs(target.z - ps.back().height);
  return finish(scene, out,
                v.path_length / scene.limits.walk_speed + kSecondsPerRise * static_cast<double>(ps.size() - 1));
}

// --- bipedal skills --------------------------------------------------------

SkillOutcome stand_up(Scene& scene, const NoiseRegime&) {
  RobotState& r = scene.robot;
  if (r.stance != Stance::Quadrupedal) return failure(scene, FailReason::BadStance, "stand_up needs four legs");
  const auto ceiling = ceiling_at(scene, r.base.position.x, r.base.position.y, r.support_height);
  if (ceiling && *ceiling - r.support_height < scene.limits.bipedal_body_height - kEps) {
    return failure(scene, FailReason::NoClearance,
                   "only " + num(*ceiling - r.support_height) + " m of headroom");
  }
  place_robot(r, scene.limits, r.base.position.x, r.base.position.y, r.support_height, Stance::Bipedal);
  r.toe = default_toe(r);
  return finish(scene, SkillOutcome{}, kStandDuration);
}

SkillOutcome hand_touch_position(Scene& scene, Vec3 target, const NoiseRegime& noise) {
  RobotState& r = scene.robot;
  if (r.stance != Stance::Bipedal) return failure(scene, FailReason::BadStance, "hand_touch needs the bipedal stance");
  const bool reachable = in_reach_envelope(scene, target);
  const Vec3 aim = reachable ? target : closest_envelope_point(scene, target);
  const Vec3 jitter{scene.rng.truncated_normal(noise.touch_jitter_sigma),
                    scene.rng.truncated_normal(noise.touch_jitter_sigma),
                    scene.rng.truncated_normal(noise.touch_jitter_sigma)};
  const Vec3 toe = aim + jitter;
  r.toe = toe;

  SkillOutcome out;
  out.min_distance = distance(toe, target);
  if (!reachable) {
    out.success = false;
    out.reason = FailReason::OutOfReach;
    out.detail = "target is " + num(distance(aim, target)) + " m outside the reach envelope";
  } else if (*out.min_distance > scene.limits.touch_epsilon + kEps) {
    out.success = false;
    out.reason = FailReason::OutOfReach;
    out.detail = "toe ended " + num(*out.min_distance) + " m from the target";
  }
  out = finish(scene, out, kTouchDuration);

  // Whatever lies under the toe gets pressed.
  struct Press {
    double dist;
    std::string event;
    std::optional<int> floor;
  };
  std::vector<Press> presses;
  for (const auto& [id, obj] : scene.objects) {
    if (const auto* panel = std::get_if<ElevatorPanelKind>(&obj.kind)) {
      for (int f : panel->floors) {
        const auto p = touch_point(obj, f);
        if (p && distance(*p, toe) <= scene.limits.touch_epsilon + kEps) {
          presses.push_back({distance(*p, toe), "floor_selected", f});
        }
      }
      continue;
    }
    const auto p = touch_point(obj);
    if (!p || distance(*p, toe) > scene.limits.touch_epsilon + kEps) continue;
    if (const auto* b = std::get_if<ButtonKind>(&obj.kind)) presses.push_back({distance(*p, toe), b->event, {}});
    if (const auto* b = std::get_if<BellKind>(&obj.kind)) presses.push_back({distance(*p, toe), b->event, {}});
    if (const auto* c = std::get_if<ElevatorCallKind>(&obj.kind)) {
      presses.push_back({distance(*p, toe), c->direction == Direction::Up ? "call_up" : "call_down", {}});
    }
  }
  std::stable_sort(presses.begin(), presses.end(), [](const Press& a, const Press& b) { return a.dist < b.dist; });
  for (const auto& p : presses) {
    if (p.floor && scene.elevator) scene.elevator->selected_floor = *p.floor;
    fire_event(scene, p.event);
    out.events.push_back(p.event);
  }
  out.terminal = scene.robot;
  return out;
}

SkillOutcome sit_down(Scene& scene, const NoiseRegime&) {
  RobotState& r = scene.robot;
  if (r.stance != Stance::Bipedal) return failure(scene, FailReason::BadStance, "sit_down needs the bipedal stance");
  place_robot(r, scene.limits, r.base.position.x, r.base.position.y, r.support_height, Stance::Quadrupedal);
  return finish(scene, SkillOutcome{}, kSitDuration);
}

SkillOutcome recover(Scene& scene, const NoiseRegime&) {
  RobotState& r = scene.robot;
  if (r.stance == Stance::Quadrupedal) return finish(scene, SkillOutcome{}, 0.0);
  double support = r.support_height;
  if (scene.bounds.contains(r.base.position.x, r.base.position.y)) {
    support = support_height_at(scene, r.base.position.x, r.base.position.y);
  }
  place_robot(r, scene.limits, r.base.position.x, r.base.position.y, support, Stance::Quadrupedal);
  return finish(scene, SkillOutcome{}, kRecoverDuration);
}

SkillOutcome wait_for_event(Scene& scene, const std::string& event, double timeout, const NoiseRegime&) {
  if (!(timeout > 0.0)) throw SkillError(SkillError::Kind::BadArguments, "wait_for_event timeout must be positive");
  if (!defined_events(scene).contains(event)) {
    throw SkillError(SkillError::Kind::UnknownEvent, "unknown event '" + event + "'");
  }
  const double start = scene.clock;
  const double deadline = start + timeout;
  SkillOutcome out;
  while (!scene.events.contains(event)) {
    std::optional<double> next;
    for (const auto& s : scene.scheduled) {
      if (!next || s.time < *next) next = s.time;
    }
    if (!next || *next > deadline + kEps) {
      auto fired = advance_clock(scene, deadline);
      out.events.insert(out.events.end(), fired.begin(), fired.end());
      out.success = false;
      out.reason = FailReason::Timeout;
      out.detail = event + " did not fire within " + num(timeout) + " s";
      out.duration = scene.clock - start;
      out.terminal = scene.robot;
      return out;
    }
    auto fired = advance_clock(scene, *next);
    out.events.insert(out.events.end(), fired.begin(), fired.end());
  }
  out.duration = scene.clock - start;
  out.terminal = scene.robot;
  return out;
}

// --- dispatch --------------------------------------------------------------

SkillOutcome invoke_skill(Scene& scene, const SkillInvocation& call, const NoiseRegime& noise) {
  const SkillSignature* sig = SkillCatalog::standard().find(call.name);
  if (!sig) throw SkillError(SkillError::Kind::UnknownSkill, "unknown skill '" + call.name + "'");
  if (call.args.size() < sig->min_arity() || call.args.size() > sig->max_arity()) {
    throw SkillError(SkillError::Kind::BadArguments, call.name + " takes " + std::to_string(sig->min_arity()) +
                                                         (sig->min_arity() == sig->max_arity()
                                                              ? ""
                                                              : "-" + std::to_string(sig->max_arity())) +
                                                         " arguments, got " + std::to_string(call.args.size()));
  }
  for (std::size_t i = 0; i < call.args.size(); ++i) {
    const bool want_number = sig->params[i].type == ParamType::Number;
    if (want_number != std::holds_alternative<double>(call.args[i])) {
      throw SkillError(SkillError::Kind::BadArguments,
                       call.name + ": argument '" + sig->params[i].name + "' must be " +
                           std::string(param_type_name(sig->params[i].type)));
    }
    if (want_number && !std::isfinite(std::get<double>(call.args[i]))) {
      throw SkillError(SkillError::Kind::BadArguments, call.name + ": argument '" + sig->params[i].name +
                                                           "' is not finite");
    }
  }
  auto n = [&](std::size_t i) { return std::get<double>(call.args[i]); };
  auto s = [&](std::size_t i) { return std::get<std::string>(call.args[i]); };
  const std::string& name = call.name;
  if (name == "walk_to_position") {
    std::optional<std::string> avoid;
    if (call.args.size() > 4) avoid = s(4);
    return walk_to_position(scene, Pose{{n(0), n(1), n(2)}, n(3)}, avoid, noise);
  }
  if (name == "push_to_position") return push_to_position(scene, s(0), Pose{{n(1), n(2), 0.0}, n(3)}, noise);
  if (name == "climb_to_position") return climb_to_position(scene, {n(0), n(1), n(2)}, noise);
  if (name == "stand_up") return stand_up(scene, noise);
  if (name == "hand_touch_position") return hand_touch_position(scene, {n(0), n(1), n(2)}, noise);
  if (name == "sit_down") return sit_down(scene, noise);
  if (name == "recover") return recover(scene, noise);
  if (name == "wait_for_event") return wait_for_event(scene, s(0), n(1), noise);
  throw SkillError(SkillError::Kind::UnknownSkill, "unknown skill '" + name + "'");
}

}  // namespace quadplan
