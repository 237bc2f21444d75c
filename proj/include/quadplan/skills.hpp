// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadplan/world.hpp"

namespace quadplan {

enum class FailReason {
  None,
  NoPath,
  BadStance,
  Unpushable,
  Blocked,
  LevelMismatch,
  StepTooHigh,
  TreadTooShallow,
  BadTarget,
  Slip,
  NoClearance,
  OutOfReach,
  Timeout,
};

std::string_view fail_reason_name(FailReason reason);
std::optional<FailReason> fail_reason_from_name(std::string_view name);

/// Precondition errors that are not skill outcomes: bad arguments, unknown ids.
class SkillError : public std::runtime_error {
 public:
  enum class Kind { UnknownSkill, BadArguments, UnknownObject, UnknownEvent };
  SkillError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Terminal-state noise standing in for skill-chaining mismatch.
struct NoiseRegime {
  double push_terminal_sigma = 0.0;
  double climb_slip_prob = 0.0;
  double touch_jitter_sigma = 0.0;

  static NoiseRegime zero() { return {}; }
  static NoiseRegime raw() { return {0.04, 0.02, 0.015}; }
  static NoiseRegime chained_finetuned() { return {0.02, 0.01, 0.015}; }
  /// "zero", "raw" or "chained-finetuned"; throws std::invalid_argument.
  static NoiseRegime preset(std::string_view name);

  friend bool operator==(const NoiseRegime&, const NoiseRegime&) = default;
};

struct SkillOutcome {
  bool success = true;
  FailReason reason = FailReason::None;
  std::string detail;
  /// The offending rise for StepTooHigh.
  std::optional<double> rise;
  double duration = 0.0;
  RobotState terminal;
  std::optional<double> min_distance;
  /// Events fired while the skill ran, in firing order.
  std::vector<std::string> events;

  [[nodiscard]] bool ok() const { return success; }
};

nlohmann::json outcome_to_json(const SkillOutcome& outcome);

using SkillArg = std::variant<double, std::string>;

struct SkillInvocation {
  std::string name;
  std::vector<SkillArg> args;

  friend bool operator==(const SkillInvocation&, const SkillInvocation&) = default;
};

nlohmann::json invocation_to_json(const SkillInvocation& call);
std::string format_invocation(const SkillInvocation& call);

// Skills. Each mutates the scene, advances its clock by the returned duration
// and fires any scheduled events that come due meanwhile.

SkillOutcome walk_to_position(Scene& scene, const Pose& target, const std::optional<std::string>& avoid,
                              const NoiseRegime& noise);
SkillOutcome push_to_position(Scene& scene, const std::string& object_id, const Pose& target,
                              const NoiseRegime& noise);
SkillOutcome climb_to_position(Scene& scene, Vec3 target, const NoiseRegime& noise);
SkillOutcome stand_up(Scene& scene, const NoiseRegime& noise);
SkillOutcome hand_touch_position(Scene& scene, Vec3 target, const NoiseRegime& noise);
SkillOutcome sit_down(Scene& scene, const NoiseRegime& noise);
SkillOutcome recover(Scene& scene, const NoiseRegime& noise);
SkillOutcome wait_for_event(Scene& scene, const std::string& event, double timeout, const NoiseRegime& noise);

/// Dispatches by catalog name. Throws SkillError on unknown skills or arguments.
SkillOutcome invoke_skill(Scene& scene, const SkillInvocation& call, const NoiseRegime& noise);

// Climbing geometry, shared with the plan validator.

struct Plateau {
  double start = 0.0;  // meters along the path
  double end = 0.0;
  double height = 0.0;
};

/// Ground profile under the straight segment from `from` to `to` (xy only),
/// split into plateaus of constant support height. Short dips are removed.
std::vector<Plateau> climb_profile(const Scene& scene, Vec3 from, double from_support, Vec3 to);

struct ClimbVerdict {
  bool feasible = true;
  FailReason reason = FailReason::None;
  std::optional<double> rise;
  std::string detail;
  std::vector<Plateau> plateaus;
  double path_length = 0.0;
};

/// Feasibility of climbing from the robot's pose to `target`; independent of noise.
ClimbVerdict check_climb(const Scene& scene, Vec3 target);

/// Reach envelope of the front toe in bipedal stance: a vertical cylinder of
/// radius reach_radius around the base, from the support surface up to
/// support + bipedal_reach_height.
bool in_reach_envelope(const Scene& scene, Vec3 target);
Vec3 closest_envelope_point(const Scene& scene, Vec3 target);

/// Default toe position right after standing up.
Vec3 default_toe(const RobotState& robot);

}  // namespace quadplan
