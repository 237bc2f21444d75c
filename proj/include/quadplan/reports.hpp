// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadplan/skills.hpp"
#include "quadplan/world.hpp"

namespace quadplan {

/// What the replanner learns about a failed skill. Filled from the trace and
/// the simulator state only.
struct ErrorReport {
  SkillInvocation failed_skill;
  FailReason reason = FailReason::None;
  std::string detail;
  /// The offending rise for StepTooHigh.
  std::optional<double> rise;
  /// Robot state after recovery.
  RobotState robot;
  std::string object_id;
  Pose object_pose;
  Vec3 object_size;
  std::optional<double> min_distance;
  std::vector<std::string> fired_events;
  double clock = 0.0;
  /// Statement index of the failed call in the plan that was running.
  std::size_t location = 0;

  /// Plain-text rendering used in replanner prompts.
  [[nodiscard]] std::string to_text() const;
};

nlohmann::json error_report_to_json(const ErrorReport& report);

enum class NoticeSource { Operator, Script };

struct InterruptionNotice {
  double clock = 0.0;
  std::string instruction;
  NoticeSource source = NoticeSource::Operator;
};

nlohmann::json notice_to_json(const InterruptionNotice& notice);

/// Why the executor asks for a new plan.
using ReplanCause = std::variant<ErrorReport, std::vector<InterruptionNotice>>;

}  // namespace quadplan
