// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadplan/agents/types.hpp"
#include "quadplan/executor.hpp"
#include "quadplan/world.hpp"

namespace quadplan {

class BenchmarkError : public std::runtime_error {
 public:
  enum class Kind { InfeasibleConfig, UnknownTask };
  BenchmarkError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class TaskKind { LightSwitching, PackageDelivery, BridgeBuilding, ElevatorRide };

/// Short names: light, delivery, bridge, elevator.
std::string_view task_name(TaskKind task);
TaskKind task_from_name(std::string_view name);
const std::vector<TaskKind>& all_tasks();

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct TaskConfig {
  TaskKind task = TaskKind::LightSwitching;
  std::uint64_t seed = 0;
  /// Light switching: rise of the first stair.
  Range first_rise{0.25, 0.45};
  /// Relative half-widths of the size, pose and mass jitter.
  double size_jitter = 0.2;
  double pose_jitter = 0.3;
  double mass_jitter = 0.3;
  /// Package delivery: probability that someone answers the bell.
  double human_response_prob = 1.0;
  /// Elevator ride: floors are numbered 1..floors.
  int floors = 4;

  /// Throws BenchmarkError::InfeasibleConfig on ranges that cannot be sampled.
  void check() const;
};

nlohmann::json task_config_to_json(const TaskConfig& cfg);
TaskConfig task_config_from_json(const nlohmann::json& doc);

/// Randomized scene for the task. Resamples up to ten times when a draw is
/// unconstructible, then throws BenchmarkError::InfeasibleConfig.
Scene build_scene(const TaskConfig& cfg);

/// Names, prose and rules handed to the planning agents for a scene.
agents::EnvDescription describe(TaskKind task, const Scene& scene);

/// Task predicate on a single state.
bool task_done(TaskKind task, const Scene& initial, const Snapshot& state);

/// True when the task predicate held at some skill boundary no later than
/// `time_limit`.
bool success(TaskKind task, const ExecutionTrace& trace, double time_limit = 300.0);

/// Distance the task is scored on, for one state.
double task_distance(TaskKind task, const Scene& initial, const Snapshot& state);

/// Running minimum of task_distance over the trace divided by its initial
/// value; 0 when the initial distance is 0.
double norm_dist(TaskKind task, const ExecutionTrace& trace);

/// Needs the movable box: the first stair rise exceeds the step limit.
bool light_needs_box(const Scene& scene);

struct MetricSample {
  bool success = false;
  double norm_dist = 1.0;
  double clock = 0.0;
  int replans = 0;
  Outcome outcome = Outcome::Completed;
};

MetricSample measure(TaskKind task, const ExecutionTrace& trace, double time_limit = 300.0);

}  // namespace quadplan
