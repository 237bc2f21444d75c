// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadplan/dsl/ast.hpp"
#include "quadplan/reports.hpp"
#include "quadplan/skills.hpp"
#include "quadplan/world.hpp"

namespace quadplan {

class ExecutorError : public std::runtime_error {
 public:
  enum class Kind { QueueClosed, NoFailurePresent, BadConfig };
  ExecutorError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct RunConfig {
  double time_limit = 300.0;
  int replan_budget = 3;
  NoiseRegime noise = NoiseRegime::chained_finetuned();
  std::uint64_t seed = 0;
  /// When set, the first hand_touch aims this far above the bipedal reach
  /// (support + bipedal_reach_height + value), forcing an OutOfReach failure.
  std::optional<double> touch_overshoot;
  /// A plan with a ConstraintViolation fault on the scene it starts from is
  /// not run; the trajectory ends Rejected.
  bool reject_constraint_violations = true;

  /// Throws ExecutorError::BadConfig.
  void check() const;
};

enum class EntryKind { SkillCall, SkillOutcome, Event, Replan, Interruption, Abort };
std::string_view entry_kind_name(EntryKind kind);

/// Robot and movable-object state at a skill boundary.
struct Snapshot {
  RobotState robot;
  std::map<std::string, Pose> movable;
  std::vector<std::string> events;
  std::optional<int> selected_floor;
  std::optional<int> cabin_floor;
};

Snapshot take_snapshot(const Scene& scene);
nlohmann::json snapshot_to_json(const Snapshot& snapshot);

struct TraceEntry {
  double clock = 0.0;
  EntryKind kind = EntryKind::SkillCall;
  nlohmann::json payload;
  /// Present on SkillOutcome entries.
  std::optional<Snapshot> snapshot;
  /// Typed copies for report gathering.
  std::optional<SkillInvocation> call;
  std::optional<SkillOutcome> outcome;
};

nlohmann::json entry_to_json(const TraceEntry& entry);

enum class Outcome { Completed, TimedOut, UnsolvableDeclared, BudgetExhausted, Aborted, Rejected };
std::string_view outcome_name(Outcome outcome);

struct ExecutionTrace {
  static constexpr int kSchemaVersion = 1;

  std::vector<TraceEntry> entries;
  Outcome outcome = Outcome::Completed;
  std::string outcome_detail;
  Scene initial_scene;
  Scene final_scene;
  int replans = 0;
  /// Source of every plan that ran, the first one included.
  std::vector<std::string> plans;

  /// Header line, one line per entry, then a closing line with the outcome.
  [[nodiscard]] std::string to_jsonl() const;
  [[nodiscard]] std::string hash() const;
  [[nodiscard]] std::size_t count(EntryKind kind) const;
};

/// Single-producer/single-consumer channel from an operator to a running
/// trajectory. Notices are delivered at the next skill boundary.
class InterruptionQueue {
 public:
  /// Returns the clock at which the notice will be observed. While a skill
  /// is running this waits for it to finish, so the ack is its end clock.
  /// Throws ExecutorError::QueueClosed once the trajectory is terminal.
  /// Must not be called from the executor thread.
  double enqueue(InterruptionNotice notice);

  // Executor side.
  [[nodiscard]] bool pending() const;
  std::vector<InterruptionNotice> drain();
  /// Lets producers blocked on the last skill enqueue before the boundary
  /// is checked.
  void settle();
  [[nodiscard]] int waiting() const;
  void begin_skill();
  /// Called at every skill boundary with the scene clock.
  void set_boundary_clock(double clock);
  void close();
  [[nodiscard]] bool closed() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<InterruptionNotice> notices_;
  double boundary_clock_ = 0.0;
  bool in_skill_ = false;
  int waiting_ = 0;
  bool closed_ = false;
};

using Replanner = std::function<std::optional<dsl::Program>(const ReplanCause&, const Scene&)>;

struct ExecutionHooks {
  InterruptionQueue* interrupts = nullptr;
  /// Called for each entry as it is appended.
  std::function<void(const TraceEntry&)> on_entry;
  /// Called at every skill boundary with an immutable copy of the scene
  /// (used for pacing and pause in live mode).
  std::function<void(const Scene&)> on_boundary;
  /// Called with the source of each plan before it starts.
  std::function<void(const std::string&)> on_plan;
};

/// Runs `plan` in closed loop. Never throws for plan-level problems: every
/// terminal condition is encoded in the trace outcome.
ExecutionTrace execute(const dsl::Program& plan, const Scene& scene, const RunConfig& cfg,
                       const Replanner& replanner = {}, const ExecutionHooks& hooks = {});

/// Builds the report for the last failed SkillOutcome in `trace`, reading the
/// current state from `scene`. Throws ExecutorError::NoFailurePresent.
ErrorReport gather_error_report(const std::vector<TraceEntry>& trace, const Scene& scene);

}  // namespace quadplan
