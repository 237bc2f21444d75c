// SPDX-License-Identifier: Apache-2.0
#include "quadplan/executor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "quadplan/dsl/interpreter.hpp"
#include "quadplan/dsl/printer.hpp"
#include "quadplan/dsl/validator.hpp"
#include "quadplan/hash.hpp"
#include "quadplan/scene_io.hpp"

namespace quadplan {

// ------------------------------------------------------------------ reports

std::string ErrorReport::to_text() const {
  std::ostringstream out;
  out.precision(4);
  out << "Failed skill: " << format_invocation(failed_skill) << "\n";
  out << "Reason: " << fail_reason_name(reason);
  if (rise) out << " (rise " << *rise << " m)";
  out << "\n";
  if (!detail.empty()) out << "Detail: " << detail << "\n";
  const Vec3& p = robot.base.position;
  out << "Robot after recovery: base (" << p.x << ", " << p.y << ", " << p.z << "), yaw " << robot.base.yaw
      << ", stance " << stance_name(robot.stance) << ", support height " << robot.support_height << ", floor "
      << robot.floor << "\n";
  if (!object_id.empty()) {
    const Vec3& o = object_pose.position;
    out << "Associated object: " << object_id << " at (" << o.x << ", " << o.y << ", " << o.z << "), size ("
        << object_size.x << ", " << object_size.y << ", " << object_size.z << ")\n";
  }
  if (min_distance) out << "Closest approach to the target: " << *min_distance << " m\n";
  out << "Events so far: ";
  if (fired_events.empty()) out << "none";
  for (std::size_t i = 0; i < fired_events.size(); ++i) out << (i ? ", " : "") << fired_events[i];
  out << "\nClock: " << clock << " s\n";
  return out.str();
}

nlohmann::json error_report_to_json(const ErrorReport& r) {
  nlohmann::json j{{"failed_skill", invocation_to_json(r.failed_skill)},
                   {"reason", fail_reason_name(r.reason)},
                   {"detail", r.detail},
                   {"robot", robot_to_json(r.robot)},
                   {"fired_events", r.fired_events},
                   {"clock", r.clock},
                   {"location", r.location}};
  if (r.rise) j["rise"] = *r.rise;
  if (r.min_distance) j["min_distance"] = *r.min_distance;
  if (!r.object_id.empty()) {
    j["object"] = {{"id", r.object_id},
                   {"position", vec3_to_json(r.object_pose.position)},
                   {"yaw", r.object_pose.yaw},
                   {"size", vec3_to_json(r.object_size)}};
  }
  return j;
}

nlohmann::json notice_to_json(const InterruptionNotice& n) {
  return {{"clock", n.clock},
          {"instruction", n.instruction},
          {"source", n.source == NoticeSource::Operator ? "Operator" : "Script"}};
}

// ------------------------------------------------------------------- config

void RunConfig::check() const {
  if (!(time_limit > 0.0)) throw ExecutorError(ExecutorError::Kind::BadConfig, "time_limit must be positive");
  if (replan_budget < 0) throw ExecutorError(ExecutorError::Kind::BadConfig, "replan_budget must be >= 0");
}

std::string_view entry_kind_name(EntryKind kind) {
  switch (kind) {
    case EntryKind::SkillCall: return "SkillCall";
    case EntryKind::SkillOutcome: return "SkillOutcome";
    case EntryKind::Event: return "Event";
    case EntryKind::Replan: return "Replan";
    case EntryKind::Interruption: return "Interruption";
    case EntryKind::Abort: return "Abort";
  }
  return "?";
}

std::string_view outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::Completed: return "Completed";
    case Outcome::TimedOut: return "TimedOut";
    case Outcome::UnsolvableDeclared: return "UnsolvableDeclared";
    case Outcome::BudgetExhausted: return "BudgetExhausted";
    case Outcome::Aborted: return "Aborted";
    case Outcome::Rejected: return "Rejected";
  }
  return "?";
}

// -------------------------------------------------------------------- trace

Snapshot take_snapshot(const Scene& scene) {
  Snapshot s;
  s.robot = scene.robot;
  for (const auto& [id, obj] : scene.objects) {
    if (obj.movable) s.movable[id] = obj.pose;
  }
  s.events.assign(scene.events.begin(), scene.events.end());
  if (scene.elevator) {
    s.selected_floor = scene.elevator->selected_floor;
    s.cabin_floor = scene.elevator->cabin_floor;
  }
  return s;
}

nlohmann::json snapshot_to_json(const Snapshot& s) {
  nlohmann::json movable = nlohmann::json::object();
  for (const auto& [id, pose] : s.movable) movable[id] = {{"position", vec3_to_json(pose.position)}, {"yaw", pose.yaw}};
  nlohmann::json j{{"robot", robot_to_json(s.robot)}, {"movable", movable}, {"events", s.events}};
  if (s.selected_floor) j["selected_floor"] = *s.selected_floor;
  if (s.cabin_floor) j["cabin_floor"] = *s.cabin_floor;
  return j;
}

nlohmann::json entry_to_json(const TraceEntry& e) {
  nlohmann::json j{{"clock", e.clock}, {"kind", entry_kind_name(e.kind)}, {"payload", e.payload}};
  if (e.snapshot) j["snapshot"] = snapshot_to_json(*e.snapshot);
  return j;
}

std::string ExecutionTrace::to_jsonl() const {
  std::string out = nlohmann::json{{"schema", "quadplan.trace"}, {"version", kSchemaVersion}}.dump() + "\n";
  for (const auto& e : entries) out += entry_to_json(e).dump() + "\n";
  out += nlohmann::json{{"outcome", outcome_name(outcome)},
                        {"detail", outcome_detail},
                        {"replans", replans},
                        {"clock", final_scene.clock}}
             .dump() +
         "\n";
  return out;
}

std::string ExecutionTrace::hash() const { return sha256_hex(to_jsonl()); }

std::size_t ExecutionTrace::count(EntryKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [&](const TraceEntry& e) { return e.kind == kind; }));
}

// -------------------------------------------------------------------- queue

double InterruptionQueue::enqueue(InterruptionNotice notice) {
  if (notice.instruction.empty()) {
    throw ExecutorError(ExecutorError::Kind::BadConfig, "interruption instruction must not be empty");
  }
  std::unique_lock lock(mu_);
  // A skill in progress ends at a boundary whose clock is not known yet.
  ++waiting_;
  cv_.wait(lock, [this] { return !in_skill_ || closed_; });
  --waiting_;
  cv_.notify_all();
  if (closed_) throw ExecutorError(ExecutorError::Kind::QueueClosed, "trajectory already finished");
  const double ack = std::max(notice.clock, boundary_clock_);
  notices_.push_back(std::move(notice));
  return ack;
}

bool InterruptionQueue::pending() const {
  std::lock_guard lock(mu_);
  return !notices_.empty();
}

std::vector<InterruptionNotice> InterruptionQueue::drain() {
  std::lock_guard lock(mu_);
  std::vector<InterruptionNotice> out(notices_.begin(), notices_.end());
  notices_.clear();
  return out;
}

void InterruptionQueue::settle() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return waiting_ == 0; });
}

int InterruptionQueue::waiting() const {
  std::lock_guard lock(mu_);
  return waiting_;
}

void InterruptionQueue::begin_skill() {
  std::lock_guard lock(mu_);
  in_skill_ = true;
}

void InterruptionQueue::set_boundary_clock(double clock) {
  {
    std::lock_guard lock(mu_);
    boundary_clock_ = clock;
    in_skill_ = false;
  }
  cv_.notify_all();
}

void InterruptionQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
    in_skill_ = false;
  }
  cv_.notify_all();
}

bool InterruptionQueue::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

// ------------------------------------------------------------ error reports

namespace {

std::optional<Vec3> call_target(const SkillInvocation& call) {
  auto num = [&](std::size_t i) { return std::get<double>(call.args.at(i)); };
  if (call.name == "walk_to_position" || call.name == "climb_to_position" || call.name == "hand_touch_position") {
    return Vec3{num(0), num(1), num(2)};
  }
  return std::nullopt;
}

std::string associated_object(const SkillInvocation& call, const Scene& scene) {
  for (const auto& a : call.args) {
    if (const auto* id = std::get_if<std::string>(&a); id && scene.has_object(*id)) return *id;
  }
  const Vec3 target = call_target(call).value_or(scene.robot.base.position);
  std::string best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [id, obj] : scene.objects) {
    const double d = distance(obj.bounds().clamp(target), target);
    if (d < best_d) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

}  // namespace

ErrorReport gather_error_report(const std::vector<TraceEntry>& trace, const Scene& scene) {
  for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
    if (it->kind != EntryKind::SkillOutcome || !it->call || !it->outcome) continue;
    if (it->call->name == "recover") continue;
    if (it->outcome->ok()) break;
    ErrorReport r;
    r.failed_skill = *it->call;
    r.reason = it->outcome->reason;
    r.detail = it->outcome->detail;
    r.rise = it->outcome->rise;
    r.min_distance = it->outcome->min_distance;
    r.robot = scene.robot;
    r.object_id = associated_object(r.failed_skill, scene);
    if (!r.object_id.empty()) {
      r.object_pose = scene.object(r.object_id).pose;
      r.object_size = scene.object(r.object_id).size;
    }
    r.fired_events.assign(scene.events.begin(), scene.events.end());
    r.clock = scene.clock;
    r.location = it->payload.is_object() ? it->payload.value("location", std::size_t{0}) : 0;
    return r;
  }
  throw ExecutorError(ExecutorError::Kind::NoFailurePresent, "no failed skill in the trace");
}

// ---------------------------------------------------------------- execution

namespace {

class Run {
 public:
  Run(const Scene& scene, const RunConfig& cfg, const Replanner& replanner, const ExecutionHooks& hooks)
      : cfg_(cfg), replanner_(replanner), hooks_(hooks) {
    trace_.initial_scene = scene;
    scene_ = scene;
  }

  ExecutionTrace go(const dsl::Program& first) {
    dsl::Program plan = first;
    int budget = cfg_.replan_budget;
    for (;;) {
      const std::string source = dsl::print_program(plan);
      trace_.plans.push_back(source);
      if (hooks_.on_plan) hooks_.on_plan(source);
      if (cfg_.reject_constraint_violations) {
        for (const auto& f : dsl::validate_plan(plan, {scene_})) {
          if (f.category != dsl::FaultCategory::ConstraintViolation) continue;
          return finish(Outcome::Rejected,
                        f.rule + " at statement " + std::to_string(f.location) + ": " + f.message);
        }
      }
      stop_ = Stop::None;
      dsl::PlanResult result;
      try {
        result = dsl::run_plan(plan, scene_, [this](const SkillInvocation& c, std::size_t loc) {
          return dispatch(c, loc);
        });
      } catch (const dsl::RuntimeError& e) {
        return finish(Outcome::Aborted, e.what());
      }
      if (result.status == dsl::PlanStatus::Completed) {
        // A notice that arrived during the last skill is still honored.
        if (!interrupted()) return finish(Outcome::Completed, "");
        stop_ = Stop::Interrupted;
      }
      if (result.status == dsl::PlanStatus::Unsolvable) return finish(Outcome::UnsolvableDeclared, result.message);

      if (stop_ == Stop::TimeLimit) return finish(Outcome::TimedOut, "time limit reached");
      if (stop_ == Stop::Aborted) return finish(Outcome::Aborted, abort_detail_);

      std::optional<ReplanCause> cause;
      if (stop_ == Stop::Failure) {
        recover_after_failure();
        ErrorReport report = gather_error_report(trace_.entries, scene_);
        report.location = failed_location_;
        if (scene_.clock > cfg_.time_limit) return finish(Outcome::TimedOut, "time limit reached during recovery");
        // An operator instruction waiting at this boundary supersedes the report.
        if (interrupted()) {
          cause = take_interruptions();
        } else {
          cause = std::move(report);
        }
      } else {
        cause = take_interruptions();
      }
      if (budget <= 0 || !replanner_) return finish(Outcome::BudgetExhausted, "no replans left");
      std::optional<dsl::Program> next;
      try {
        next = replanner_(*cause, scene_);
      } catch (const std::exception& e) {
        return finish(Outcome::Aborted, std::string("replanner failed: ") + e.what());
      }
      if (!next) return finish(Outcome::Aborted, "replanner produced no plan");
      --budget;
      ++trace_.replans;
      nlohmann::json payload{{"replan", trace_.replans}, {"budget_left", budget}};
      if (const auto* r = std::get_if<ErrorReport>(&*cause)) {
        payload["cause"] = "failure";
        payload["report"] = error_report_to_json(*r);
      } else {
        payload["cause"] = "interruption";
      }
      payload["plan"] = dsl::print_program(*next);
      append({scene_.clock, EntryKind::Replan, payload, std::nullopt, std::nullopt, std::nullopt});
      plan = std::move(*next);
    }
  }

 private:
  enum class Stop { None, Failure, Interrupted, TimeLimit, Aborted };

  void append(TraceEntry e) {
    if (!trace_.entries.empty()) e.clock = std::max(e.clock, trace_.entries.back().clock);
    trace_.entries.push_back(std::move(e));
    if (hooks_.on_entry) hooks_.on_entry(trace_.entries.back());
  }

  [[nodiscard]] bool at_boundary() const {
    return trace_.entries.empty() || trace_.entries.back().kind == EntryKind::SkillOutcome;
  }

  bool interrupted() const {
    if (hooks_.interrupts == nullptr) return false;
    hooks_.interrupts->settle();
    return hooks_.interrupts->pending() && at_boundary();
  }

  SkillOutcome run_skill(const SkillInvocation& call, std::size_t loc, const nlohmann::json& extra = {}) {
    nlohmann::json payload = invocation_to_json(call);
    payload["location"] = loc;
    if (!extra.is_null()) payload.update(extra);
    if (hooks_.interrupts) hooks_.interrupts->begin_skill();
    append({scene_.clock, EntryKind::SkillCall, payload, std::nullopt, call, std::nullopt});
    SkillOutcome out;
    try {
      out = invoke_skill(scene_, call, cfg_.noise);
    } catch (...) {
      if (hooks_.interrupts) hooks_.interrupts->set_boundary_clock(scene_.clock);
      throw;
    }
    for (const auto& ev : out.events) {
      append({scene_.clock, EntryKind::Event, {{"event", ev}}, std::nullopt, std::nullopt, std::nullopt});
    }
    nlohmann::json result = outcome_to_json(out);
    result["skill"] = call.name;
    result["location"] = loc;
    append({scene_.clock, EntryKind::SkillOutcome, result, take_snapshot(scene_), call, out});
    if (hooks_.interrupts) hooks_.interrupts->set_boundary_clock(scene_.clock);
    if (hooks_.on_boundary) hooks_.on_boundary(scene_);
    return out;
  }

  bool dispatch(SkillInvocation call, std::size_t loc) {
    if (interrupted()) {
      stop_ = Stop::Interrupted;
      return false;
    }
    if (scene_.clock > cfg_.time_limit) {
      stop_ = Stop::TimeLimit;
      return false;
    }
    nlohmann::json extra;
    if (call.name == "hand_touch_position" && cfg_.touch_overshoot && !injected_) {
      injected_ = true;
      call.args[2] = scene_.robot.support_height + scene_.limits.bipedal_reach_height + *cfg_.touch_overshoot;
      extra["injected"] = true;
    }
    SkillOutcome out;
    try {
      out = run_skill(call, loc, extra);
    } catch (const SkillError& e) {
      abort_detail_ = e.what();
      stop_ = Stop::Aborted;
      return false;
    }
    if (!out.ok()) {
      stop_ = Stop::Failure;
      failed_location_ = loc;
      return false;
    }
    if (scene_.clock > cfg_.time_limit) {
      stop_ = Stop::TimeLimit;
      return false;
    }
    return true;
  }

  void recover_after_failure() { run_skill({"recover", {}}, failed_location_, {{"after_failure", true}}); }

  std::vector<InterruptionNotice> take_interruptions() {
    std::vector<InterruptionNotice> notices = hooks_.interrupts->drain();
    for (const auto& n : notices) {
      nlohmann::json payload = notice_to_json(n);
      payload["observed_at"] = scene_.clock;
      append({scene_.clock, EntryKind::Interruption, payload, std::nullopt, std::nullopt, std::nullopt});
    }
    return notices;
  }

  ExecutionTrace finish(Outcome outcome, std::string detail) {
    if (hooks_.interrupts) hooks_.interrupts->close();
    if (outcome != Outcome::Completed) {
      append({scene_.clock, EntryKind::Abort, {{"outcome", outcome_name(outcome)}, {"detail", detail}}, std::nullopt,
              std::nullopt, std::nullopt});
    }
    trace_.outcome = outcome;
    trace_.outcome_detail = std::move(detail);
    trace_.final_scene = scene_;
    return std::move(trace_);
  }

  const RunConfig& cfg_;
  const Replanner& replanner_;
  const ExecutionHooks& hooks_;
  Scene scene_;
  ExecutionTrace trace_;
  Stop stop_ = Stop::None;
  std::size_t failed_location_ = 0;
  std::string abort_detail_;
  bool injected_ = false;
};

}  // namespace

ExecutionTrace execute(const dsl::Program& plan, const Scene& scene, const RunConfig& cfg, const Replanner& replanner,
                       const ExecutionHooks& hooks) {
  cfg.check();
  Scene start = scene;
  start.rng = Rng(cfg.seed);
  return Run(start, cfg, replanner, hooks).go(plan);
}

}  // namespace quadplan
