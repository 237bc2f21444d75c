// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadplan/agents/cascade.hpp"
#include "quadplan/benchmarks.hpp"

namespace quadplan::harness {

class HarnessError : public std::runtime_error {
 public:
  enum class Kind { InvalidSpec, FixtureMissing, PortInUse, SessionNotFound, Io };
  HarnessError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class BackendKind { Mock, Live };

struct ExperimentSpec {
  std::vector<TaskKind> tasks = all_tasks();
  std::vector<agents::Variant> variants = agents::all_variants();
  int code_runs = 3;
  int trajectories_per_code = 100;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  BackendKind backend = BackendKind::Mock;
  std::string noise = "chained-finetuned";
  double temperature = 0.2;
  double time_limit = 300.0;
  /// Budget for variants with the replanner; the others always get 0.
  int replan_budget = 3;
  std::filesystem::path fixtures = "data/fixtures";
  /// Applied to every scene: the task is set per row, the seed per trajectory.
  TaskConfig scene;
  /// Forces the first hand_touch of every trajectory out of reach by this much.
  std::optional<double> touch_overshoot;
  int threads = 0;  // 0 = hardware concurrency
  bool save_traces = false;

  /// Throws HarnessError::InvalidSpec.
  void check() const;
};

nlohmann::json spec_to_json(const ExperimentSpec& spec);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentSpec spec_from_json(const nlohmann::json& doc);
ExperimentSpec load_spec(const std::filesystem::path& path);

struct SampleRow {
  std::string task;
  std::string variant;
  std::uint64_t seed = 0;
  int code_run = 0;
  int trajectory = 0;
  std::uint64_t scene_seed = 0;
  bool success = false;
  double norm_dist = 1.0;
  double clock = 0.0;
  int replans = 0;
  std::string outcome;
  std::string trace_hash;
  std::string plan_hash;
};

struct ResultRow {
  std::string task;
  std::string variant;
  double success_mean = 0.0;
  double success_std = 0.0;
  double norm_dist_mean = 0.0;
  double norm_dist_std = 0.0;
  std::size_t seeds = 0;
  std::size_t trajectories = 0;
};

struct ExperimentResult {
  std::vector<SampleRow> samples;
  std::vector<ResultRow> table;
  /// Source of every generated plan, keyed "task/variant/seed/run".
  std::vector<std::pair<std::string, agents::CodePlan>> plans;
};

/// Scene and executor seeds of one trajectory. Variants are not part of the
/// mix, so every variant sees the same scenes.
std::uint64_t trajectory_seed(std::uint64_t seed, TaskKind task, int code_run, int trajectory);

/// Runs the protocol. When `out_dir` is non-empty, writes spec.json,
/// samples.csv, results.csv, results.json, results.md, plans/, and
/// transcripts.jsonl there. results.json and results.md embed the spec and
/// the provenance of every plan.
ExperimentResult run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir = {});

/// Mean and sample standard deviation across seed-level means.
std::vector<ResultRow> aggregate(const std::vector<SampleRow>& samples);

std::string samples_csv(const std::vector<SampleRow>& samples);
std::vector<SampleRow> parse_samples_csv(const std::string& text);
std::string results_csv(const std::vector<ResultRow>& rows);
/// Markdown table with mean ± std.
std::string render_table(const std::vector<ResultRow>& rows);

/// Reads samples.csv from a run directory and aggregates it.
std::vector<ResultRow> report(const std::filesystem::path& run_dir);

/// Backend for a spec: fixtures for Mock, HttpConfig::from_env() for Live.
std::shared_ptr<agents::LLMBackend> make_backend(const ExperimentSpec& spec);

/// Executes one plan on one scene with the replanner wired as the variant says.
ExecutionTrace run_trajectory(const dsl::Program& plan, const Scene& scene, const RunConfig& cfg,
                              agents::Gateway* gateway, const agents::EnvDescription& env,
                              const agents::CodePlan& primary, const agents::AgentOptions& opt,
                              const ExecutionHooks& hooks = {});

}  // namespace quadplan::harness
