// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace quadplan::agents {

class AgentError : public std::runtime_error {
 public:
  enum class Kind {
    LLMUnavailable,
    AuthError,
    MalformedOutput,
    UnknownSymbol,
    ParseRejected,
    NumeralsInPrompt,
  };
  AgentError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view agent_error_name(AgentError::Kind kind);

/// Task description handed to the agents. Global names are symbolic; their
/// values are bound only when the plan runs.
struct EnvDescription {
  std::string task;
  std::string prose;
  std::vector<std::string> globals;
  std::vector<std::string> constraints;
  std::vector<std::string> objects;
  std::vector<std::string> events;

  /// Planner view: prose, object and event names, constraints in words.
  [[nodiscard]] std::string render_for_planner() const;
  /// Calculator/coder view: the planner view plus the global variable names.
  [[nodiscard]] std::string render_with_globals() const;
};

/// True when `text` contains a numeral: a digit not preceded by a letter or '_'
/// (so "step1_height" is fine, "0.3" and "2 steps" are not).
bool contains_numeral(std::string_view text);

struct SketchStep {
  enum class Kind { Check, Action };
  int index = 0;
  Kind kind = Kind::Action;
  std::string text;
  /// For checks.
  std::optional<int> on_true;
  std::optional<int> on_false;  // nullopt with unsolvable=true means UNSOLVABLE
  bool false_unsolvable = false;
  bool true_unsolvable = false;
  /// For actions: next step, nullopt = END.
  std::optional<int> next;
  std::vector<std::string> skills;
};

struct PlanSketch {
  std::vector<SketchStep> steps;

  [[nodiscard]] std::size_t check_count() const;
  [[nodiscard]] const SketchStep* step(int index) const;
};

/// Parses the planner's text format; throws AgentError::MalformedOutput when
/// the format is broken, an edge dangles, or the graph has a cycle.
PlanSketch parse_sketch(const std::string& text);
std::string render_sketch(const PlanSketch& sketch);

struct ParamEntry {
  int step = 0;
  std::string skill;
  std::string reasoning;
  /// (parameter name, formula) in signature order.
  std::vector<std::pair<std::string, std::string>> formulas;
};

struct ParamSheet {
  std::vector<ParamEntry> entries;
};

ParamSheet parse_params(const std::string& text);
std::string render_params(const ParamSheet& sheet);

struct Provenance {
  std::vector<std::string> transcript_ids;
  double temperature = 0.2;
  std::string model;
  std::string variant;
  int code_run = 0;
  /// For replans: the hash of the primary plan and a short cause label.
  std::string parent;
  std::string cause;
};

nlohmann::json provenance_to_json(const Provenance& p);

struct CodePlan {
  std::string source;
  Provenance provenance;
};

/// Extracts the body of the first ```plan fenced block (or the whole text
/// when there is no fence).
std::string extract_code(const std::string& text);

struct ChatMessage {
  std::string role;
  std::string content;
};

struct LLMRequest {
  /// Agent role: planner, calculator, coder, replanner.
  std::string role;
  std::string task;
  std::string variant;
  std::string system;
  std::vector<ChatMessage> messages;
  double temperature = 0.2;
  int max_tokens = 2048;
  std::string model;
  /// Index of the sample when several runs are drawn at the same temperature.
  int sample = 0;
  /// Replanner only: "failure" or "interruption".
  std::string cause;
};

struct Usage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct LLMResponse {
  std::string text;
  Usage usage;
  double latency_s = 0.0;
  std::string transcript_id;
};

/// The text the mock store hashes: system prompt and messages.
std::string prompt_text(const LLMRequest& request);

}  // namespace quadplan::agents
