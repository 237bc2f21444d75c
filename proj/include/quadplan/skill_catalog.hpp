// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadplan/world.hpp"

namespace quadplan {

enum class ParamType { Number, Object, Event };

std::string_view param_type_name(ParamType type);

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::Number;
  bool optional = false;
  std::string doc;
};

struct SkillSignature {
  std::string name;
  std::vector<ParamSpec> params;
  std::string doc;
  std::vector<std::string> constraints;
  /// Stance the robot must be in; nullopt means any.
  std::optional<Stance> requires_stance;
  /// Stance after success, when it changes.
  std::optional<Stance> results_in;

  [[nodiscard]] std::size_t min_arity() const;
  [[nodiscard]] std::size_t max_arity() const { return params.size(); }
  /// "name(a, b, c[, d])"
  [[nodiscard]] std::string signature_text() const;
};

/// The skills exposed to plans and to agent prompts.
class SkillCatalog {
 public:
  static const SkillCatalog& standard();

  [[nodiscard]] const SkillSignature* find(std::string_view name) const;
  [[nodiscard]] const std::map<std::string, SkillSignature>& entries() const { return entries_; }

  /// Structured text document: one block per skill with signature, doc and
  /// constraints. Used verbatim in prompts and written to docs/skills.md.
  [[nodiscard]] std::string render_text() const;
  [[nodiscard]] nlohmann::json to_json() const;

  void add(SkillSignature signature);

 private:
  std::map<std::string, SkillSignature> entries_;
};

/// Perception and math builtins available inside plan expressions.
struct BuiltinSpec {
  std::string name;
  std::size_t arity;
  std::string doc;
};
const std::vector<BuiltinSpec>& expression_builtins();

}  // namespace quadplan
