// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "quadplan/dsl/ast.hpp"
#include "quadplan/skill_catalog.hpp"
#include "quadplan/skills.hpp"
#include "quadplan/world.hpp"

namespace quadplan::dsl {

using Value = std::variant<double, bool, Vec3>;

std::string value_type_name(const Value& v);

class RuntimeError : public std::runtime_error {
 public:
  enum class Kind { RuntimeTypeError, UnknownIdentifier };
  RuntimeError(Kind kind, std::size_t location, const std::string& message)
      : std::runtime_error(message), kind_(kind), location_(location) {}
  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] std::size_t location() const { return location_; }

 private:
  Kind kind_;
  std::size_t location_;
};

/// Where plan values come from: variables, scene globals and perception.
class Environment {
 public:
  explicit Environment(const Scene* scene) : scene_(scene) {}

  void set_scene(const Scene* scene);
  /// Scene globals are re-derived on next lookup (call after every skill).
  void invalidate() { globals_.reset(); }
  void bind(const std::string& name, Value value) { vars_[name] = std::move(value); }
  [[nodiscard]] std::optional<Value> lookup(const std::string& name) const;
  [[nodiscard]] const Scene* scene() const { return scene_; }
  [[nodiscard]] const std::map<std::string, Value>& variables() const { return vars_; }

 private:
  const Scene* scene_;
  std::map<std::string, Value> vars_;
  mutable std::optional<std::map<std::string, double>> globals_;
};

Value evaluate(const Expr& expr, const Environment& env, std::size_t location = 0);

/// Resolves call arguments against the catalog signature.
SkillInvocation bind_arguments(const SkillCall& call, const Environment& env, const SkillCatalog& catalog,
                               std::size_t location);

enum class PlanStatus {
  Completed,   // ran off the end of the program
  Stopped,     // the dispatcher asked to stop (skill failure, interruption)
  Unsolvable,  // fail(...) was executed
};

struct PlanResult {
  PlanStatus status = PlanStatus::Completed;
  /// Statement index where execution stopped.
  std::optional<std::size_t> location;
  std::string message;
  std::size_t skill_calls = 0;
};

/// Called once per executed skill statement with the bound invocation.
/// Returns false to stop the plan. The dispatcher may mutate the scene the
/// environment points at.
using Dispatcher = std::function<bool(const SkillInvocation&, std::size_t location)>;

/// Runs a plan against `scene`. Conditions are evaluated against the scene as
/// it is when they are reached. Throws RuntimeError.
PlanResult run_plan(const Program& program, const Scene& scene, const Dispatcher& dispatch,
                    const SkillCatalog& catalog = SkillCatalog::standard());

}  // namespace quadplan::dsl
