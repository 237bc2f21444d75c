// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "quadplan/agents/gateway.hpp"
#include "quadplan/agents/prompts.hpp"
#include "quadplan/agents/types.hpp"
#include "quadplan/dsl/ast.hpp"
#include "quadplan/reports.hpp"
#include "quadplan/world.hpp"

namespace quadplan::agents {

struct AgentOptions {
  double temperature = 0.2;
  int max_tokens = 2048;
  /// Re-prompts with the format error appended before giving up.
  int repair_retries = 2;
  std::string task;
  Variant variant = Variant::SPCR;
  int sample = 0;
};

PlanSketch semantic_plan(Gateway& gw, const EnvDescription& env, const SkillCatalog& catalog, const AgentOptions& opt,
                         Provenance* prov = nullptr);

/// Throws AgentError::UnknownSymbol when a formula names something that is
/// neither a declared global, an object, an event nor an expression function.
ParamSheet compute_params(Gateway& gw, const EnvDescription& env, const SkillCatalog& catalog, const PlanSketch& sketch,
                          const AgentOptions& opt, Provenance* prov = nullptr);

/// `sketch`/`params` may be null for variants without those agents.
CodePlan generate_code(Gateway& gw, const EnvDescription& env, const SkillCatalog& catalog, const PlanSketch* sketch,
                       const ParamSheet* params, const AgentOptions& opt, Provenance* prov = nullptr);

/// Full cascade for opt.variant.
CodePlan run_cascade(Gateway& gw, const EnvDescription& env, const SkillCatalog& catalog, const AgentOptions& opt);

/// New plan from the replanner. The result parses and has no blocking or
/// constraint-violation fault in `scene`.
CodePlan replan(Gateway& gw, const EnvDescription& env, const SkillCatalog& catalog, const CodePlan& primary,
                const ReplanCause& cause, const Scene& scene, const AgentOptions& opt);

/// Number of conditions in the program (each if and elif arm counts once).
std::size_t count_conditions(const dsl::Program& program);

/// Identifiers a formula may use, gathered from the description.
std::vector<std::string> declared_symbols(const EnvDescription& env);

}  // namespace quadplan::agents
