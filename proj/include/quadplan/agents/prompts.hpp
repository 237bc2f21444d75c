// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "quadplan/agents/types.hpp"
#include "quadplan/reports.hpp"
#include "quadplan/skill_catalog.hpp"

namespace quadplan::agents {

/// Which agents take part. R adds the replanner on top of S+P+C.
enum class Variant { SPCR, SPC, SC, C };

std::string_view variant_name(Variant v);
Variant variant_from_name(std::string_view name);
const std::vector<Variant>& all_variants();

inline bool uses_planner(Variant v) { return v != Variant::C; }
inline bool uses_calculator(Variant v) { return v == Variant::SPCR || v == Variant::SPC; }
inline bool uses_replanner(Variant v) { return v == Variant::SPCR; }

/// Variant whose cascade prompts a variant shares (R only adds the replanner).
Variant cascade_variant(Variant v);

/// Prompt assembly. Each builder returns a request without model settings.
/// Throws AgentError::NumeralsInPrompt when the planner view of `env` holds a numeral.
LLMRequest planner_request(const EnvDescription& env, const SkillCatalog& catalog);
LLMRequest calculator_request(const EnvDescription& env, const SkillCatalog& catalog, const PlanSketch& sketch);
/// `sketch` and `params` may be null depending on the variant.
LLMRequest coder_request(Variant variant, const EnvDescription& env, const SkillCatalog& catalog,
                         const PlanSketch* sketch, const ParamSheet* params);
LLMRequest replanner_request(const EnvDescription& env, const SkillCatalog& catalog, const std::string& primary_source,
                             const ReplanCause& cause);

/// Follow-up message used by the repair loop.
std::string repair_message(const std::string& error);

}  // namespace quadplan::agents
