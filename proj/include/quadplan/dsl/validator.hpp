// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadplan/dsl/ast.hpp"
#include "quadplan/skill_catalog.hpp"
#include "quadplan/world.hpp"

namespace quadplan::dsl {

enum class FaultCategory { Spatial, ConstraintViolation, Logical };

std::string_view fault_category_name(FaultCategory category);
std::optional<FaultCategory> fault_category_from_name(std::string_view name);

struct PlanFault {
  FaultCategory category = FaultCategory::Logical;
  /// Pre-order statement index.
  std::size_t location = 0;
  std::string message;
  /// Short rule id, e.g. "bad-stance" or "step-too-high".
  std::string rule;
  /// Found by a type/name heuristic rather than a definite analysis.
  bool heuristic = false;

  /// Dead branches are reported but do not stop the plan from running.
  [[nodiscard]] bool blocks_execution() const { return rule != "unreachable-branch"; }
};

nlohmann::json fault_to_json(const PlanFault& fault);

/// Static checks that need no scene, plus name checks against `scenes` when
/// given. Sorted by location.
std::vector<PlanFault> check_structure(const Program& program, const std::vector<const Scene*>& scenes,
                                       const SkillCatalog& catalog = SkillCatalog::standard());

/// Zero-noise dry run on a copy of `scene`, stopping at the first fault.
std::vector<PlanFault> check_in_scene(const Program& program, const Scene& scene,
                                      const SkillCatalog& catalog = SkillCatalog::standard());

/// Full validation: structure first; when nothing blocks, a dry run per scene.
/// Faults are de-duplicated by (category, location).
std::vector<PlanFault> validate_plan(const Program& program, const std::vector<Scene>& scenes = {},
                                     const SkillCatalog& catalog = SkillCatalog::standard());

bool any_blocking(const std::vector<PlanFault>& faults);

}  // namespace quadplan::dsl
