// SPDX-License-Identifier: Apache-2.0
#include "quadplan/agents/prompts.hpp"

#include <sstream>

namespace quadplan::agents {

namespace {

constexpr std::string_view kPlannerRole =
    "You are the semantic planner for a quadruped robot that can also stand on its hind legs. "
    "Break the task into a numbered list of steps. Every step is either a CHECK, a yes/no question "
    "about feasibility that a program can answer from the scene, or an ACTION that uses one or more "
    "robot skills. When several strategies exist, do not pick one: put a CHECK in front of them and "
    "use its TRUE and FALSE edges to unify all strategies into a single plan. Send a branch to "
    "UNSOLVABLE only when no strategy can work. The environment is described without numbers; the "
    "values are assigned at test time, so reason about them by name.";

constexpr std::string_view kPlannerFormat =
    "Answer in exactly this format and nothing else:\n"
    "STEP 1 CHECK: Is the object too heavy to push?\n"
    "  TRUE -> UNSOLVABLE\n"
    "  FALSE -> 2\n"
    "STEP 2 ACTION: Push the object next to the ledge. [push_to_position]\n"
    "  NEXT -> 3\n"
    "STEP 3 ACTION: Climb onto the ledge. [climb_to_position]\n"
    "  NEXT -> END\n";

constexpr std::string_view kCalculatorRole =
    "You are the parameter calculator. For every ACTION step of the plan, and for every skill the "
    "step uses, explain your reasoning in one line and then give one formula for each argument of "
    "the skill, in signature order. A formula may use the global variables listed, object and event "
    "names, the expression functions, numbers and + - * /. Remember that positions are the "
    "bottom-center of an object and that the robot body has extent: a target for the robot base "
    "must keep the body clear of walls and objects.";

constexpr std::string_view kCalculatorFormat =
    "Answer in exactly this format and nothing else:\n"
    "STEP 2 push_to_position\n"
    "  reasoning: the object should end flush against the ledge, centered on the climbing line\n"
    "  obj = crate\n"
    "  x = ledge_x - ledge_size_x / 2 - crate_size_x / 2\n"
    "  y = ledge_y\n"
    "  yaw = 0\n";

constexpr std::string_view kCoderRole =
    "You are the code generator. Write one program in the plan language below that carries out the "
    "plan. Turn every CHECK into an if statement and every UNSOLVABLE branch into fail(\"reason\"). "
    "Call skills as statements with the given formulas as arguments. Global variables hold the "
    "scene values at run time; do not replace them with numbers.";

constexpr std::string_view kCoderNoPlanRole =
    "You are the code generator. Write one program in the plan language below that makes the robot "
    "complete the task. Use if statements for anything that depends on the scene and fail(\"reason\") "
    "when the task cannot be done. Global variables hold the scene values at run time; do not "
    "replace them with numbers.";

constexpr std::string_view kLanguage =
    "Plan language:\n"
    "- statements: let NAME = EXPR | if EXPR { ... } elif EXPR { ... } else { ... } | fail(\"text\") | "
    "skill_name(arg, ...)\n"
    "- expressions: numbers, true, false, names, + - * /, comparisons < <= > >= == != (no chaining), "
    "and, or, not, parentheses, function calls, and .x .y .z on vectors\n"
    "- object and event arguments are written as bare names, e.g. push_to_position(box, ...)\n"
    "- '#' starts a comment\n";

constexpr std::string_view kCoderFormat =
    "Answer with the program in a fenced block and nothing else:\n"
    "```plan\n"
    "if crate_mass > push_mass_limit {\n"
    "  fail(\"the crate is too heavy\")\n"
    "}\n"
    "push_to_position(crate, ledge_x - ledge_size_x / 2 - crate_size_x / 2, ledge_y, 0)\n"
    "```\n";

constexpr std::string_view kReplannerRole =
    "You are the replanner. The robot was executing the program below in closed loop. Write a new "
    "program in the same language that continues from the robot's current state and completes the "
    "task. Either refine the plan or recalibrate its parameters; do not repeat steps that already "
    "succeeded unless they must be redone.";

std::string skills_block(const SkillCatalog& catalog) { return "Robot skills:\n\n" + catalog.render_text(); }

LLMRequest base(std::string role, const EnvDescription& env, std::string system, std::string user) {
  LLMRequest r;
  r.role = std::move(role);
  r.task = env.task;
  r.system = std::move(system);
  r.messages.push_back({"user", std::move(user)});
  return r;
}

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::SPCR: return "S+P+C+R";
    case Variant::SPC: return "S+P+C";
    case Variant::SC: return "S+C";
    case Variant::C: return "C";
  }
  return "?";
}

Variant variant_from_name(std::string_view name) {
  for (Variant v : all_variants()) {
    if (variant_name(v) == name) return v;
  }
  throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v{Variant::SPCR, Variant::SPC, Variant::SC, Variant::C};
  return v;
}

Variant cascade_variant(Variant v) { return v == Variant::SPCR ? Variant::SPC : v; }

LLMRequest planner_request(const EnvDescription& env, const SkillCatalog& catalog) {
  const std::string view = env.render_for_planner();
  if (contains_numeral(view)) {
    throw AgentError(AgentError::Kind::NumeralsInPrompt, "the planner view of the environment contains a numeral");
  }
  std::ostringstream sys;
  sys << kPlannerRole << "\n\n" << skills_block(catalog) << "\n" << kPlannerFormat;
  return base("planner", env, sys.str(), view);
}

LLMRequest calculator_request(const EnvDescription& env, const SkillCatalog& catalog, const PlanSketch& sketch) {
  std::ostringstream sys;
  sys << kCalculatorRole << "\n\n" << skills_block(catalog) << "\n" << kCalculatorFormat;
  std::ostringstream user;
  user << env.render_with_globals() << "\nPlan:\n" << render_sketch(sketch);
  return base("calculator", env, sys.str(), user.str());
}

LLMRequest coder_request(Variant variant, const EnvDescription& env, const SkillCatalog& catalog,
                         const PlanSketch* sketch, const ParamSheet* params) {
  std::ostringstream sys;
  sys << (sketch ? kCoderRole : kCoderNoPlanRole) << "\n\n";
  // Without the calculator, its instructions move into the coder prompt.
  if (!uses_calculator(variant)) sys << kCalculatorRole << "\n\n";
  sys << kLanguage << "\n" << skills_block(catalog) << "\n" << kCoderFormat;
  std::ostringstream user;
  user << env.render_with_globals();
  if (sketch) user << "\nPlan:\n" << render_sketch(*sketch);
  if (params) user << "\nParameters:\n" << render_params(*params);
  LLMRequest r = base("coder", env, sys.str(), user.str());
  r.variant = std::string(variant_name(variant));
  return r;
}

LLMRequest replanner_request(const EnvDescription& env, const SkillCatalog& catalog, const std::string& primary_source,
                             const ReplanCause& cause) {
  std::ostringstream sys;
  sys << kReplannerRole << "\n\n" << kLanguage << "\n" << skills_block(catalog) << "\n" << kCoderFormat;
  std::ostringstream user;
  user << env.render_with_globals() << "\nProgram that was running:\n```plan\n" << primary_source << "```\n\n";
  std::string label;
  if (const auto* report = std::get_if<ErrorReport>(&cause)) {
    label = "failure";
    user << "A skill failed. Error report:\n" << report->to_text();
  } else {
    label = "interruption";
    user << "The operator interrupted the plan with new instructions:\n";
    for (const auto& n : std::get<std::vector<InterruptionNotice>>(cause)) user << "- " << n.instruction << "\n";
  }
  LLMRequest r = base("replanner", env, sys.str(), user.str());
  r.cause = label;
  return r;
}

std::string repair_message(const std::string& error) {
  return "Your answer could not be used: " + error + "\nAnswer again, in the required format.";
}

}  // namespace quadplan::agents
