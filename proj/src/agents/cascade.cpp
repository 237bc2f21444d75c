// SPDX-License-Identifier: Apache-2.0
#include "quadplan/agents/cascade.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "quadplan/dsl/parser.hpp"
#include "quadplan/dsl/printer.hpp"
#include "quadplan/dsl/validator.hpp"
#include "quadplan/hash.hpp"

namespace quadplan::agents {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void fail(AgentError::Kind kind, const std::string& why) { throw AgentError(kind, why); }

void prepare(LLMRequest& req, const AgentOptions& opt) {
  req.temperature = opt.temperature;
  req.max_tokens = opt.max_tokens;
  req.sample = opt.sample;
  if (req.task.empty()) req.task = opt.task;
  if (req.variant.empty()) req.variant = std::string(variant_name(cascade_variant(opt.variant)));
}

/// Calls the model and hands the text to `accept`. A MalformedOutput or
/// ParseRejected from `accept` triggers a repair round with the error appended;
/// after opt.repair_retries rounds the last error is rethrown.
template <typename T>
T with_repairs(Gateway& gw, LLMRequest req, const AgentOptions& opt, Provenance* prov,
               const std::function<T(const std::string&)>& accept) {
  for (int round = 0;; ++round) {
    const LLMResponse resp = gw.complete(req);
    if (prov) prov->transcript_ids.push_back(resp.transcript_id);
    try {
      return accept(resp.text);
    } catch (const AgentError& e) {
      const bool repairable =
          e.kind() == AgentError::Kind::MalformedOutput || e.kind() == AgentError::Kind::ParseRejected;
      if (!repairable) throw;
      if (round >= opt.repair_retries) {
        fail(e.kind(), req.role + " output unusable after " + std::to_string(round) + " repairs: " + e.what());
      }
      req.messages.push_back({"assistant", resp.text});
      req.messages.push_back({"user", repair_message(e.what())});
    }
  }
}

void collect_names(const dsl::ExprPtr& e, std::vector<std::string>& vars, std::vector<std::string>& calls) {
  std::visit(Overloaded{
                 [&](const dsl::Var& v) { vars.push_back(v.name); },
                 [&](const dsl::Unary& u) { collect_names(u.operand, vars, calls); },
                 [&](const dsl::Binary& b) {
                   collect_names(b.lhs, vars, calls);
                   collect_names(b.rhs, vars, calls);
                 },
                 [&](const dsl::Call& c) {
                   calls.push_back(c.name);
                   for (const auto& a : c.args) collect_names(a, vars, calls);
                 },
                 [&](const dsl::Field& f) { collect_names(f.base, vars, calls); },
                 [](const auto&) {},
             },
             e->node);
}

std::size_t count_in(const dsl::StmtList& list) {
  std::size_t n = 0;
  for (const auto& s : list) {
    if (const auto* i = std::get_if<dsl::If>(&s.node)) {
      n += i->arms.size();
      for (const auto& arm : i->arms) n += count_in(arm.body);
      if (i->else_body) n += count_in(*i->else_body);
    }
  }
  return n;
}

dsl::Program parse_code(const std::string& text) {
  try {
    return dsl::parse_program(extract_code(text));
  } catch (const dsl::SyntaxError& e) {
    fail(AgentError::Kind::ParseRejected, std::string("the program does not parse: ") + e.what());
  }
}

void reject_unknown_skills(const dsl::Program& program, const SkillCatalog& catalog) {
  for (const auto& f : dsl::check_structure(program, {}, catalog)) {
    if (f.rule == "unknown-skill") fail(AgentError::Kind::ParseRejected, f.message);
  }
}

}  // namespace

std::size_t count_conditions(const dsl::Program& program) { return count_in(program.statements); }

std::vector<std::string> declared_symbols(const EnvDescription& env) {
  std::vector<std::string> out = env.globals;
  for (const auto& o : env.objects) out.push_back(o.substr(0, o.find(' ')));
  for (const auto& e : env.events) out.push_back(e);
  out.emplace_back("robot");
  return out;
}

PlanSketch semantic_plan(Gateway& gw, const EnvDescription& env, const SkillCatalog& catalog, const AgentOptions& opt,
                         Provenance* prov) {
  LLMRequest req = planner_request(env, catalog);
  prepare(req, opt);
  return with_repairs<PlanSketch>(gw, req, opt, prov, [&](const std::string& text) {
    PlanSketch sketch = parse_sketch(text);
    for (const auto& s : sketch.steps) {
      for (const auto& skill : s.skills) {
        if (!catalog.find(skill)) fail(AgentError::Kind::MalformedOutput, "step " + std::to_string(s.index) +
                                                                              " names unknown skill " + skill);
      }
    }
    return sketch;
  });
}

ParamSheet compute_params(Gateway& gw, const EnvDescription& env, const SkillCatalog& catalog, const PlanSketch& sketch,
                          const AgentOptions& opt, Provenance* prov) {
  if (sketch.steps.empty()) fail(AgentError::Kind::MalformedOutput, "empty plan sketch");
  const std::vector<std::string> symbols = declared_symbols(env);
  const std::set<std::string> known(symbols.begin(), symbols.end());
  std::set<std::string> functions;
  for (const auto& b : expression_builtins()) functions.insert(b.name);

  LLMRequest req = calculator_request(env, catalog, sketch);
  prepare(req, opt);
  return with_repairs<ParamSheet>(gw, req, opt, prov, [&](const std::string& text) {
    ParamSheet sheet = parse_params(text);
    for (const auto& e : sheet.entries) {
      const std::string where = "step " + std::to_string(e.step) + " " + e.skill;
      const SketchStep* step = sketch.step(e.step);
      if (!step || step->kind != SketchStep::Kind::Action) {
        fail(AgentError::Kind::MalformedOutput, where + ": not an action step of the plan");
      }
      const SkillSignature* sig = catalog.find(e.skill);
      if (!sig) fail(AgentError::Kind::MalformedOutput, where + ": unknown skill");
      std::set<std::string> seen;
      for (const auto& [name, formula] : e.formulas) {
        const auto p = std::find_if(sig->params.begin(), sig->params.end(), [&](const auto& ps) { return ps.name == name; });
        if (p == sig->params.end()) fail(AgentError::Kind::MalformedOutput, where + ": no parameter named " + name);
        if (!seen.insert(name).second) fail(AgentError::Kind::MalformedOutput, where + ": two formulas for " + name);
        dsl::ExprPtr expr;
        try {
          expr = dsl::parse_expression(formula);
        } catch (const dsl::SyntaxError& err) {
          fail(AgentError::Kind::MalformedOutput, where + ": formula for " + name + ": " + err.what());
        }
        std::vector<std::string> vars;
        std::vector<std::string> calls;
        collect_names(expr, vars, calls);
        for (const auto& v : vars) {
          if (!known.count(v)) fail(AgentError::Kind::UnknownSymbol, where + ": unknown symbol " + v);
        }
        for (const auto& c : calls) {
          if (!functions.count(c)) fail(AgentError::Kind::UnknownSymbol, where + ": unknown function " + c);
        }
      }
      for (const auto& p : sig->params) {
        if (!p.optional && !seen.count(p.name)) {
          fail(AgentError::Kind::MalformedOutput, where + ": no formula for " + p.name);
        }
      }
    }
    for (const auto& s : sketch.steps) {
      for (const auto& skill : s.skills) {
        const SkillSignature* sig = catalog.find(skill);
        if (!sig || sig->params.empty()) continue;
        const bool covered = std::any_of(sheet.entries.begin(), sheet.entries.end(),
                                         [&](const ParamEntry& e) { return e.step == s.index && e.skill == skill; });
        if (!covered) {
          fail(AgentError::Kind::MalformedOutput, "step " + std::to_string(s.index) + " " + skill + " has no parameters");
        }
      }
    }
    return sheet;
  });
}

CodePlan generate_code(Gateway& gw, const EnvDescription& env, const SkillCatalog& catalog, const PlanSketch* sketch,
                       const ParamSheet* params, const AgentOptions& opt, Provenance* prov) {
  if (sketch && sketch->steps.empty()) fail(AgentError::Kind::MalformedOutput, "empty plan sketch");
  LLMRequest req = coder_request(cascade_variant(opt.variant), env, catalog, sketch, params);
  prepare(req, opt);
  Provenance local;
  Provenance& p = prov ? *prov : local;
  const dsl::Program program = with_repairs<dsl::Program>(gw, req, opt, &p, [&](const std::string& text) {
    dsl::Program prog = parse_code(text);
    reject_unknown_skills(prog, catalog);
    if (sketch && count_conditions(prog) != sketch->check_count()) {
      fail(AgentError::Kind::MalformedOutput, "the program has " + std::to_string(count_conditions(prog)) +
                                                  " conditions but the plan has " +
                                                  std::to_string(sketch->check_count()) + " checks");
    }
    return prog;
  });
  CodePlan plan;
  plan.source = dsl::print_program(program);
  p.temperature = opt.temperature;
  p.model = gw.model_id();
  p.variant = std::string(variant_name(opt.variant));
  p.code_run = opt.sample;
  plan.provenance = p;
  return plan;
}

CodePlan run_cascade(Gateway& gw, const EnvDescription& env, const SkillCatalog& catalog, const AgentOptions& opt) {
  Provenance prov;
  std::optional<PlanSketch> sketch;
  std::optional<ParamSheet> params;
  if (uses_planner(opt.variant)) sketch = semantic_plan(gw, env, catalog, opt, &prov);
  if (uses_calculator(opt.variant)) params = compute_params(gw, env, catalog, *sketch, opt, &prov);
  return generate_code(gw, env, catalog, sketch ? &*sketch : nullptr, params ? &*params : nullptr, opt, &prov);
}

CodePlan replan(Gateway& gw, const EnvDescription& env, const SkillCatalog& catalog, const CodePlan& primary,
                const ReplanCause& cause, const Scene& scene, const AgentOptions& opt) {
  if (const auto* r = std::get_if<ErrorReport>(&cause)) {
    if (r->failed_skill.name.empty()) fail(AgentError::Kind::MalformedOutput, "empty error report");
  } else {
    const auto& notices = std::get<std::vector<InterruptionNotice>>(cause);
    if (notices.empty()) fail(AgentError::Kind::MalformedOutput, "no interruption notice");
    for (const auto& n : notices) {
      if (n.instruction.empty()) fail(AgentError::Kind::MalformedOutput, "empty interruption instruction");
    }
  }
  LLMRequest req = replanner_request(env, catalog, primary.source, cause);
  prepare(req, opt);
  req.variant = std::string(variant_name(opt.variant));
  Provenance prov;
  const dsl::Program program = with_repairs<dsl::Program>(gw, req, opt, &prov, [&](const std::string& text) {
    dsl::Program prog = parse_code(text);
    reject_unknown_skills(prog, catalog);
    for (const auto& f : dsl::validate_plan(prog, {scene}, catalog)) {
      if (f.category == dsl::FaultCategory::ConstraintViolation || f.blocks_execution()) {
        fail(AgentError::Kind::MalformedOutput, "the new program has a fault: " + f.rule + " at statement " +
                                                    std::to_string(f.location) + ": " + f.message);
      }
    }
    return prog;
  });
  CodePlan plan;
  plan.source = dsl::print_program(program);
  prov.temperature = opt.temperature;
  prov.model = gw.model_id();
  prov.variant = std::string(variant_name(opt.variant));
  prov.code_run = opt.sample;
  prov.parent = sha256_hex(primary.source).substr(0, 16);
  prov.cause = req.cause;
  plan.provenance = prov;
  return plan;
}

}  // namespace quadplan::agents
