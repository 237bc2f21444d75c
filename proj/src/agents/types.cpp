// SPDX-License-Identifier: Apache-2.0
#include "quadplan/agents/types.hpp"

#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace quadplan::agents {

namespace {

[[noreturn]] void malformed(const std::string& why) { throw AgentError(AgentError::Kind::MalformedOutput, why); }

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

int parse_index(const std::string& s, const std::string& where) {
  if (s.empty() || s.size() > 6) malformed(where + ": bad step number '" + s + "'");
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) malformed(where + ": bad step number '" + s + "'");
  }
  return std::stoi(s);
}

}  // namespace

std::string_view agent_error_name(AgentError::Kind kind) {
  switch (kind) {
    case AgentError::Kind::LLMUnavailable: return "LLMUnavailable";
    case AgentError::Kind::AuthError: return "AuthError";
    case AgentError::Kind::MalformedOutput: return "MalformedOutput";
    case AgentError::Kind::UnknownSymbol: return "UnknownSymbol";
    case AgentError::Kind::ParseRejected: return "ParseRejected";
    case AgentError::Kind::NumeralsInPrompt: return "NumeralsInPrompt";
  }
  return "?";
}

bool contains_numeral(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
    if (i == 0) return true;
    const char prev = text[i - 1];
    if (!(std::isalnum(static_cast<unsigned char>(prev)) || prev == '_')) return true;
  }
  return false;
}

std::string EnvDescription::render_for_planner() const {
  std::ostringstream out;
  out << "Task: " << task << "\n\n" << prose << "\n\nObjects:\n";
  for (const auto& o : objects) out << "- " << o << "\n";
  out << "\nEvents:\n";
  for (const auto& e : events) out << "- " << e << "\n";
  out << "\nPhysical rules:\n";
  for (const auto& c : constraints) out << "- " << c << "\n";
  return out.str();
}

std::string EnvDescription::render_with_globals() const {
  std::ostringstream out;
  out << render_for_planner() << "\nGlobal variables (values are bound when the plan runs):\n";
  for (const auto& g : globals) out << "- " << g << "\n";
  return out.str();
}

// --- plan sketch ------------------------------------------------------------
//
//   STEP 1 CHECK: <text>
//     TRUE -> 2
//     FALSE -> UNSOLVABLE
//   STEP 2 ACTION: <text> [skill_a, skill_b]
//     NEXT -> END

std::size_t PlanSketch::check_count() const {
  std::size_t n = 0;
  for (const auto& s : steps) n += s.kind == SketchStep::Kind::Check ? 1 : 0;
  return n;
}

const SketchStep* PlanSketch::step(int index) const {
  for (const auto& s : steps) {
    if (s.index == index) return &s;
  }
  return nullptr;
}

PlanSketch parse_sketch(const std::string& text) {
  PlanSketch sketch;
  SketchStep* cur = nullptr;
  int line_no = 0;
  for (const auto& raw : lines_of(text)) {
    ++line_no;
    const std::string line = trim(raw);
    const std::string where = "sketch line " + std::to_string(line_no);
    if (line.empty() || starts_with(line, "#")) continue;
    if (starts_with(line, "STEP ")) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) malformed(where + ": missing ':' after the step header");
      std::istringstream head(line.substr(5, colon - 5));
      std::string num;
      std::string kind;
      head >> num >> kind;
      SketchStep step;
      step.index = parse_index(num, where);
      if (kind == "CHECK") {
        step.kind = SketchStep::Kind::Check;
      } else if (kind == "ACTION") {
        step.kind = SketchStep::Kind::Action;
      } else {
        malformed(where + ": step kind must be CHECK or ACTION, got '" + kind + "'");
      }
      std::string body = trim(line.substr(colon + 1));
      if (const auto lb = body.rfind('['); lb != std::string::npos && body.back() == ']') {
        std::string list = body.substr(lb + 1, body.size() - lb - 2);
        body = trim(body.substr(0, lb));
        std::istringstream items(list);
        std::string item;
        while (std::getline(items, item, ',')) {
          item = trim(item);
          if (!item.empty()) step.skills.push_back(item);
        }
      }
      if (body.empty()) malformed(where + ": empty step text");
      step.text = body;
      if (sketch.step(step.index) != nullptr) malformed(where + ": duplicate step " + num);
      sketch.steps.push_back(step);
      cur = &sketch.steps.back();
      continue;
    }
    const auto arrow = line.find("->");
    if (arrow == std::string::npos || cur == nullptr) malformed(where + ": expected 'STEP' or an edge 'LABEL -> target'");
    const std::string label = trim(line.substr(0, arrow));
    const std::string target = trim(line.substr(arrow + 2));
    if (cur->kind == SketchStep::Kind::Check) {
      if (label != "TRUE" && label != "FALSE") malformed(where + ": a CHECK takes TRUE and FALSE edges");
      const bool unsolvable = target == "UNSOLVABLE";
      std::optional<int> to;
      if (!unsolvable) to = parse_index(target, where);
      if (label == "TRUE") {
        cur->on_true = to;
        cur->true_unsolvable = unsolvable;
      } else {
        cur->on_false = to;
        cur->false_unsolvable = unsolvable;
      }
    } else {
      if (label != "NEXT") malformed(where + ": an ACTION takes a NEXT edge");
      if (target != "END") cur->next = parse_index(target, where);
    }
  }
  if (sketch.steps.empty()) malformed("the sketch has no steps");

  for (const auto& s : sketch.steps) {
    const std::string name = "step " + std::to_string(s.index);
    if (s.kind == SketchStep::Kind::Check) {
      if (!(s.on_true || s.true_unsolvable) || !(s.on_false || s.false_unsolvable)) {
        malformed(name + ": a CHECK needs both TRUE and FALSE edges");
      }
    }
    for (const auto& to : {s.on_true, s.on_false, s.next}) {
      if (to && sketch.step(*to) == nullptr) malformed(name + ": edge to missing step " + std::to_string(*to));
    }
  }

  // Cycle check by depth-first search with colors.
  std::map<int, int> color;
  std::function<void(int)> visit = [&](int index) {
    color[index] = 1;
    const SketchStep* s = sketch.step(index);
    for (const auto& to : {s->on_true, s->on_false, s->next}) {
      if (!to) continue;
      if (color[*to] == 1) malformed("the sketch has a cycle through step " + std::to_string(*to));
      if (color[*to] == 0) visit(*to);
    }
    color[index] = 2;
  };
  for (const auto& s : sketch.steps) {
    if (color[s.index] == 0) visit(s.index);
  }
  return sketch;
}

std::string render_sketch(const PlanSketch& sketch) {
  std::ostringstream out;
  auto target = [](const std::optional<int>& to, bool unsolvable) {
    return unsolvable ? std::string("UNSOLVABLE") : std::to_string(*to);
  };
  for (const auto& s : sketch.steps) {
    out << "STEP " << s.index << (s.kind == SketchStep::Kind::Check ? " CHECK: " : " ACTION: ") << s.text;
    if (!s.skills.empty()) {
      out << " [";
      for (std::size_t i = 0; i < s.skills.size(); ++i) out << (i ? ", " : "") << s.skills[i];
      out << "]";
    }
    out << "\n";
    if (s.kind == SketchStep::Kind::Check) {
      out << "  TRUE -> " << target(s.on_true, s.true_unsolvable) << "\n";
      out << "  FALSE -> " << target(s.on_false, s.false_unsolvable) << "\n";
    } else {
      out << "  NEXT -> " << (s.next ? std::to_string(*s.next) : "END") << "\n";
    }
  }
  return out.str();
}

// --- parameter sheet --------------------------------------------------------
//
//   STEP 2 push_to_position
//     reasoning: <text>
//     obj = box
//     x = stairs_x - stairs_size_x / 2

ParamSheet parse_params(const std::string& text) {
  ParamSheet sheet;
  ParamEntry* cur = nullptr;
  int line_no = 0;
  for (const auto& raw : lines_of(text)) {
    ++line_no;
    const std::string line = trim(raw);
    const std::string where = "params line " + std::to_string(line_no);
    if (line.empty() || starts_with(line, "#")) continue;
    if (starts_with(line, "STEP ")) {
      std::istringstream head(line.substr(5));
      std::string num;
      std::string skill;
      std::string extra;
      head >> num >> skill >> extra;
      if (skill.empty() || !extra.empty()) malformed(where + ": expected 'STEP <n> <skill>'");
      ParamEntry e;
      e.step = parse_index(num, where);
      e.skill = skill;
      sheet.entries.push_back(e);
      cur = &sheet.entries.back();
      continue;
    }
    if (cur == nullptr) malformed(where + ": parameters before any STEP header");
    if (starts_with(line, "reasoning:")) {
      cur->reasoning = trim(line.substr(10));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) malformed(where + ": expected 'name = formula'");
    const std::string name = trim(line.substr(0, eq));
    const std::string formula = trim(line.substr(eq + 1));
    if (formula.empty()) malformed(where + ": empty formula for " + name);
    cur->formulas.emplace_back(name, formula);
  }
  if (sheet.entries.empty()) malformed("the parameter sheet has no steps");
  return sheet;
}

std::string render_params(const ParamSheet& sheet) {
  std::ostringstream out;
  for (const auto& e : sheet.entries) {
    out << "STEP " << e.step << " " << e.skill << "\n";
    if (!e.reasoning.empty()) out << "  reasoning: " << e.reasoning << "\n";
    for (const auto& [name, formula] : e.formulas) out << "  " << name << " = " << formula << "\n";
  }
  return out.str();
}

nlohmann::json provenance_to_json(const Provenance& p) {
  nlohmann::json j{{"transcript_ids", p.transcript_ids},
                   {"temperature", p.temperature},
                   {"model", p.model},
                   {"variant", p.variant},
                   {"code_run", p.code_run}};
  if (!p.parent.empty()) j["parent"] = p.parent;
  if (!p.cause.empty()) j["cause"] = p.cause;
  return j;
}

std::string extract_code(const std::string& text) {
  const auto open = text.find("```");
  if (open == std::string::npos) return text;
  const auto body = text.find('\n', open);
  if (body == std::string::npos) return "";
  const auto close = text.find("```", body + 1);
  return text.substr(body + 1, close == std::string::npos ? std::string::npos : close - body - 1);
}

std::string prompt_text(const LLMRequest& request) {
  std::string out = "system\n" + request.system;
  for (const auto& m : request.messages) out += "\n" + m.role + "\n" + m.content;
  return out;
}

}  // namespace quadplan::agents
