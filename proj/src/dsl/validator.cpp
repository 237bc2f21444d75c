// SPDX-License-Identifier: Apache-2.0
#include "quadplan/dsl/validator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "quadplan/dsl/interpreter.hpp"
#include "quadplan/dsl/printer.hpp"
#include "quadplan/skills.hpp"

namespace quadplan::dsl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLevelTol = 0.01;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// ---------------------------------------------------------------- intervals

struct Interval {
  double lo = -kInf;
  double hi = kInf;

  static Interval point(double v) { return {v, v}; }
  [[nodiscard]] bool is_point() const { return lo == hi && std::isfinite(lo); }
};

Interval hull(Interval a, Interval b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

Interval sanitize(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi)) return {};
  return {lo, hi};
}

Interval add(Interval a, Interval b) { return sanitize(a.lo + b.lo, a.hi + b.hi); }
Interval sub(Interval a, Interval b) { return sanitize(a.lo - b.hi, a.hi - b.lo); }
Interval neg(Interval a) { return {-a.hi, -a.lo}; }

Interval mul(Interval a, Interval b) {
  const std::array<double, 4> p{a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  for (const double v : p) {
    if (std::isnan(v)) return {};
  }
  return {*std::min_element(p.begin(), p.end()), *std::max_element(p.begin(), p.end())};
}

Interval div(Interval a, Interval b) {
  if (b.lo <= 0.0 && b.hi >= 0.0) return {};
  return mul(a, {1.0 / b.hi, 1.0 / b.lo});
}

enum class Tri { False, True, Unknown };

Tri tri_not(Tri t) { return t == Tri::Unknown ? t : (t == Tri::True ? Tri::False : Tri::True); }

enum class AType { Number, Bool, Vec, Unknown };

const char* atype_name(AType t) {
  switch (t) {
    case AType::Number: return "number";
    case AType::Bool: return "boolean";
    case AType::Vec: return "vector";
    case AType::Unknown: return "unknown";
  }
  return "?";
}

struct AVal {
  AType type = AType::Unknown;
  Interval num;
  Tri b = Tri::Unknown;
  std::array<Interval, 3> vec{};

  static AVal number(Interval i) { return {AType::Number, i, Tri::Unknown, {}}; }
  static AVal boolean(Tri t) { return {AType::Bool, {}, t, {}}; }
  static AVal vector(std::array<Interval, 3> v) { return {AType::Vec, {}, Tri::Unknown, v}; }
};

AVal join(const AVal& a, const AVal& b) {
  if (a.type != b.type) return {};
  AVal out = a;
  out.num = hull(a.num, b.num);
  out.b = a.b == b.b ? a.b : Tri::Unknown;
  for (int i = 0; i < 3; ++i) out.vec[i] = hull(a.vec[i], b.vec[i]);
  return out;
}

// ------------------------------------------------------------ robot state

struct RobotAbs {
  std::set<Stance> stances{Stance::Quadrupedal};
  Interval level = Interval::point(0.0);
};

struct AState {
  std::map<std::string, AVal> vars;
  RobotAbs robot;
  /// No skill has run yet, so scene globals still hold their initial values.
  bool fresh = true;
  bool dead = false;
  std::optional<std::size_t> fail_at;
};

AState join(const std::vector<AState>& states) {
  std::vector<const AState*> live;
  for (const auto& s : states) {
    if (!s.dead) live.push_back(&s);
  }
  if (live.empty()) {
    AState out = states.front();
    for (const auto& s : states) {
      if (s.fail_at && (!out.fail_at || *s.fail_at < *out.fail_at)) out.fail_at = s.fail_at;
    }
    return out;
  }
  AState out = *live.front();
  for (std::size_t i = 1; i < live.size(); ++i) {
    const AState& s = *live[i];
    for (const auto& [name, v] : s.vars) {
      auto it = out.vars.find(name);
      if (it == out.vars.end()) {
        out.vars.emplace(name, v);
      } else {
        it->second = join(it->second, v);
      }
    }
    out.robot.stances.insert(s.robot.stances.begin(), s.robot.stances.end());
    out.robot.level = hull(out.robot.level, s.robot.level);
    out.fresh = out.fresh && s.fresh;
  }
  out.dead = false;
  out.fail_at.reset();
  return out;
}

// ---------------------------------------------------------------- analysis

class Structure {
 public:
  Structure(const Program& program, const std::vector<const Scene*>& scenes, const SkillCatalog& catalog)
      : program_(program), catalog_(catalog), has_scenes_(!scenes.empty()) {
    const std::set<std::string> limit_names{"max_step_height", "bipedal_reach_height", "reach_radius",
                                            "robot_length",    "robot_width",          "robot_height",
                                            "robot_radius",    "push_mass_limit",      "touch_epsilon",
                                            "step_depth_min"};
    if (scenes.empty()) {
      Scene defaults;
      for (const auto& [k, v] : scene_globals(defaults)) {
        if (limit_names.count(k)) limits_[k] = Interval::point(v);
      }
      return;
    }
    bool first = true;
    for (const Scene* scene : scenes) {
      for (const auto& [k, v] : scene_globals(*scene)) {
        globals_.insert(k);
        if (!limit_names.count(k)) {
          auto it = initial_values_.find(k);
          if (it == initial_values_.end()) {
            initial_values_[k] = Interval::point(v);
          } else {
            it->second = hull(it->second, Interval::point(v));
          }
          continue;
        }
        auto it = limits_.find(k);
        if (it == limits_.end()) {
          limits_[k] = Interval::point(v);
        } else {
          it->second = hull(it->second, Interval::point(v));
        }
      }
      for (const auto& [id, obj] : scene->objects) {
        objects_.insert(id);
        const Interval z = Interval::point(obj.pose.position.z);
        auto it = object_z_.find(id);
        if (it == object_z_.end()) {
          object_z_[id] = z;
        } else {
          it->second = hull(it->second, z);
        }
      }
      for (const auto& e : defined_events(*scene)) events_.insert(e);
      const Interval level = Interval::point(scene->robot.support_height);
      if (first) {
        initial_.stances = {scene->robot.stance};
        initial_.level = level;
      } else {
        initial_.stances.insert(scene->robot.stance);
        initial_.level = hull(initial_.level, level);
      }
      first = false;
    }
  }

  std::vector<PlanFault> run() {
    AState st;
    st.robot = initial_;
    block(program_.statements, st);
    if (st.dead && st.fail_at) {
      report(FaultCategory::Logical, *st.fail_at, "always-fails", "every path through the plan ends in fail(...)");
    }
    return faults_;
  }

 private:
  void report(FaultCategory cat, std::size_t loc, std::string rule, std::string msg, bool heuristic = false) {
    faults_.push_back({cat, loc, std::move(msg), std::move(rule), heuristic});
  }
  void heuristic(std::size_t loc, std::string rule, std::string msg) {
    report(FaultCategory::Logical, loc, std::move(rule), std::move(msg), true);
  }

  [[nodiscard]] std::optional<Interval> limit(const std::string& name) const {
    const auto it = limits_.find(name);
    if (it == limits_.end()) return std::nullopt;
    return it->second;
  }

  void block(const StmtList& list, AState& st) {
    for (const auto& s : list) {
      if (st.dead) return;
      statement(s, st);
    }
  }

  void statement(const Stmt& s, AState& st) {
    std::visit(Overloaded{
                   [&](const Let& l) { st.vars[l.name] = eval(*l.value, st, s.index); },
                   [&](const If& b) { branch(b, s.index, st); },
                   [&](const SkillCall& c) {
                     skill(c, s.index, st);
                     st.fresh = false;
                   },
                   [&](const Fail&) {
                     st.dead = true;
                     st.fail_at = s.index;
                   },
               },
               s.node);
  }

  void branch(const If& b, std::size_t loc, AState& st) {
    std::vector<AState> outs;
    bool rest_reachable = true;
    bool guard_taken = false;
    for (std::size_t i = 0; i < b.arms.size(); ++i) {
      const IfArm& arm = b.arms[i];
      const std::string label = i == 0 ? "if" : "elif";
      if (!rest_reachable) {
        if (!guard_taken) {
          report(FaultCategory::Logical, loc, "unreachable-branch", label + " branch can never run");
          continue;
        }
        state_read_ = false;
        if (eval(*arm.cond, st, loc).b == Tri::False && !state_read_) {
          report(FaultCategory::Logical, loc, "unreachable-branch",
                 label + " condition " + print_expression(*arm.cond) + " is always false");
        }
        continue;
      }
      state_read_ = false;
      const AVal c = eval(*arm.cond, st, loc);
      if (c.type != AType::Bool && c.type != AType::Unknown) {
        heuristic(loc, "type-mismatch", "condition must be a boolean, got " + std::string(atype_name(c.type)));
      }
      if (c.b == Tri::False) {
        // A guard on the scene state is a runtime check, never dead code.
        if (!state_read_) {
          report(FaultCategory::Logical, loc, "unreachable-branch",
                 label + " condition " + print_expression(*arm.cond) + " is always false");
        }
        continue;
      }
      if (c.b == Tri::True && state_read_) guard_taken = true;
      AState inner = st;
      block(arm.body, inner);
      outs.push_back(std::move(inner));
      if (c.b == Tri::True) rest_reachable = false;
    }
    if (b.else_body) {
      if (!rest_reachable) {
        if (!guard_taken) report(FaultCategory::Logical, loc, "unreachable-branch", "else branch can never run");
      } else {
        AState inner = st;
        block(*b.else_body, inner);
        outs.push_back(std::move(inner));
      }
    } else if (rest_reachable) {
      outs.push_back(st);
    }
    if (outs.empty()) return;  // every arm unreachable; already reported
    st = join(outs);
  }

  bool known_object(const std::string& name) const { return !has_scenes_ || objects_.count(name) > 0; }

  void skill(const SkillCall& c, std::size_t loc, AState& st) {
    const SkillSignature* sig = catalog_.find(c.name);
    if (sig == nullptr) {
      heuristic(loc, "unknown-skill", "unknown skill " + c.name);
      return;
    }
    if (c.args.size() < sig->min_arity() || c.args.size() > sig->max_arity()) {
      heuristic(loc, "arity",
                c.name + " takes " + sig->signature_text() + ", got " + std::to_string(c.args.size()) + " arguments");
      return;
    }
    const std::size_t before = faults_.size();
    std::vector<AVal> nums(c.args.size());
    for (std::size_t i = 0; i < c.args.size(); ++i) {
      const ParamSpec& p = sig->params[i];
      if (p.type == ParamType::Number) {
        nums[i] = eval(*c.args[i], st, loc);
        if (nums[i].type != AType::Number && nums[i].type != AType::Unknown) {
          heuristic(loc, "arg-type", c.name + " argument " + p.name + " must be a number, got " + atype_name(nums[i].type));
        }
        continue;
      }
      const auto* var = std::get_if<Var>(&c.args[i]->node);
      if (var == nullptr) {
        heuristic(loc, "arg-type", c.name + " argument " + p.name + " must be a " + std::string(param_type_name(p.type)) +
                                       " name");
        continue;
      }
      const bool known = p.type == ParamType::Object ? known_object(var->name)
                                                     : (!has_scenes_ || events_.count(var->name) > 0);
      if (!known) {
        heuristic(loc, "unknown-identifier", "unknown " + std::string(param_type_name(p.type)) + " " + var->name);
      }
    }
    if (faults_.size() != before) return;

    RobotAbs& robot = st.robot;
    if (sig->requires_stance && robot.stances.count(*sig->requires_stance) == 0) {
      std::string have;
      for (const Stance s : robot.stances) have += (have.empty() ? "" : "/") + std::string(stance_name(s));
      report(FaultCategory::Logical, loc, "bad-stance",
             c.name + " needs the " + std::string(stance_name(*sig->requires_stance)) + " stance but the robot is " +
                 have);
    }
    if (sig->requires_stance) robot.stances = {*sig->requires_stance};

    const auto max_step = limit("max_step_height");
    if (c.name == "push_to_position") {
      const std::string& obj = std::get<Var>(c.args[0]->node).name;
      const auto it = object_z_.find(obj);
      const Interval oz = it != object_z_.end() ? it->second : Interval::point(0.0);
      if (robot.level.lo > oz.hi + kLevelTol || robot.level.hi < oz.lo - kLevelTol) {
        report(FaultCategory::Logical, loc, "push-level", "push of " + obj + " from a different level than the object");
      }
    } else if (c.name == "climb_to_position") {
      const AVal& z = nums[2];
      // With scenes the dry run climbs the real stair profile instead.
      if (!has_scenes_ && z.type == AType::Number && z.num.is_point() && robot.level.is_point() && max_step &&
          max_step->is_point() && std::fabs(z.num.lo - robot.level.lo) > max_step->lo + 1e-9) {
        report(FaultCategory::ConstraintViolation, loc, "climb-rise-constant",
               "climb from height " + format_number(robot.level.lo) + " to " + format_number(z.num.lo) +
                   " exceeds max_step_height in one rise");
      }
      robot.level = z.type == AType::Number ? z.num : Interval{};
    } else if (c.name == "hand_touch_position") {
      const AVal& z = nums[2];
      const auto reach = limit("bipedal_reach_height");
      if (z.type == AType::Number && z.num.is_point() && robot.level.is_point() && reach && reach->is_point() &&
          (z.num.lo > robot.level.lo + reach->lo + 1e-9 || z.num.lo < robot.level.lo - 1e-9)) {
        report(FaultCategory::ConstraintViolation, loc, "touch-height-constant",
               "touch height " + format_number(z.num.lo) + " is outside the bipedal reach");
      }
    } else if (c.name == "wait_for_event") {
      const AVal& t = nums[1];
      if (t.type == AType::Number && t.num.hi <= 0.0) {
        report(FaultCategory::ConstraintViolation, loc, "nonpositive-timeout", "wait_for_event timeout must be positive");
      }
    }
    if (sig->results_in) robot.stances = {*sig->results_in};
  }

  AVal lookup(const std::string& name, const AState& st, std::size_t loc) {
    if (const auto it = st.vars.find(name); it != st.vars.end()) return it->second;
    if (const auto l = limit(name)) return AVal::number(*l);
    if (name == "robot_bipedal" && has_scenes_) {
      state_read_ = true;
      const bool two = st.robot.stances.count(Stance::Bipedal) > 0;
      const bool four = st.robot.stances.count(Stance::Quadrupedal) > 0;
      return AVal::number({four ? 0.0 : 1.0, two ? 1.0 : 0.0});
    }
    if (st.fresh) {
      if (const auto it = initial_values_.find(name); it != initial_values_.end()) {
        state_read_ = true;
        return AVal::number(it->second);
      }
    }
    if (!has_scenes_ || globals_.count(name)) return AVal::number({});
    heuristic(loc, "unknown-identifier", "unknown identifier " + name);
    return {};
  }

  AVal eval(const Expr& e, const AState& st, std::size_t loc) {
    return std::visit(
        Overloaded{
            [&](const NumberLit& n) { return AVal::number(Interval::point(n.value)); },
            [&](const BoolLit& b) { return AVal::boolean(b.value ? Tri::True : Tri::False); },
            [&](const Var& v) { return lookup(v.name, st, loc); },
            [&](const Unary& u) {
              const AVal x = eval(*u.operand, st, loc);
              if (u.op == UnOp::Not) {
                expect(x, AType::Bool, "operand of 'not'", loc);
                return AVal::boolean(x.type == AType::Bool ? tri_not(x.b) : Tri::Unknown);
              }
              if (x.type == AType::Vec) return AVal::vector({neg(x.vec[0]), neg(x.vec[1]), neg(x.vec[2])});
              expect(x, AType::Number, "operand of '-'", loc);
              return x.type == AType::Number ? AVal::number(neg(x.num)) : AVal{};
            },
            [&](const Binary& b) { return binary(b, st, loc); },
            [&](const Call& c) { return call(c, st, loc); },
            [&](const Field& f) {
              const AVal base = eval(*f.base, st, loc);
              expect(base, AType::Vec, std::string("base of .") + f.axis, loc);
              if (base.type != AType::Vec) return AVal::number({});
              return AVal::number(base.vec[f.axis - 'x']);
            },
        },
        e.node);
  }

  void expect(const AVal& v, AType want, const std::string& what, std::size_t loc) {
    if (v.type != want && v.type != AType::Unknown) {
      heuristic(loc, "type-mismatch",
                what + " must be a " + std::string(atype_name(want)) + ", got " + atype_name(v.type));
    }
  }

  AVal binary(const Binary& b, const AState& st, std::size_t loc) {
    const AVal x = eval(*b.lhs, st, loc);
    const AVal y = eval(*b.rhs, st, loc);
    const std::string op(binop_text(b.op));
    switch (b.op) {
      case BinOp::And:
      case BinOp::Or: {
        expect(x, AType::Bool, "operand of '" + op + "'", loc);
        expect(y, AType::Bool, "operand of '" + op + "'", loc);
        const Tri dominant = b.op == BinOp::And ? Tri::False : Tri::True;
        if (x.b == dominant || y.b == dominant) return AVal::boolean(dominant);
        if (x.b != Tri::Unknown && y.b != Tri::Unknown) return AVal::boolean(tri_not(dominant));
        return AVal::boolean(Tri::Unknown);
      }
      case BinOp::Eq:
      case BinOp::Ne: {
        if (x.type != AType::Unknown && y.type != AType::Unknown && (x.type != y.type || x.type == AType::Vec)) {
          heuristic(loc, "type-mismatch",
                    "cannot compare " + std::string(atype_name(x.type)) + " with " + atype_name(y.type));
          return AVal::boolean(Tri::Unknown);
        }
        Tri eq = Tri::Unknown;
        if (x.type == AType::Number && y.type == AType::Number) {
          if (x.num.is_point() && y.num.is_point() && x.num.lo == y.num.lo) eq = Tri::True;
          if (x.num.hi < y.num.lo || y.num.hi < x.num.lo) eq = Tri::False;
        } else if (x.type == AType::Bool && y.type == AType::Bool && x.b != Tri::Unknown && y.b != Tri::Unknown) {
          eq = x.b == y.b ? Tri::True : Tri::False;
        }
        return AVal::boolean(b.op == BinOp::Eq ? eq : tri_not(eq));
      }
      case BinOp::Lt:
      case BinOp::Le:
      case BinOp::Gt:
      case BinOp::Ge: {
        expect(x, AType::Number, "operand of '" + op + "'", loc);
        expect(y, AType::Number, "operand of '" + op + "'", loc);
        if (x.type != AType::Number || y.type != AType::Number) return AVal::boolean(Tri::Unknown);
        // Normalize to a < b or a <= b.
        const bool flip = b.op == BinOp::Gt || b.op == BinOp::Ge;
        const Interval a = flip ? y.num : x.num;
        const Interval c = flip ? x.num : y.num;
        const bool strict = b.op == BinOp::Lt || b.op == BinOp::Gt;
        if (strict ? a.hi < c.lo : a.hi <= c.lo) return AVal::boolean(Tri::True);
        if (strict ? a.lo >= c.hi : a.lo > c.hi) return AVal::boolean(Tri::False);
        return AVal::boolean(Tri::Unknown);
      }
      default: break;
    }
    // Arithmetic.
    if (b.op == BinOp::Div && y.type == AType::Number && y.num.is_point() && y.num.lo == 0.0) {
      heuristic(loc, "division-by-zero", "division by zero");
      return AVal::number({});
    }
    if (x.type == AType::Unknown || y.type == AType::Unknown) {
      if (x.type == AType::Bool || y.type == AType::Bool) {
        heuristic(loc, "type-mismatch", "arithmetic on a boolean");
      }
      return {};
    }
    if (x.type == AType::Number && y.type == AType::Number) {
      switch (b.op) {
        case BinOp::Add: return AVal::number(add(x.num, y.num));
        case BinOp::Sub: return AVal::number(sub(x.num, y.num));
        case BinOp::Mul: return AVal::number(mul(x.num, y.num));
        default: return AVal::number(div(x.num, y.num));
      }
    }
    std::array<Interval, 3> v{};
    if (x.type == AType::Vec && y.type == AType::Vec && (b.op == BinOp::Add || b.op == BinOp::Sub)) {
      for (int i = 0; i < 3; ++i) v[i] = b.op == BinOp::Add ? add(x.vec[i], y.vec[i]) : sub(x.vec[i], y.vec[i]);
      return AVal::vector(v);
    }
    if (x.type == AType::Vec && y.type == AType::Number && (b.op == BinOp::Mul || b.op == BinOp::Div)) {
      for (int i = 0; i < 3; ++i) v[i] = b.op == BinOp::Mul ? mul(x.vec[i], y.num) : div(x.vec[i], y.num);
      return AVal::vector(v);
    }
    if (x.type == AType::Number && y.type == AType::Vec && b.op == BinOp::Mul) {
      for (int i = 0; i < 3; ++i) v[i] = mul(x.num, y.vec[i]);
      return AVal::vector(v);
    }
    heuristic(loc, "type-mismatch",
              "unsupported '" + op + "' on " + atype_name(x.type) + " and " + atype_name(y.type));
    return {};
  }

  AVal call(const Call& c, const AState& st, std::size_t loc) {
    const auto& builtins = expression_builtins();
    const auto it = std::find_if(builtins.begin(), builtins.end(), [&](const BuiltinSpec& b) { return b.name == c.name; });
    if (it == builtins.end()) {
      heuristic(loc, catalog_.find(c.name) ? "skill-in-expression" : "unknown-function",
                c.name + " is not an expression function");
      return {};
    }
    if (c.args.size() != it->arity) {
      heuristic(loc, "builtin-arity", c.name + " takes " + std::to_string(it->arity) + " arguments");
      return {};
    }
    if (c.name == "get_position" || c.name == "get_size") {
      const auto* var = std::get_if<Var>(&c.args[0]->node);
      if (var == nullptr) {
        heuristic(loc, "arg-type", c.name + " expects an object name");
      } else if (var->name != "robot" && !known_object(var->name)) {
        heuristic(loc, "unknown-identifier", "unknown object " + var->name);
      }
      return AVal::vector({});
    }
    std::vector<AVal> args;
    for (const auto& a : c.args) {
      args.push_back(eval(*a, st, loc));
      expect(args.back(), AType::Number, "argument of " + c.name, loc);
    }
    for (const auto& a : args) {
      if (a.type != AType::Number) return c.name == "vec3" ? AVal::vector({}) : AVal::number({});
    }
    if (c.name == "vec3") return AVal::vector({args[0].num, args[1].num, args[2].num});
    if (c.name == "abs") {
      const Interval i = args[0].num;
      if (i.lo >= 0) return AVal::number(i);
      if (i.hi <= 0) return AVal::number(neg(i));
      return AVal::number({0.0, std::max(-i.lo, i.hi)});
    }
    const Interval a = args[0].num;
    const Interval b = args[1].num;
    if (c.name == "min") return AVal::number({std::min(a.lo, b.lo), std::min(a.hi, b.hi)});
    return AVal::number({std::max(a.lo, b.lo), std::max(a.hi, b.hi)});
  }

  const Program& program_;
  const SkillCatalog& catalog_;
  bool has_scenes_;
  std::map<std::string, Interval> initial_values_;
  bool state_read_ = false;
  std::map<std::string, Interval> limits_;
  std::set<std::string> globals_;
  std::set<std::string> objects_;
  std::set<std::string> events_;
  std::map<std::string, Interval> object_z_;
  RobotAbs initial_;
  std::vector<PlanFault> faults_;
};

// ------------------------------------------------------------ dry run

std::optional<std::string> solid_containing(const Scene& scene, Vec3 p) {
  for (const auto& [id, obj] : scene.objects) {
    if (!obj.solid() || !obj.bounds().strictly_contains(p, 1e-6)) continue;
    const auto top = obj.top_at(p.x, p.y);
    if (top && p.z < *top - 1e-6) return id;
  }
  return std::nullopt;
}

struct Classified {
  FaultCategory category;
  std::string rule;
};

std::optional<Classified> classify(FailReason reason) {
  switch (reason) {
    case FailReason::NoPath: return Classified{FaultCategory::Spatial, "no-path"};
    case FailReason::Blocked: return Classified{FaultCategory::Spatial, "push-blocked"};
    case FailReason::BadTarget: return Classified{FaultCategory::Spatial, "bad-target"};
    case FailReason::NoClearance: return Classified{FaultCategory::Spatial, "no-clearance"};
    case FailReason::StepTooHigh: return Classified{FaultCategory::ConstraintViolation, "step-too-high"};
    case FailReason::TreadTooShallow: return Classified{FaultCategory::ConstraintViolation, "tread-too-shallow"};
    case FailReason::Unpushable: return Classified{FaultCategory::ConstraintViolation, "unpushable"};
    case FailReason::OutOfReach: return Classified{FaultCategory::ConstraintViolation, "out-of-reach"};
    case FailReason::BadStance: return Classified{FaultCategory::Logical, "bad-stance"};
    case FailReason::LevelMismatch: return Classified{FaultCategory::Logical, "push-level"};
    default: return std::nullopt;
  }
}

std::optional<PlanFault> precheck(const Scene& scene, const SkillInvocation& call, std::size_t loc) {
  auto num = [&](std::size_t i) { return std::get<double>(call.args[i]); };
  auto inside = [&](Vec3 p, const std::string& what) -> std::optional<PlanFault> {
    if (const auto id = solid_containing(scene, p)) {
      return PlanFault{FaultCategory::Spatial, loc, what + " target lies inside " + *id, "target-inside-object", false};
    }
    return std::nullopt;
  };
  if (call.name == "walk_to_position") return inside({num(0), num(1), num(2) + 0.05}, "walk");
  if (call.name == "climb_to_position") return inside({num(0), num(1), num(2) + 0.02}, "climb");
  if (call.name == "hand_touch_position") return inside({num(0), num(1), num(2)}, "touch");
  if (call.name == "wait_for_event" && !(num(1) > 0.0)) {
    return PlanFault{FaultCategory::ConstraintViolation, loc, "wait_for_event timeout must be positive",
                     "nonpositive-timeout", false};
  }
  if (call.name == "push_to_position") {
    const std::string& id = std::get<std::string>(call.args[0]);
    ObjectSpec moved = scene.object(id);
    moved.pose.position.x = num(1);
    moved.pose.position.y = num(2);
    for (const auto& [other_id, other] : scene.objects) {
      if (other_id == id || !other.solid()) continue;
      if (aabb_overlap(moved, other)) {
        return PlanFault{FaultCategory::Spatial, loc, "push target for " + id + " overlaps " + other_id,
                         "push-target-overlap", false};
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::string_view fault_category_name(FaultCategory category) {
  switch (category) {
    case FaultCategory::Spatial: return "Spatial";
    case FaultCategory::ConstraintViolation: return "ConstraintViolation";
    case FaultCategory::Logical: return "Logical";
  }
  return "?";
}

std::optional<FaultCategory> fault_category_from_name(std::string_view name) {
  for (const auto c : {FaultCategory::Spatial, FaultCategory::ConstraintViolation, FaultCategory::Logical}) {
    if (fault_category_name(c) == name) return c;
  }
  return std::nullopt;
}

nlohmann::json fault_to_json(const PlanFault& f) {
  return {{"category", fault_category_name(f.category)},
          {"location", f.location},
          {"rule", f.rule},
          {"message", f.message},
          {"heuristic", f.heuristic},
          {"blocks_execution", f.blocks_execution()}};
}

std::vector<PlanFault> check_structure(const Program& program, const std::vector<const Scene*>& scenes,
                                       const SkillCatalog& catalog) {
  auto faults = Structure(program, scenes, catalog).run();
  std::stable_sort(faults.begin(), faults.end(),
                   [](const PlanFault& a, const PlanFault& b) { return a.location < b.location; });
  return faults;
}

std::vector<PlanFault> check_in_scene(const Program& program, const Scene& original, const SkillCatalog& catalog) {
  Scene scene = original;
  const NoiseRegime noise = NoiseRegime::zero();
  std::vector<PlanFault> faults;
  auto dispatch = [&](const SkillInvocation& call, std::size_t loc) {
    if (auto f = precheck(scene, call, loc)) {
      faults.push_back(*f);
      return false;
    }
    SkillOutcome out;
    try {
      out = invoke_skill(scene, call, noise);
    } catch (const SkillError& e) {
      faults.push_back({FaultCategory::Logical, loc, e.what(), "bad-arguments", true});
      return false;
    }
    if (out.ok()) return true;
    if (const auto c = classify(out.reason)) {
      faults.push_back({c->category, loc, out.detail, c->rule, false});
    }
    return false;
  };
  try {
    run_plan(program, scene, dispatch, catalog);
  } catch (const RuntimeError& e) {
    const std::string rule =
        e.kind() == RuntimeError::Kind::UnknownIdentifier ? "unknown-identifier" : "runtime-type-error";
    faults.push_back({FaultCategory::Logical, e.location(), e.what(), rule, true});
  }
  return faults;
}

std::vector<PlanFault> validate_plan(const Program& program, const std::vector<Scene>& scenes,
                                     const SkillCatalog& catalog) {
  std::vector<const Scene*> ptrs;
  for (const auto& s : scenes) ptrs.push_back(&s);
  std::vector<PlanFault> all = check_structure(program, ptrs, catalog);
  if (!any_blocking(all)) {
    for (const auto& s : scenes) {
      auto found = check_in_scene(program, s, catalog);
      all.insert(all.end(), found.begin(), found.end());
    }
  }
  std::vector<PlanFault> out;
  std::set<std::pair<FaultCategory, std::size_t>> seen;
  for (auto& f : all) {
    if (seen.insert({f.category, f.location}).second) out.push_back(std::move(f));
  }
  std::stable_sort(out.begin(), out.end(), [](const PlanFault& a, const PlanFault& b) {
    return a.location != b.location ? a.location < b.location : a.category < b.category;
  });
  return out;
}

bool any_blocking(const std::vector<PlanFault>& faults) {
  return std::any_of(faults.begin(), faults.end(), [](const PlanFault& f) { return f.blocks_execution(); });
}

}  // namespace quadplan::dsl
