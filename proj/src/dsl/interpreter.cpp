// SPDX-License-Identifier: Apache-2.0
#include "quadplan/dsl/interpreter.hpp"

#include <cmath>

namespace quadplan::dsl {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void type_error(std::size_t loc, const std::string& msg) {
  throw RuntimeError(RuntimeError::Kind::RuntimeTypeError, loc, msg);
}

double as_number(const Value& v, std::size_t loc, const char* what) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  type_error(loc, std::string(what) + " must be a number, got " + value_type_name(v));
}

bool as_bool(const Value& v, std::size_t loc, const char* what) {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  type_error(loc, std::string(what) + " must be a boolean, got " + value_type_name(v));
}

std::string perception_id(const std::vector<ExprPtr>& args, const std::string& fn, std::size_t loc) {
  if (args.size() != 1) type_error(loc, fn + " takes 1 argument");
  const auto* var = std::get_if<Var>(&args[0]->node);
  if (var == nullptr) type_error(loc, fn + " expects an object name");
  return var->name;
}

Value perceive(const Call& call, const Environment& env, std::size_t loc) {
  const std::string id = perception_id(call.args, call.name, loc);
  const Scene* scene = env.scene();
  if (scene == nullptr) throw RuntimeError(RuntimeError::Kind::UnknownIdentifier, loc, "no scene for " + id);
  if (id == "robot") {
    const RobotState& r = scene->robot;
    if (call.name == "get_position") return Vec3{r.base.position.x, r.base.position.y, r.support_height};
    return scene->limits.quad_body;
  }
  if (!scene->has_object(id)) throw RuntimeError(RuntimeError::Kind::UnknownIdentifier, loc, "unknown object " + id);
  const ObjectSpec& obj = scene->object(id);
  return call.name == "get_position" ? obj.pose.position : obj.size;
}

Value arithmetic(BinOp op, const Value& a, const Value& b, std::size_t loc) {
  const auto* da = std::get_if<double>(&a);
  const auto* db = std::get_if<double>(&b);
  const auto* va = std::get_if<Vec3>(&a);
  const auto* vb = std::get_if<Vec3>(&b);
  const std::string sig = "'" + std::string(binop_text(op)) + "' on " + value_type_name(a) + " and " +
                          value_type_name(b);
  if (op == BinOp::Div && db != nullptr && *db == 0.0) type_error(loc, "division by zero");
  if (da && db) {
    switch (op) {
      case BinOp::Add: return *da + *db;
      case BinOp::Sub: return *da - *db;
      case BinOp::Mul: return *da * *db;
      default: return *da / *db;
    }
  }
  if (va && vb && (op == BinOp::Add || op == BinOp::Sub)) return op == BinOp::Add ? *va + *vb : *va - *vb;
  if (va && db && (op == BinOp::Mul || op == BinOp::Div)) return op == BinOp::Mul ? *va * *db : *va / *db;
  if (da && vb && op == BinOp::Mul) return *da * *vb;
  type_error(loc, "unsupported " + sig);
}

Value compare(BinOp op, const Value& a, const Value& b, std::size_t loc) {
  if (op == BinOp::Eq || op == BinOp::Ne) {
    if (a.index() != b.index() || std::holds_alternative<Vec3>(a)) {
      type_error(loc, "cannot compare " + value_type_name(a) + " with " + value_type_name(b));
    }
    return (a == b) == (op == BinOp::Eq);
  }
  const double x = as_number(a, loc, "comparison operand");
  const double y = as_number(b, loc, "comparison operand");
  switch (op) {
    case BinOp::Lt: return x < y;
    case BinOp::Le: return x <= y;
    case BinOp::Gt: return x > y;
    default: return x >= y;
  }
}

class Runner {
 public:
  Runner(const Program& program, const Scene& scene, const Dispatcher& dispatch, const SkillCatalog& catalog)
      : program_(program), env_(&scene), dispatch_(dispatch), catalog_(catalog) {}

  PlanResult run() {
    block(program_.statements);
    return result_;
  }

 private:
  // Returns false once execution must stop.
  bool block(const StmtList& list) {
    for (const auto& s : list) {
      if (!statement(s)) return false;
    }
    return true;
  }

  bool statement(const Stmt& s) {
    return std::visit(
        Overloaded{
            [&](const Let& l) {
              env_.bind(l.name, evaluate(*l.value, env_, s.index));
              return true;
            },
            [&](const If& b) {
              for (const auto& arm : b.arms) {
                if (as_bool(evaluate(*arm.cond, env_, s.index), s.index, "condition")) return block(arm.body);
              }
              return b.else_body ? block(*b.else_body) : true;
            },
            [&](const SkillCall& c) {
              const SkillInvocation call = bind_arguments(c, env_, catalog_, s.index);
              ++result_.skill_calls;
              const bool go_on = dispatch_(call, s.index);
              env_.invalidate();
              if (!go_on) {
                result_.status = PlanStatus::Stopped;
                result_.location = s.index;
              }
              return go_on;
            },
            [&](const Fail& f) {
              result_.status = PlanStatus::Unsolvable;
              result_.location = s.index;
              result_.message = f.message;
              return false;
            },
        },
        s.node);
  }

  const Program& program_;
  Environment env_;
  const Dispatcher& dispatch_;
  const SkillCatalog& catalog_;
  PlanResult result_;
};

}  // namespace

std::string value_type_name(const Value& v) {
  switch (v.index()) {
    case 0: return "number";
    case 1: return "boolean";
    default: return "vector";
  }
}

void Environment::set_scene(const Scene* scene) {
  scene_ = scene;
  globals_.reset();
}

std::optional<Value> Environment::lookup(const std::string& name) const {
  if (const auto it = vars_.find(name); it != vars_.end()) return it->second;
  if (scene_ == nullptr) return std::nullopt;
  if (!globals_) globals_ = scene_globals(*scene_);
  if (const auto it = globals_->find(name); it != globals_->end()) return it->second;
  return std::nullopt;
}

Value evaluate(const Expr& e, const Environment& env, std::size_t loc) {
  return std::visit(
      Overloaded{
          [&](const NumberLit& n) -> Value { return n.value; },
          [&](const BoolLit& b) -> Value { return b.value; },
          [&](const Var& v) -> Value {
            if (auto value = env.lookup(v.name)) return *value;
            throw RuntimeError(RuntimeError::Kind::UnknownIdentifier, loc, "unknown identifier " + v.name);
          },
          [&](const Unary& u) -> Value {
            const Value x = evaluate(*u.operand, env, loc);
            if (u.op == UnOp::Not) return !as_bool(x, loc, "operand of 'not'");
            if (const auto* v = std::get_if<Vec3>(&x)) return *v * -1.0;
            return -as_number(x, loc, "operand of '-'");
          },
          [&](const Binary& b) -> Value {
            if (b.op == BinOp::And || b.op == BinOp::Or) {
              const bool lhs = as_bool(evaluate(*b.lhs, env, loc), loc, "operand of 'and'/'or'");
              if (b.op == BinOp::And && !lhs) return false;
              if (b.op == BinOp::Or && lhs) return true;
              return as_bool(evaluate(*b.rhs, env, loc), loc, "operand of 'and'/'or'");
            }
            const Value lhs = evaluate(*b.lhs, env, loc);
            const Value rhs = evaluate(*b.rhs, env, loc);
            switch (b.op) {
              case BinOp::Add:
              case BinOp::Sub:
              case BinOp::Mul:
              case BinOp::Div: return arithmetic(b.op, lhs, rhs, loc);
              default: return compare(b.op, lhs, rhs, loc);
            }
          },
          [&](const Call& c) -> Value {
            if (c.name == "get_position" || c.name == "get_size") return perceive(c, env, loc);
            std::vector<Value> args;
            for (const auto& a : c.args) args.push_back(evaluate(*a, env, loc));
            auto arity = [&](std::size_t n) {
              if (args.size() != n) type_error(loc, c.name + " takes " + std::to_string(n) + " arguments");
            };
            if (c.name == "abs") {
              arity(1);
              return std::fabs(as_number(args[0], loc, "argument of abs"));
            }
            if (c.name == "min" || c.name == "max") {
              arity(2);
              const double a = as_number(args[0], loc, "argument of min/max");
              const double b = as_number(args[1], loc, "argument of min/max");
              return c.name == "min" ? std::min(a, b) : std::max(a, b);
            }
            if (c.name == "vec3") {
              arity(3);
              return Vec3{as_number(args[0], loc, "vec3 component"), as_number(args[1], loc, "vec3 component"),
                          as_number(args[2], loc, "vec3 component")};
            }
            throw RuntimeError(RuntimeError::Kind::UnknownIdentifier, loc, "unknown function " + c.name);
          },
          [&](const Field& f) -> Value {
            const Value base = evaluate(*f.base, env, loc);
            const auto* v = std::get_if<Vec3>(&base);
            if (v == nullptr) type_error(loc, std::string(".") + f.axis + " needs a vector, got " + value_type_name(base));
            return f.axis == 'x' ? v->x : f.axis == 'y' ? v->y : v->z;
          },
      },
      e.node);
}

SkillInvocation bind_arguments(const SkillCall& call, const Environment& env, const SkillCatalog& catalog,
                               std::size_t loc) {
  const SkillSignature* sig = catalog.find(call.name);
  if (sig == nullptr) throw RuntimeError(RuntimeError::Kind::UnknownIdentifier, loc, "unknown skill " + call.name);
  if (call.args.size() < sig->min_arity() || call.args.size() > sig->max_arity()) {
    type_error(loc, call.name + " expects " + sig->signature_text() + ", got " + std::to_string(call.args.size()) +
                        " arguments");
  }
  SkillInvocation out{call.name, {}};
  const Scene* scene = env.scene();
  for (std::size_t i = 0; i < call.args.size(); ++i) {
    const ParamSpec& p = sig->params[i];
    const Expr& arg = *call.args[i];
    if (p.type == ParamType::Number) {
      out.args.emplace_back(as_number(evaluate(arg, env, loc), loc, ("argument " + p.name).c_str()));
      continue;
    }
    const auto* var = std::get_if<Var>(&arg.node);
    if (var == nullptr) type_error(loc, "argument " + p.name + " must be a " + std::string(param_type_name(p.type)) + " name");
    const bool known = scene != nullptr && (p.type == ParamType::Object ? scene->has_object(var->name)
                                                                        : defined_events(*scene).count(var->name) > 0);
    if (!known) {
      throw RuntimeError(RuntimeError::Kind::UnknownIdentifier, loc,
                         "unknown " + std::string(param_type_name(p.type)) + " " + var->name);
    }
    out.args.emplace_back(var->name);
  }
  return out;
}

PlanResult run_plan(const Program& program, const Scene& scene, const Dispatcher& dispatch,
                    const SkillCatalog& catalog) {
  return Runner(program, scene, dispatch, catalog).run();
}

}  // namespace quadplan::dsl
