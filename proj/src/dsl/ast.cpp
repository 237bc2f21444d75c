// SPDX-License-Identifier: Apache-2.0
#include "quadplan/dsl/ast.hpp"

namespace quadplan::dsl {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool equal_args(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!equal(a[i], b[i])) return false;
  }
  return true;
}

void number(StmtList& list, std::size_t& next) {
  for (auto& s : list) {
    s.index = next++;
    if (auto* branch = std::get_if<If>(&s.node)) {
      for (auto& arm : branch->arms) number(arm.body, next);
      if (branch->else_body) number(*branch->else_body, next);
    }
  }
}

const Stmt* find_in(const StmtList& list, std::size_t index) {
  for (const auto& s : list) {
    if (s.index == index) return &s;
    if (const auto* branch = std::get_if<If>(&s.node)) {
      for (const auto& arm : branch->arms) {
        if (const Stmt* hit = find_in(arm.body, index)) return hit;
      }
      if (branch->else_body) {
        if (const Stmt* hit = find_in(*branch->else_body, index)) return hit;
      }
    }
  }
  return nullptr;
}

std::size_t count(const StmtList& list) {
  std::size_t n = 0;
  for (const auto& s : list) {
    ++n;
    if (const auto* branch = std::get_if<If>(&s.node)) {
      for (const auto& arm : branch->arms) n += count(arm.body);
      if (branch->else_body) n += count(*branch->else_body);
    }
  }
  return n;
}

}  // namespace

bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

bool equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      Overloaded{
          [&](const NumberLit& x) { return x.value == std::get<NumberLit>(b.node).value; },
          [&](const BoolLit& x) { return x.value == std::get<BoolLit>(b.node).value; },
          [&](const Var& x) { return x.name == std::get<Var>(b.node).name; },
          [&](const Unary& x) {
            const auto& y = std::get<Unary>(b.node);
            return x.op == y.op && equal(x.operand, y.operand);
          },
          [&](const Binary& x) {
            const auto& y = std::get<Binary>(b.node);
            return x.op == y.op && equal(x.lhs, y.lhs) && equal(x.rhs, y.rhs);
          },
          [&](const Call& x) {
            const auto& y = std::get<Call>(b.node);
            return x.name == y.name && equal_args(x.args, y.args);
          },
          [&](const Field& x) {
            const auto& y = std::get<Field>(b.node);
            return x.axis == y.axis && equal(x.base, y.base);
          },
      },
      a.node);
}

bool equal(const Stmt& a, const Stmt& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(Overloaded{
                        [&](const Let& x) {
                          const auto& y = std::get<Let>(b.node);
                          return x.name == y.name && equal(x.value, y.value);
                        },
                        [&](const If& x) {
                          const auto& y = std::get<If>(b.node);
                          if (x.arms.size() != y.arms.size()) return false;
                          for (std::size_t i = 0; i < x.arms.size(); ++i) {
                            if (!equal(x.arms[i].cond, y.arms[i].cond) || !equal(x.arms[i].body, y.arms[i].body)) {
                              return false;
                            }
                          }
                          if (x.else_body.has_value() != y.else_body.has_value()) return false;
                          return !x.else_body || equal(*x.else_body, *y.else_body);
                        },
                        [&](const SkillCall& x) {
                          const auto& y = std::get<SkillCall>(b.node);
                          return x.name == y.name && equal_args(x.args, y.args);
                        },
                        [&](const Fail& x) { return x.message == std::get<Fail>(b.node).message; },
                    },
                    a.node);
}

bool equal(const StmtList& a, const StmtList& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!equal(a[i], b[i])) return false;
  }
  return true;
}

bool equal(const Program& a, const Program& b) { return equal(a.statements, b.statements); }

std::size_t number_statements(Program& program) {
  std::size_t next = 0;
  number(program.statements, next);
  return next;
}

std::size_t count_statements(const Program& program) { return count(program.statements); }

const Stmt* find_statement(const Program& program, std::size_t index) { return find_in(program.statements, index); }

ExprPtr make_expr(decltype(Expr::node) node, SourcePos pos) {
  return std::make_shared<const Expr>(Expr{std::move(node), pos});
}

std::string_view binop_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::And: return "and";
    case BinOp::Or: return "or";
  }
  return "?";
}

}  // namespace quadplan::dsl
