// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace quadplan::dsl {

struct SourcePos {
  int line = 1;
  int col = 1;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class BinOp { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne, And, Or };
enum class UnOp { Neg, Not };

struct NumberLit {
  double value = 0.0;
};
struct BoolLit {
  bool value = false;
};
struct Var {
  std::string name;
};
struct Unary {
  UnOp op;
  ExprPtr operand;
};
struct Binary {
  BinOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
/// Builtin call inside an expression: min, max, abs, vec3, get_position, get_size.
struct Call {
  std::string name;
  std::vector<ExprPtr> args;
};
struct Field {
  ExprPtr base;
  char axis = 'x';
};

struct Expr {
  std::variant<NumberLit, BoolLit, Var, Unary, Binary, Call, Field> node;
  SourcePos pos;
};

struct Stmt;
using StmtList = std::vector<Stmt>;

struct Let {
  std::string name;
  ExprPtr value;
};
struct IfArm {
  ExprPtr cond;
  StmtList body;
};
/// arms[0] is the `if`, the rest are `elif`s.
struct If {
  std::vector<IfArm> arms;
  std::optional<StmtList> else_body;
};
struct SkillCall {
  std::string name;
  std::vector<ExprPtr> args;
};
struct Fail {
  std::string message;
};

struct Stmt {
  std::variant<Let, If, SkillCall, Fail> node;
  SourcePos pos;
  /// Pre-order position in the program, used as the fault location.
  std::size_t index = 0;
};

struct Program {
  StmtList statements;
};

// Structural equality ignores source positions.
bool equal(const Expr& a, const Expr& b);
bool equal(const ExprPtr& a, const ExprPtr& b);
bool equal(const Stmt& a, const Stmt& b);
bool equal(const StmtList& a, const StmtList& b);
bool equal(const Program& a, const Program& b);

/// Re-numbers statements in pre-order; returns the count.
std::size_t number_statements(Program& program);
std::size_t count_statements(const Program& program);

/// Finds a statement by its pre-order index.
const Stmt* find_statement(const Program& program, std::size_t index);

ExprPtr make_expr(decltype(Expr::node) node, SourcePos pos = {});

std::string_view binop_text(BinOp op);

}  // namespace quadplan::dsl
