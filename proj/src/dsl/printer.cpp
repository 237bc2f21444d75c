// SPDX-License-Identifier: Apache-2.0
#include "quadplan/dsl/printer.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace quadplan::dsl {

namespace {

enum Prec : int { kOr = 1, kAnd, kNot, kCmp, kAdd, kMul, kNeg, kPostfix, kPrimary };

int precedence(BinOp op) {
  switch (op) {
    case BinOp::Or: return kOr;
    case BinOp::And: return kAnd;
    case BinOp::Add:
    case BinOp::Sub: return kAdd;
    case BinOp::Mul:
    case BinOp::Div: return kMul;
    default: return kCmp;
  }
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string expr(const Expr& e, int min_prec);

std::string args_text(const std::vector<ExprPtr>& args) {
  std::string out = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0) out += ", ";
    out += expr(*args[i], kOr);
  }
  return out + ")";
}

std::string wrap(std::string text, int prec, int min_prec) {
  return prec < min_prec ? "(" + text + ")" : text;
}

std::string expr(const Expr& e, int min_prec) {
  return std::visit(
      Overloaded{
          [&](const NumberLit& n) {
            if (std::signbit(n.value)) return wrap("-" + format_number(-n.value), kNeg, min_prec);
            return format_number(n.value);
          },
          [&](const BoolLit& b) { return std::string(b.value ? "true" : "false"); },
          [&](const Var& v) { return v.name; },
          [&](const Unary& u) {
            if (u.op == UnOp::Neg) return wrap("-" + expr(*u.operand, kNeg), kNeg, min_prec);
            return wrap("not " + expr(*u.operand, kNot), kNot, min_prec);
          },
          [&](const Binary& b) {
            const int p = precedence(b.op);
            const int lhs_min = p == kCmp ? p + 1 : p;
            return wrap(expr(*b.lhs, lhs_min) + " " + std::string(binop_text(b.op)) + " " + expr(*b.rhs, p + 1), p,
                        min_prec);
          },
          [&](const Call& c) { return c.name + args_text(c.args); },
          [&](const Field& f) { return wrap(expr(*f.base, kPostfix) + "." + f.axis, kPostfix, min_prec); },
      },
      e.node);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out + "\"";
}

void statements(const StmtList& list, int indent, std::string& out) {
  for (const auto& s : list) out += print_statement(s, indent);
}

}  // namespace

std::string format_number(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("plan numbers must be finite");
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw std::invalid_argument("cannot format number");
  return {buf.data(), ptr};
}

std::string print_expression(const Expr& e) { return expr(e, kOr); }

std::string print_statement(const Stmt& stmt, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  std::string out;
  std::visit(Overloaded{
                 [&](const Let& l) { out = pad + "let " + l.name + " = " + print_expression(*l.value) + "\n"; },
                 [&](const If& b) {
                   for (std::size_t i = 0; i < b.arms.size(); ++i) {
                     out += i == 0 ? pad + "if " : "} elif ";
                     out += print_expression(*b.arms[i].cond) + " {\n";
                     statements(b.arms[i].body, indent + 1, out);
                     out += pad;
                   }
                   if (b.else_body) {
                     out += "} else {\n";
                     statements(*b.else_body, indent + 1, out);
                     out += pad;
                   }
                   out += "}\n";
                 },
                 [&](const SkillCall& c) { out = pad + c.name + args_text(c.args) + "\n"; },
                 [&](const Fail& f) { out = pad + "fail(" + quote(f.message) + ")\n"; },
             },
             stmt.node);
  return out;
}

std::string print_program(const Program& program) {
  std::string out;
  statements(program.statements, 0, out);
  return out;
}

}  // namespace quadplan::dsl
