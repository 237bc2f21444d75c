// SPDX-License-Identifier: Apache-2.0
#include "quadplan/dsl/parser.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <optional>
#include <vector>

namespace quadplan::dsl {

namespace {

enum class Tok {
  Number,
  Ident,
  String,
  Keyword,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Semi,
  Dot,
  Plus,
  Minus,
  Star,
  Slash,
  Lt,
  Le,
  Gt,
  Ge,
  EqEq,
  Ne,
  Assign,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  SourcePos pos;
};

constexpr std::array<std::string_view, 10> kKeywords{"let", "if", "elif", "else", "fail",
                                                     "and", "or",  "not",  "true", "false"};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::String: return "string";
    case Tok::Number: return "number '" + t.text + "'";
    case Tok::Ident: return "identifier '" + t.text + "'";
    default: return "'" + t.text + "'";
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      const SourcePos pos{line_, col_};
      if (i_ >= src_.size()) {
        out.push_back({Tok::End, "", 0.0, pos});
        return out;
      }
      const char c = src_[i_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        out.push_back(number(pos));
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string word;
        while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) {
          word += take();
        }
        const bool kw = is_keyword(word);
        out.push_back({kw ? Tok::Keyword : Tok::Ident, word, 0.0, pos});
      } else if (c == '"') {
        out.push_back(string(pos));
      } else {
        out.push_back(punct(pos));
      }
    }
  }

 private:
  char take() {
    const char c = src_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  [[nodiscard]] char peek(std::size_t ahead = 0) const {
    return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0';
  }

  void skip_space() {
    while (i_ < src_.size()) {
      const char c = src_[i_];
      if (c == '#') {
        while (i_ < src_.size() && src_[i_] != '\n') take();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        take();
      } else {
        break;
      }
    }
  }

  Token number(SourcePos pos) {
    std::string text;
    auto digits = [&] {
      while (std::isdigit(static_cast<unsigned char>(peek()))) text += take();
    };
    digits();
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      text += take();
      digits();
    }
    if (peek() == 'e' || peek() == 'E') {
      const char sign = peek(1);
      const bool has_sign = sign == '+' || sign == '-';
      if (std::isdigit(static_cast<unsigned char>(peek(has_sign ? 2 : 1)))) {
        text += take();
        if (has_sign) text += take();
        digits();
      }
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw SyntaxError(pos.line, pos.col, "finite number", "'" + text + "'");
    }
    return {Tok::Number, text, value, pos};
  }

  Token string(SourcePos pos) {
    take();
    std::string value;
    for (;;) {
      if (i_ >= src_.size() || peek() == '\n') throw SyntaxError(line_, col_, "closing '\"'", "end of line");
      const char c = take();
      if (c == '"') break;
      if (c == '\\') {
        if (i_ >= src_.size()) throw SyntaxError(line_, col_, "escape sequence", "end of input");
        const char e = take();
        if (e == 'n') {
          value += '\n';
        } else if (e == '"' || e == '\\') {
          value += e;
        } else {
          throw SyntaxError(line_, col_ - 1, "escape \\n, \\\" or \\\\", std::string("'\\") + e + "'");
        }
      } else {
        value += c;
      }
    }
    return {Tok::String, value, 0.0, pos};
  }

  Token punct(SourcePos pos) {
    const char c = take();
    auto two = [&](char next, Tok yes, Tok no, std::string yes_text) -> Token {
      if (peek() == next) {
        take();
        return {yes, std::move(yes_text), 0.0, pos};
      }
      return {no, std::string(1, c), 0.0, pos};
    };
    switch (c) {
      case '(': return {Tok::LParen, "(", 0.0, pos};
      case ')': return {Tok::RParen, ")", 0.0, pos};
      case '{': return {Tok::LBrace, "{", 0.0, pos};
      case '}': return {Tok::RBrace, "}", 0.0, pos};
      case ',': return {Tok::Comma, ",", 0.0, pos};
      case ';': return {Tok::Semi, ";", 0.0, pos};
      case '.': return {Tok::Dot, ".", 0.0, pos};
      case '+': return {Tok::Plus, "+", 0.0, pos};
      case '-': return {Tok::Minus, "-", 0.0, pos};
      case '*': return {Tok::Star, "*", 0.0, pos};
      case '/': return {Tok::Slash, "/", 0.0, pos};
      case '<': return two('=', Tok::Le, Tok::Lt, "<=");
      case '>': return two('=', Tok::Ge, Tok::Gt, ">=");
      case '=': return two('=', Tok::EqEq, Tok::Assign, "==");
      case '!':
        if (peek() == '=') {
          take();
          return {Tok::Ne, "!=", 0.0, pos};
        }
        break;
      default: break;
    }
    throw SyntaxError(pos.line, pos.col, "token", std::string("'") + c + "'");
  }

  std::string_view src_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Program program() {
    Program p;
    while (cur().kind != Tok::End) p.statements.push_back(statement());
    number_statements(p);
    return p;
  }

  ExprPtr lone_expression() {
    ExprPtr e = expression();
    expect(Tok::End, "end of input");
    return e;
  }

 private:
  [[nodiscard]] const Token& cur() const { return toks_[pos_]; }
  const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  [[nodiscard]] bool at_keyword(std::string_view kw) const {
    return cur().kind == Tok::Keyword && cur().text == kw;
  }
  [[noreturn]] void fail_here(const std::string& expected) const {
    throw SyntaxError(cur().pos.line, cur().pos.col, expected, describe(cur()));
  }
  const Token& expect(Tok kind, const std::string& expected) {
    if (cur().kind != kind) fail_here(expected);
    return advance();
  }
  void expect_keyword(std::string_view kw) {
    if (!at_keyword(kw)) fail_here("'" + std::string(kw) + "'");
    advance();
  }
  void optional_semi() {
    if (cur().kind == Tok::Semi) advance();
  }

  Stmt statement() {
    const SourcePos pos = cur().pos;
    if (at_keyword("let")) {
      advance();
      const std::string name = expect(Tok::Ident, "variable name").text;
      expect(Tok::Assign, "'='");
      ExprPtr value = expression();
      optional_semi();
      return {Let{name, std::move(value)}, pos};
    }
    if (at_keyword("if")) {
      advance();
      If branch;
      ExprPtr cond = expression();
      branch.arms.push_back({std::move(cond), block()});
      while (at_keyword("elif")) {
        advance();
        ExprPtr c = expression();
        branch.arms.push_back({std::move(c), block()});
      }
      if (at_keyword("else")) {
        advance();
        branch.else_body = block();
      }
      return {std::move(branch), pos};
    }
    if (at_keyword("fail")) {
      advance();
      expect(Tok::LParen, "'('");
      const std::string msg = expect(Tok::String, "message string").text;
      expect(Tok::RParen, "')'");
      optional_semi();
      return {Fail{msg}, pos};
    }
    if (cur().kind == Tok::Ident) {
      const std::string name = advance().text;
      if (cur().kind != Tok::LParen) fail_here("'(' after skill name");
      std::vector<ExprPtr> args = arguments();
      optional_semi();
      return {SkillCall{name, std::move(args)}, pos};
    }
    fail_here("statement");
  }

  StmtList block() {
    expect(Tok::LBrace, "'{'");
    StmtList body;
    while (cur().kind != Tok::RBrace) {
      if (cur().kind == Tok::End) fail_here("'}'");
      body.push_back(statement());
    }
    advance();
    return body;
  }

  std::vector<ExprPtr> arguments() {
    expect(Tok::LParen, "'('");
    std::vector<ExprPtr> args;
    if (cur().kind != Tok::RParen) {
      args.push_back(expression());
      while (cur().kind == Tok::Comma) {
        advance();
        args.push_back(expression());
      }
    }
    expect(Tok::RParen, "',' or ')'");
    return args;
  }

  ExprPtr expression() { return or_expr(); }

  ExprPtr or_expr() {
    ExprPtr lhs = and_expr();
    while (at_keyword("or")) {
      const SourcePos pos = advance().pos;
      lhs = make_expr(Binary{BinOp::Or, lhs, and_expr()}, pos);
    }
    return lhs;
  }

  ExprPtr and_expr() {
    ExprPtr lhs = not_expr();
    while (at_keyword("and")) {
      const SourcePos pos = advance().pos;
      lhs = make_expr(Binary{BinOp::And, lhs, not_expr()}, pos);
    }
    return lhs;
  }

  ExprPtr not_expr() {
    if (at_keyword("not")) {
      const SourcePos pos = advance().pos;
      return make_expr(Unary{UnOp::Not, not_expr()}, pos);
    }
    return comparison();
  }

  static std::optional<BinOp> comparison_op(Tok t) {
    switch (t) {
      case Tok::Lt: return BinOp::Lt;
      case Tok::Le: return BinOp::Le;
      case Tok::Gt: return BinOp::Gt;
      case Tok::Ge: return BinOp::Ge;
      case Tok::EqEq: return BinOp::Eq;
      case Tok::Ne: return BinOp::Ne;
      default: return std::nullopt;
    }
  }

  ExprPtr comparison() {
    ExprPtr lhs = additive();
    if (const auto op = comparison_op(cur().kind)) {
      const SourcePos pos = advance().pos;
      lhs = make_expr(Binary{*op, lhs, additive()}, pos);
      if (comparison_op(cur().kind)) fail_here("end of comparison (comparisons do not chain)");
    }
    return lhs;
  }

  ExprPtr additive() {
    ExprPtr lhs = multiplicative();
    while (cur().kind == Tok::Plus || cur().kind == Tok::Minus) {
      const BinOp op = cur().kind == Tok::Plus ? BinOp::Add : BinOp::Sub;
      const SourcePos pos = advance().pos;
      lhs = make_expr(Binary{op, lhs, multiplicative()}, pos);
    }
    return lhs;
  }

  ExprPtr multiplicative() {
    ExprPtr lhs = unary();
    while (cur().kind == Tok::Star || cur().kind == Tok::Slash) {
      const BinOp op = cur().kind == Tok::Star ? BinOp::Mul : BinOp::Div;
      const SourcePos pos = advance().pos;
      lhs = make_expr(Binary{op, lhs, unary()}, pos);
    }
    return lhs;
  }

  ExprPtr unary() {
    if (cur().kind == Tok::Minus) {
      const SourcePos pos = advance().pos;
      return make_expr(Unary{UnOp::Neg, unary()}, pos);
    }
    return postfix();
  }

  ExprPtr postfix() {
    ExprPtr base = primary();
    while (cur().kind == Tok::Dot) {
      const SourcePos pos = advance().pos;
      const Token& field = cur();
      if (field.kind != Tok::Ident || (field.text != "x" && field.text != "y" && field.text != "z")) {
        fail_here("component x, y or z");
      }
      advance();
      base = make_expr(Field{base, field.text[0]}, pos);
    }
    return base;
  }

  ExprPtr primary() {
    const Token& t = cur();
    switch (t.kind) {
      case Tok::Number: {
        const double v = t.number;
        return make_expr(NumberLit{v}, advance().pos);
      }
      case Tok::Keyword:
        if (t.text == "true" || t.text == "false") {
          const bool v = t.text == "true";
          return make_expr(BoolLit{v}, advance().pos);
        }
        break;
      case Tok::Ident: {
        const SourcePos pos = t.pos;
        const std::string name = advance().text;
        if (cur().kind == Tok::LParen) return make_expr(Call{name, arguments()}, pos);
        return make_expr(Var{name}, pos);
      }
      case Tok::LParen: {
        advance();
        ExprPtr inner = expression();
        expect(Tok::RParen, "')'");
        return inner;
      }
      default: break;
    }
    fail_here("expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

SyntaxError::SyntaxError(int line, int col, std::string expected, const std::string& found)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(col) + ": expected " +
                         expected + ", found " + found),
      line_(line),
      col_(col),
      expected_(std::move(expected)) {}

bool is_keyword(std::string_view word) {
  for (const auto kw : kKeywords) {
    if (kw == word) return true;
  }
  return false;
}

Program parse_program(std::string_view source) { return Parser(Lexer(source).run()).program(); }

ExprPtr parse_expression(std::string_view source) { return Parser(Lexer(source).run()).lone_expression(); }

}  // namespace quadplan::dsl
