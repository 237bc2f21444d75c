// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "quadplan/dsl/ast.hpp"

namespace quadplan::dsl {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(int line, int col, std::string expected, const std::string& found);

  [[nodiscard]] int line() const { return line_; }
  [[nodiscard]] int col() const { return col_; }
  [[nodiscard]] const std::string& expected() const { return expected_; }

 private:
  int line_;
  int col_;
  std::string expected_;
};

/// Parses plan source. Statements are numbered in pre-order.
Program parse_program(std::string_view source);

/// Parses a single expression (the whole input must be consumed).
ExprPtr parse_expression(std::string_view source);

bool is_keyword(std::string_view word);

}  // namespace quadplan::dsl
