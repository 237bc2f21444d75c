// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "quadplan/dsl/ast.hpp"

namespace quadplan::dsl {

/// Canonical source text. parse_program(print_program(p)) equals p.
std::string print_program(const Program& program);
std::string print_statement(const Stmt& stmt, int indent = 0);
std::string print_expression(const Expr& expr);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

}  // namespace quadplan::dsl
