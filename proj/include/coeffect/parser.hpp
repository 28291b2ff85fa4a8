#pragma once

#include <string>
#include <string_view>

#include "coeffect/ast.hpp"

namespace coeffect {

// program := classdecl* ";" seq
Program parse_program(std::string_view source);
// A bare expression sequence (no class declarations, no leading ";").
ExprPtr parse_expr(std::string_view source);
// A type such as `int`, `C` or `imm C`.
Type parse_type(std::string_view source);

std::string print_expr(const Expr& e);
std::string print_type(const Type& t);
std::string print_coeffect(const Coeffect& c);
std::string print_program(const Program& p);

}  // namespace coeffect
