#pragma once

#include <string>
#include <string_view>

#include "collapse/ast.hpp"

namespace collapse {

/// Parses, scope-checks and type-checks a kernel module. Throws ParseError with
/// the line/column of the first problem; never returns a partial module.
KernelModule parse_module(std::string_view source);

/// Reads a `.spk` file and parses it.
KernelModule parse_module_file(const std::string& path);

/// Canonical source form; parse_module(pretty_print(m)) is structurally equal to m.
std::string pretty_print(const KernelModule& module);

std::string print_expr(const Expr& expr);
std::string print_expr(const ExprPtr& expr);

}  // namespace collapse
