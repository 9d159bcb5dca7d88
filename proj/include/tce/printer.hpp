#pragma once

#include <string>

#include "tce/expr.hpp"

namespace tce {

enum class PrintMode { Plain, Latex };

// Render an expression in the script syntax. Everything printed parses back:
// print -> parse -> print is a fixed point in both modes.
std::string print_expr(const ExprPtr& e, PrintMode mode);

// `\theta` in latex mode, `theta` in plain mode.
std::string print_name(const std::string& name, PrintMode mode);

}  // namespace tce
