#pragma once

#include <map>
#include <string>

#include "tce/expr.hpp"
#include "tce/properties.hpp"

namespace tce {

// True if the expression is built purely from rationals, symbols, scalar
// functions, powers, products and sums (no indexed objects, no integrals).
bool is_scalar(const ExprPtr& e);

// Normal form for scalar expressions: powers of equal bases merged, factors
// and sum terms sorted, like terms combined, exact rational arithmetic.
ExprPtr simplify(const ExprPtr& e);

// Partial derivative of a scalar expression with respect to a symbol.
ExprPtr diff(const ExprPtr& e, const std::string& var);

// Antiderivative for sums of terms c*x^n (including n = -1 -> log x) and
// constants; anything else reports an unsupported integral.
ExprPtr integrate_basic(const ExprPtr& e, const std::string& var);

// Reduce sin^2(u) + cos^2(u) pairs with a common cofactor to the cofactor.
// Idempotent; returns expressions in simplify() normal form.
ExprPtr trig_normalize(const ExprPtr& e);

// Named scalar operations: "integrate" (an integral node, or a scalar with a
// unique symbol), "expand_trig" (trig_normalize), "simplify".
ExprPtr scalar_call(const std::string& fn, const ExprPtr& e);

// Numeric evaluation with an environment of symbol values.
double eval_double(const ExprPtr& e, const std::map<std::string, double>& env);

}  // namespace tce
