#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tce/rational.hpp"

namespace tce {

enum class Variance { Upper, Lower };

inline Variance flip(Variance v) {
  return v == Variance::Upper ? Variance::Lower : Variance::Upper;
}

// One index slot. Whether the name is abstract or coordinate-valued is not
// stored here; the property registry decides that at the point of use.
struct Index {
  std::string name;
  Variance variance = Variance::Lower;

  friend bool operator==(const Index& a, const Index& b) {
    return a.name == b.name && a.variance == b.variance;
  }
};

enum class Kind {
  Rational,    // exact scalar, the only numeric leaf
  Symbol,      // named scalar or coordinate: x, r, \theta
  Wildcard,    // '#' in property patterns
  Tensor,      // head + index slots: F_{\mu\nu}
  Accent,      // modifier applied to an object: \delta{A_\mu}
  Derivative,  // head + indices + one operand: \partial_{\mu}{A_\nu}
  Function,    // sin/cos/log with one argument
  Power,       // children = {base, exponent}
  Product,     // flattened; a rational coefficient, if any, is children[0]
  Sum,         // flattened
  Integral,    // children = {integrand}, name = measure coordinate
  Equation,    // children = {lhs, rhs}
  RuleNode,    // children = {lhs, rhs}, written  lhs -> rhs
  List,        // {e, e, ...}: component rules and object lists
  Table,       // evaluated components spliced into an expression; name = head,
               // indices = slot pattern, children = entry equations
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable tree node. Factories below maintain the structural invariants
// (flattened sums/products, merged coefficients, folded rational powers);
// nothing mutates an Expr after construction, so subtrees share freely.
struct Expr {
  Kind kind;
  Rational value;               // Kind::Rational only
  std::string name;             // head name, or integral measure coordinate
  std::vector<Index> indices;   // Tensor/Derivative/Table slots
  std::vector<ExprPtr> children;
};

// --- factories ------------------------------------------------------------

ExprPtr make_rational(Rational v);
ExprPtr make_int(long v);
ExprPtr make_symbol(std::string name);
ExprPtr make_wildcard();
ExprPtr make_tensor(std::string name, std::vector<Index> indices);
ExprPtr make_accent(std::string name, ExprPtr operand);
ExprPtr make_derivative(std::string name, std::vector<Index> indices, ExprPtr operand);
ExprPtr make_function(std::string name, ExprPtr argument);
ExprPtr make_power(ExprPtr base, ExprPtr exponent);
ExprPtr make_product(std::vector<ExprPtr> factors);
ExprPtr make_sum(std::vector<ExprPtr> terms);
ExprPtr make_integral(ExprPtr integrand, std::string coordinate);
ExprPtr make_equation(ExprPtr lhs, ExprPtr rhs);
ExprPtr make_rule(ExprPtr lhs, ExprPtr rhs);
ExprPtr make_list(std::vector<ExprPtr> items);
ExprPtr make_table(std::string head, std::vector<Index> slots,
                   std::vector<ExprPtr> entries);

// Rebuild a node of the same kind with new children (indices/name preserved).
ExprPtr with_children(const ExprPtr& e, std::vector<ExprPtr> children);

// --- predicates & accessors ------------------------------------------------

inline bool is_rational(const ExprPtr& e) { return e->kind == Kind::Rational; }
inline bool is_zero(const ExprPtr& e) {
  return e->kind == Kind::Rational && rat_is_zero(e->value);
}
inline bool is_one(const ExprPtr& e) {
  return e->kind == Kind::Rational && rat_is_one(e->value);
}

inline const ExprPtr& lhs(const ExprPtr& e) { return e->children[0]; }
inline const ExprPtr& rhs(const ExprPtr& e) { return e->children[1]; }
inline const ExprPtr& integrand(const ExprPtr& e) { return e->children[0]; }

// Split a term into (rational coefficient, remaining factors).
// Plain atoms count as a one-factor term with coefficient 1.
struct TermParts {
  Rational coefficient;
  std::vector<ExprPtr> factors;
};
TermParts term_parts(const ExprPtr& term);
ExprPtr make_term(const Rational& coefficient, std::vector<ExprPtr> factors);

// Total deterministic order: kind rank, then name, then index sequence
// (name before variance, Upper < Lower), then children. This order drives
// sort_product and the canonicalisation minimum, so it must never change
// between runs.
int compare_expr(const ExprPtr& a, const ExprPtr& b);
inline bool structural_equal(const ExprPtr& a, const ExprPtr& b) {
  return compare_expr(a, b) == 0;
}

bool contains_symbol(const ExprPtr& e, const std::string& name);
bool contains_kind(const ExprPtr& e, Kind kind);

// All index occurrences in the node itself (not children).
inline const std::vector<Index>& own_indices(const ExprPtr& e) { return e->indices; }

}  // namespace tce
