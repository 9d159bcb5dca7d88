#include "tce/expr.hpp"

#include <algorithm>

#include "tce/error.hpp"

namespace tce {

namespace {

ExprPtr node(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

const ExprPtr& cached_zero() {
  static const ExprPtr z = node({Kind::Rational, Rational(0), "", {}, {}});
  return z;
}
const ExprPtr& cached_one() {
  static const ExprPtr o = node({Kind::Rational, Rational(1), "", {}, {}});
  return o;
}

}  // namespace

ExprPtr make_rational(Rational v) {
  v.canonicalize();
  if (rat_is_zero(v)) return cached_zero();
  if (rat_is_one(v)) return cached_one();
  return node({Kind::Rational, std::move(v), "", {}, {}});
}

ExprPtr make_int(long v) { return make_rational(Rational(v)); }

ExprPtr make_symbol(std::string name) {
  return node({Kind::Symbol, Rational(0), std::move(name), {}, {}});
}

ExprPtr make_wildcard() {
  static const ExprPtr w = node({Kind::Wildcard, Rational(0), "#", {}, {}});
  return w;
}

ExprPtr make_tensor(std::string name, std::vector<Index> indices) {
  return node({Kind::Tensor, Rational(0), std::move(name), std::move(indices), {}});
}

ExprPtr make_accent(std::string name, ExprPtr operand) {
  return node({Kind::Accent, Rational(0), std::move(name), {}, {std::move(operand)}});
}

ExprPtr make_derivative(std::string name, std::vector<Index> indices, ExprPtr operand) {
  return node({Kind::Derivative, Rational(0), std::move(name), std::move(indices),
               {std::move(operand)}});
}

ExprPtr make_function(std::string name, ExprPtr argument) {
  return node({Kind::Function, Rational(0), std::move(name), {}, {std::move(argument)}});
}

ExprPtr make_power(ExprPtr base, ExprPtr exponent) {
  // x^0 = 1 and x^1 = x at generic points; exact rational^integer folds.
  if (exponent->kind == Kind::Rational) {
    if (rat_is_zero(exponent->value)) return cached_one();
    if (rat_is_one(exponent->value)) return base;
    if (base->kind == Kind::Rational && rat_is_integer(exponent->value))
      return make_rational(rat_pow(base->value, exponent->value.get_num().get_si()));
    // (b^a)^c = b^(a c) when both exponents are rational.
    if (base->kind == Kind::Power && base->children[1]->kind == Kind::Rational)
      return make_power(base->children[0],
                        make_rational(base->children[1]->value * exponent->value));
    // (x y)^n distributes for integer n; keeps powers-of-products out of the
    // tree so the printer's grouped form round-trips.
    if (base->kind == Kind::Product && rat_is_integer(exponent->value)) {
      std::vector<ExprPtr> factors;
      factors.reserve(base->children.size());
      for (const auto& f : base->children) factors.push_back(make_power(f, exponent));
      return make_product(std::move(factors));
    }
  }
  return node({Kind::Power, Rational(0), "", {}, {std::move(base), std::move(exponent)}});
}

ExprPtr make_product(std::vector<ExprPtr> factors) {
  Rational coeff(1);
  std::vector<ExprPtr> flat;
  flat.reserve(factors.size());
  for (auto& f : factors) {
    if (f->kind == Kind::Rational) {
      coeff *= f->value;
    } else if (f->kind == Kind::Product) {
      for (const auto& g : f->children) {
        if (g->kind == Kind::Rational)
          coeff *= g->value;
        else
          flat.push_back(g);
      }
    } else {
      flat.push_back(std::move(f));
    }
  }
  coeff.canonicalize();
  if (rat_is_zero(coeff)) return cached_zero();
  if (flat.empty()) return make_rational(coeff);
  if (rat_is_one(coeff)) {
    if (flat.size() == 1) return flat[0];
    return node({Kind::Product, Rational(0), "", {}, std::move(flat)});
  }
  std::vector<ExprPtr> children;
  children.reserve(flat.size() + 1);
  children.push_back(make_rational(coeff));
  children.insert(children.end(), flat.begin(), flat.end());
  return node({Kind::Product, Rational(0), "", {}, std::move(children)});
}

ExprPtr make_sum(std::vector<ExprPtr> terms) {
  std::vector<ExprPtr> flat;
  flat.reserve(terms.size());
  for (auto& t : terms) {
    if (t->kind == Kind::Sum)
      flat.insert(flat.end(), t->children.begin(), t->children.end());
    else if (!is_zero(t))
      flat.push_back(std::move(t));
  }
  if (flat.empty()) return cached_zero();
  if (flat.size() == 1) return flat[0];
  return node({Kind::Sum, Rational(0), "", {}, std::move(flat)});
}

ExprPtr make_integral(ExprPtr integrand, std::string coordinate) {
  return node({Kind::Integral, Rational(0), std::move(coordinate), {},
               {std::move(integrand)}});
}

ExprPtr make_equation(ExprPtr l, ExprPtr r) {
  return node({Kind::Equation, Rational(0), "", {}, {std::move(l), std::move(r)}});
}

ExprPtr make_rule(ExprPtr l, ExprPtr r) {
  return node({Kind::RuleNode, Rational(0), "", {}, {std::move(l), std::move(r)}});
}

ExprPtr make_list(std::vector<ExprPtr> items) {
  return node({Kind::List, Rational(0), "", {}, std::move(items)});
}

ExprPtr make_table(std::string head, std::vector<Index> slots,
                   std::vector<ExprPtr> entries) {
  return node({Kind::Table, Rational(0), std::move(head), std::move(slots),
               std::move(entries)});
}

ExprPtr with_children(const ExprPtr& e, std::vector<ExprPtr> children) {
  switch (e->kind) {
    case Kind::Power:    return make_power(children[0], children[1]);
    case Kind::Product:  return make_product(std::move(children));
    case Kind::Sum:      return make_sum(std::move(children));
    case Kind::Integral: return make_integral(children[0], e->name);
    case Kind::Equation: return make_equation(children[0], children[1]);
    case Kind::RuleNode: return make_rule(children[0], children[1]);
    case Kind::List:     return make_list(std::move(children));
    case Kind::Accent:   return make_accent(e->name, children[0]);
    case Kind::Derivative:
      return make_derivative(e->name, e->indices, children[0]);
    case Kind::Function: return make_function(e->name, children[0]);
    case Kind::Table:    return make_table(e->name, e->indices, std::move(children));
    default:             return e;  // leaves have no children
  }
}

TermParts term_parts(const ExprPtr& term) {
  if (term->kind == Kind::Rational) return {term->value, {}};
  if (term->kind != Kind::Product) return {Rational(1), {term}};
  TermParts parts{Rational(1), {}};
  for (const auto& c : term->children) {
    if (c->kind == Kind::Rational)
      parts.coefficient *= c->value;
    else
      parts.factors.push_back(c);
  }
  return parts;
}

ExprPtr make_term(const Rational& coefficient, std::vector<ExprPtr> factors) {
  factors.insert(factors.begin(), make_rational(coefficient));
  return make_product(std::move(factors));
}

namespace {

int kind_rank(Kind k) {
  switch (k) {
    case Kind::Rational:   return 0;
    case Kind::Symbol:     return 1;
    case Kind::Function:   return 2;
    case Kind::Power:      return 3;
    case Kind::Tensor:     return 4;
    case Kind::Accent:     return 5;
    case Kind::Derivative: return 6;
    case Kind::Table:      return 7;
    case Kind::Integral:   return 8;
    case Kind::Sum:        return 9;
    case Kind::Product:    return 10;
    case Kind::Equation:   return 11;
    case Kind::RuleNode:   return 12;
    case Kind::List:       return 13;
    case Kind::Wildcard:   return 14;
  }
  return 15;
}

int cmp3(int a, int b) { return a < b ? -1 : (a > b ? 1 : 0); }

}  // namespace

int compare_expr(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return 0;
  if (int c = cmp3(kind_rank(a->kind), kind_rank(b->kind))) return c;
  if (a->kind == Kind::Rational) {
    int c = cmp(a->value, b->value);
    return cmp3(c > 0 ? 1 : (c < 0 ? -1 : 0), 0);
  }
  if (int c = a->name.compare(b->name)) return c < 0 ? -1 : 1;
  if (int c = cmp3(static_cast<int>(a->indices.size()),
                   static_cast<int>(b->indices.size())))
    return c;
  for (size_t i = 0; i < a->indices.size(); ++i) {
    if (int c = a->indices[i].name.compare(b->indices[i].name)) return c < 0 ? -1 : 1;
    if (a->indices[i].variance != b->indices[i].variance)
      return a->indices[i].variance == Variance::Upper ? -1 : 1;
  }
  if (int c = cmp3(static_cast<int>(a->children.size()),
                   static_cast<int>(b->children.size())))
    return c;
  for (size_t i = 0; i < a->children.size(); ++i)
    if (int c = compare_expr(a->children[i], b->children[i])) return c;
  return 0;
}

bool contains_symbol(const ExprPtr& e, const std::string& name) {
  if (e->kind == Kind::Symbol && e->name == name) return true;
  for (const auto& c : e->children)
    if (contains_symbol(c, name)) return true;
  return false;
}

bool contains_kind(const ExprPtr& e, Kind kind) {
  if (e->kind == kind) return true;
  for (const auto& c : e->children)
    if (contains_kind(c, kind)) return true;
  return false;
}

}  // namespace tce
