#include "tce/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <utility>
#include <vector>

#include "tce/error.hpp"

namespace tce {

namespace {

// ---------------------------------------------------------------------------
// simplify
// ---------------------------------------------------------------------------

// Split a factor into (base, exponent); non-power factors have exponent 1.
std::pair<ExprPtr, Rational> base_exponent(const ExprPtr& f) {
  if (f->kind == Kind::Power && f->children[1]->kind == Kind::Rational)
    return {f->children[0], f->children[1]->value};
  return {f, Rational(1)};
}

ExprPtr simplify_node(const ExprPtr& e);

// Cartesian expansion of a product whose factors include sums; the caller
// re-simplifies the resulting sum so cross-term cancellations surface.
ExprPtr expand_product(const std::vector<ExprPtr>& factors) {
  std::vector<std::vector<ExprPtr>> partials{{}};
  for (const auto& f : factors) {
    if (f->kind == Kind::Sum) {
      std::vector<std::vector<ExprPtr>> next;
      next.reserve(partials.size() * f->children.size());
      for (const auto& p : partials)
        for (const auto& t : f->children) {
          next.push_back(p);
          next.back().push_back(t);
        }
      partials = std::move(next);
    } else {
      for (auto& p : partials) p.push_back(f);
    }
  }
  std::vector<ExprPtr> terms;
  terms.reserve(partials.size());
  for (auto& p : partials) terms.push_back(simplify_node(make_product(std::move(p))));
  return simplify_node(make_sum(std::move(terms)));
}

ExprPtr simplify_product(std::vector<ExprPtr> factors) {
  // Merge powers of equal bases, keeping exact track of the coefficient.
  Rational coeff(1);
  std::vector<ExprPtr> bases;
  std::vector<Rational> exps;
  for (const auto& f : factors) {
    if (f->kind == Kind::Rational) {
      coeff *= f->value;
      continue;
    }
    auto [base, exp] = base_exponent(f);
    bool found = false;
    for (std::size_t i = 0; i < bases.size(); ++i) {
      if (structural_equal(bases[i], base)) {
        exps[i] += exp;
        found = true;
        break;
      }
    }
    if (!found) {
      bases.push_back(base);
      exps.push_back(exp);
    }
  }
  if (rat_is_zero(coeff)) return make_rational(Rational(0));
  std::vector<ExprPtr> out;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    if (rat_is_zero(exps[i])) continue;
    out.push_back(make_power(bases[i], make_rational(exps[i])));
  }
  std::stable_sort(out.begin(), out.end(), [](const ExprPtr& a, const ExprPtr& b) {
    return compare_expr(a, b) < 0;
  });
  if (!rat_is_one(coeff) || out.empty())
    out.insert(out.begin(), make_rational(coeff));
  return make_product(std::move(out));
}

ExprPtr simplify_sum(const std::vector<ExprPtr>& terms) {
  std::vector<ExprPtr> keys;
  std::vector<Rational> coeffs;
  for (const auto& t : terms) {
    TermParts tp = term_parts(t);
    ExprPtr key = make_term(Rational(1), tp.factors);
    bool found = false;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (structural_equal(keys[i], key)) {
        coeffs[i] += tp.coefficient;
        found = true;
        break;
      }
    }
    if (!found) {
      keys.push_back(key);
      coeffs.push_back(tp.coefficient);
    }
  }
  std::vector<ExprPtr> out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (rat_is_zero(coeffs[i])) continue;
    TermParts tp = term_parts(keys[i]);
    out.push_back(make_term(coeffs[i], tp.factors));
  }
  std::stable_sort(out.begin(), out.end(), [](const ExprPtr& a, const ExprPtr& b) {
    return compare_expr(a, b) < 0;
  });
  return make_sum(std::move(out));
}

ExprPtr simplify_node(const ExprPtr& e) {
  switch (e->kind) {
    case Kind::Rational:
    case Kind::Symbol:
    case Kind::Wildcard:
    case Kind::Tensor:
      return e;
    case Kind::Power: {
      ExprPtr base = simplify_node(e->children[0]);
      ExprPtr exp = simplify_node(e->children[1]);
      // (b^m)^n with rational m, n merges to b^(m n).
      if (base->kind == Kind::Power && exp->kind == Kind::Rational &&
          base->children[1]->kind == Kind::Rational) {
        Rational merged = base->children[1]->value * exp->value;
        return make_power(base->children[0], make_rational(merged));
      }
      if (base->kind == Kind::Product && exp->kind == Kind::Rational &&
          rat_is_integer(exp->value))
        return simplify_node(make_power(base, exp));
      // Small positive integer powers of sums expand to polynomials; larger
      // exponents keep the power form (still a valid normal form, the sum
      // base itself is normalised so equal bases cancel by exponent).
      if (base->kind == Kind::Sum && exp->kind == Kind::Rational &&
          rat_is_integer(exp->value) && exp->value > 0 && exp->value <= 32) {
        std::vector<ExprPtr> copies(
            static_cast<std::size_t>(exp->value.get_num().get_si()), base);
        return expand_product(copies);
      }
      return make_power(base, exp);
    }
    case Kind::Product: {
      std::vector<ExprPtr> ch;
      ch.reserve(e->children.size());
      for (const auto& c : e->children) ch.push_back(simplify_node(c));
      ExprPtr flat = make_product(std::move(ch));
      if (flat->kind != Kind::Product) {
        if (flat->kind == Kind::Power || flat->kind == Kind::Sum)
          return simplify_node(flat);
        return flat;
      }
      for (const auto& f : flat->children)
        if (f->kind == Kind::Sum) return expand_product(flat->children);
      return simplify_product(flat->children);
    }
    case Kind::Sum: {
      std::vector<ExprPtr> ch;
      ch.reserve(e->children.size());
      for (const auto& c : e->children) ch.push_back(simplify_node(c));
      ExprPtr flat = make_sum(std::move(ch));
      if (flat->kind != Kind::Sum) return flat;
      return simplify_sum(flat->children);
    }
    default: {
      std::vector<ExprPtr> ch;
      ch.reserve(e->children.size());
      bool changed = false;
      for (const auto& c : e->children) {
        ExprPtr n = simplify_node(c);
        if (n.get() != c.get()) changed = true;
        ch.push_back(std::move(n));
      }
      if (!changed) return e;
      return with_children(e, std::move(ch));
    }
  }
}

// ---------------------------------------------------------------------------
// diff
// ---------------------------------------------------------------------------

ExprPtr diff_node(const ExprPtr& e, const std::string& var) {
  switch (e->kind) {
    case Kind::Rational:
      return make_rational(Rational(0));
    case Kind::Symbol:
      return make_rational(Rational(e->name == var ? 1 : 0));
    case Kind::Sum: {
      std::vector<ExprPtr> terms;
      terms.reserve(e->children.size());
      for (const auto& t : e->children) terms.push_back(diff_node(t, var));
      return make_sum(std::move(terms));
    }
    case Kind::Product: {
      std::vector<ExprPtr> terms;
      for (std::size_t i = 0; i < e->children.size(); ++i) {
        ExprPtr di = diff_node(e->children[i], var);
        if (is_zero(di)) continue;
        std::vector<ExprPtr> factors = e->children;
        factors[i] = di;
        terms.push_back(make_product(std::move(factors)));
      }
      return make_sum(std::move(terms));
    }
    case Kind::Power: {
      const ExprPtr& base = e->children[0];
      const ExprPtr& exp = e->children[1];
      if (exp->kind != Kind::Rational)
        throw EngineError(ErrorKind::NotScalar,
                          "cannot differentiate a power with non-rational exponent");
      ExprPtr db = diff_node(base, var);
      if (is_zero(db)) return db;
      Rational n = exp->value;
      return make_product({make_rational(n),
                           make_power(base, make_rational(Rational(n - 1))), db});
    }
    case Kind::Function: {
      ExprPtr da = diff_node(e->children[0], var);
      if (is_zero(da)) return da;
      ExprPtr outer;
      if (e->name == "sin") {
        outer = make_function("cos", e->children[0]);
      } else if (e->name == "cos") {
        outer = make_product({make_rational(Rational(-1)),
                              make_function("sin", e->children[0])});
      } else if (e->name == "log") {
        outer = make_power(e->children[0], make_rational(Rational(-1)));
      } else {
        throw EngineError(ErrorKind::UnknownFunction,
                          "cannot differentiate function: " + e->name);
      }
      return make_product({outer, da});
    }
    default:
      throw EngineError(ErrorKind::NotScalar,
                        "cannot differentiate a non-scalar expression");
  }
}

// ---------------------------------------------------------------------------
// integrate_basic
// ---------------------------------------------------------------------------

ExprPtr integrate_term(const ExprPtr& t, const std::string& var) {
  TermParts tp = term_parts(t);
  std::vector<ExprPtr> constant;
  std::vector<ExprPtr> dependent;
  for (const auto& f : tp.factors) {
    if (contains_symbol(f, var))
      dependent.push_back(f);
    else
      constant.push_back(f);
  }
  if (dependent.empty()) {
    constant.push_back(make_symbol(var));
    return make_term(tp.coefficient, constant);
  }
  if (dependent.size() > 1)
    throw EngineError(ErrorKind::UnsupportedIntegral,
                      "unsupported integrand");
  const ExprPtr& f = dependent[0];
  Rational n;
  ExprPtr base;
  if (f->kind == Kind::Symbol) {
    base = f;
    n = Rational(1);
  } else if (f->kind == Kind::Power && f->children[0]->kind == Kind::Symbol &&
             f->children[0]->name == var &&
             f->children[1]->kind == Kind::Rational) {
    base = f->children[0];
    n = f->children[1]->value;
  } else {
    throw EngineError(ErrorKind::UnsupportedIntegral, "unsupported integrand");
  }
  if (n == Rational(-1)) {
    constant.push_back(make_function("log", base));
    return make_term(tp.coefficient, constant);
  }
  Rational n1 = n + 1;
  constant.push_back(make_power(base, make_rational(n1)));
  return make_term(tp.coefficient / n1, constant);
}

// ---------------------------------------------------------------------------
// trig_normalize
// ---------------------------------------------------------------------------

// Remove two copies of sin/cos(u) from a term; returns nullptr if the term
// has no such factor with exponent >= 2.
ExprPtr strip_square(const ExprPtr& term, const std::string& fn, ExprPtr* arg_out) {
  TermParts tp = term_parts(term);
  for (std::size_t i = 0; i < tp.factors.size(); ++i) {
    auto [base, exp] = base_exponent(tp.factors[i]);
    if (base->kind != Kind::Function || base->name != fn) continue;
    if (exp < Rational(2)) continue;
    std::vector<ExprPtr> factors = tp.factors;
    if (exp == Rational(2))
      factors.erase(factors.begin() + static_cast<std::ptrdiff_t>(i));
    else
      factors[i] = make_power(base, make_rational(Rational(exp - 2)));
    if (arg_out) *arg_out = base->children[0];
    return make_term(tp.coefficient, factors);
  }
  return nullptr;
}

ExprPtr trig_node(const ExprPtr& e) {
  std::vector<ExprPtr> ch;
  ch.reserve(e->children.size());
  bool changed = false;
  for (const auto& c : e->children) {
    ExprPtr n = trig_node(c);
    if (n.get() != c.get()) changed = true;
    ch.push_back(std::move(n));
  }
  ExprPtr node = changed ? with_children(e, std::move(ch)) : e;
  if (node->kind != Kind::Sum) return node;

  std::vector<ExprPtr> terms = node->children;
  bool again = true;
  while (again) {
    again = false;
    for (std::size_t i = 0; i < terms.size() && !again; ++i) {
      ExprPtr arg;
      ExprPtr rest = strip_square(terms[i], "sin", &arg);
      if (!rest) continue;
      ExprPtr partner =
          simplify(make_product({rest, make_power(make_function("cos", arg),
                                                  make_rational(Rational(2)))}));
      for (std::size_t j = 0; j < terms.size(); ++j) {
        if (j == i) continue;
        if (!structural_equal(simplify(terms[j]), partner)) continue;
        // sin^2 u * M + cos^2 u * M -> M
        std::vector<ExprPtr> next;
        for (std::size_t k = 0; k < terms.size(); ++k)
          if (k != i && k != j) next.push_back(terms[k]);
        next.push_back(simplify(rest));
        terms = std::move(next);
        again = true;
        break;
      }
    }
  }
  return simplify(make_sum(std::move(terms)));
}

void collect_symbols(const ExprPtr& e, std::set<std::string>& out) {
  if (e->kind == Kind::Symbol) out.insert(e->name);
  for (const auto& c : e->children) collect_symbols(c, out);
}

}  // namespace

// ---------------------------------------------------------------------------
// public entry points
// ---------------------------------------------------------------------------

bool is_scalar(const ExprPtr& e) {
  switch (e->kind) {
    case Kind::Rational:
    case Kind::Symbol:
      return true;
    case Kind::Function:
    case Kind::Power:
    case Kind::Product:
    case Kind::Sum: {
      for (const auto& c : e->children)
        if (!is_scalar(c)) return false;
      return true;
    }
    default:
      return false;
  }
}

ExprPtr simplify(const ExprPtr& e) { return simplify_node(e); }

ExprPtr diff(const ExprPtr& e, const std::string& var) {
  return diff_node(e, var);
}

ExprPtr integrate_basic(const ExprPtr& e, const std::string& var) {
  ExprPtr s = simplify(e);
  if (s->kind == Kind::Sum) {
    std::vector<ExprPtr> terms;
    terms.reserve(s->children.size());
    for (const auto& t : s->children) terms.push_back(integrate_term(t, var));
    return simplify(make_sum(std::move(terms)));
  }
  return simplify(integrate_term(s, var));
}

ExprPtr trig_normalize(const ExprPtr& e) { return trig_node(simplify(e)); }

ExprPtr scalar_call(const std::string& fn, const ExprPtr& e) {
  if (fn == "integrate") {
    if (e->kind == Kind::Integral)
      return integrate_basic(e->children[0], e->name);
    std::set<std::string> syms;
    collect_symbols(e, syms);
    if (syms.size() != 1)
      throw EngineError(ErrorKind::UnsupportedIntegral,
                        "cannot determine integration variable");
    return integrate_basic(e, *syms.begin());
  }
  if (fn == "expand_trig") return trig_normalize(e);
  if (fn == "simplify") return simplify(e);
  throw EngineError(ErrorKind::UnknownFunction, "unknown scalar function: " + fn);
}

double eval_double(const ExprPtr& e, const std::map<std::string, double>& env) {
  switch (e->kind) {
    case Kind::Rational:
      return e->value.get_d();
    case Kind::Symbol: {
      auto it = env.find(e->name);
      if (it == env.end())
        throw EngineError(ErrorKind::UndefinedValue,
                          "no numeric value for symbol: " + e->name);
      return it->second;
    }
    case Kind::Function: {
      double a = eval_double(e->children[0], env);
      if (e->name == "sin") return std::sin(a);
      if (e->name == "cos") return std::cos(a);
      if (e->name == "tan") return std::tan(a);
      if (e->name == "log") return std::log(a);
      throw EngineError(ErrorKind::UnknownFunction,
                        "no numeric rule for function: " + e->name);
    }
    case Kind::Power: {
      double b = eval_double(e->children[0], env);
      double x = eval_double(e->children[1], env);
      return std::pow(b, x);
    }
    case Kind::Product: {
      double p = 1.0;
      for (const auto& c : e->children) p *= eval_double(c, env);
      return p;
    }
    case Kind::Sum: {
      double s = 0.0;
      for (const auto& c : e->children) s += eval_double(c, env);
      return s;
    }
    case Kind::Equation:
      return eval_double(e->children[1], env);
    default:
      throw EngineError(ErrorKind::NotScalar,
                        "cannot numerically evaluate expression");
  }
}

}  // namespace tce
