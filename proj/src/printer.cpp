#include "tce/printer.hpp"

#include <set>
#include <sstream>
#include <vector>

namespace tce {

namespace {

const std::set<std::string>& latex_names() {
  static const std::set<std::string> names = {
      "alpha", "beta",  "gamma",   "delta",   "epsilon", "zeta",  "eta",
      "theta", "iota",  "kappa",   "lambda",  "mu",      "nu",    "xi",
      "pi",    "rho",   "sigma",   "tau",     "upsilon", "phi",   "varphi",
      "chi",   "psi",   "omega",   "Gamma",   "Delta",   "Theta", "Lambda",
      "Xi",    "Pi",    "Sigma",   "Upsilon", "Phi",     "Psi",   "Omega",
      "partial"};
  return names;
}

struct Printer {
  PrintMode mode;

  std::string name(const std::string& n) const {
    if (mode == PrintMode::Latex && latex_names().count(n)) return "\\" + n;
    return n;
  }

  std::string rational(const Rational& q) const {
    if (mode == PrintMode::Plain || rat_is_integer(q)) return rat_to_string(q);
    std::string sign = sgn(q) < 0 ? "-" : "";
    Rational a = abs(q);
    return sign + "\\frac{" + a.get_num().get_str() + "}{" + a.get_den().get_str() + "}";
  }

  std::string exponent_suffix(const ExprPtr& e) const {
    std::string body =
        e->kind == Kind::Rational ? rat_to_string(e->value) : print(e);
    if (mode == PrintMode::Latex) return "^{" + body + "}";
    if (e->kind == Kind::Rational && rat_is_integer(e->value) && sgn(e->value) >= 0)
      return "**" + body;
    return "**(" + body + ")";
  }

  std::string index_groups(const std::vector<Index>& slots) const {
    std::string out;
    std::size_t i = 0;
    while (i < slots.size()) {
      std::size_t j = i;
      while (j < slots.size() && slots[j].variance == slots[i].variance) ++j;
      out += slots[i].variance == Variance::Upper ? "^{" : "_{";
      for (std::size_t k = i; k < j; ++k) {
        if (k > i) out += " ";
        out += name(slots[k].name);
      }
      out += "}";
      i = j;
    }
    return out;
  }

  bool simple_operand(const ExprPtr& e) const {
    if (e->kind == Kind::Symbol || e->kind == Kind::Tensor) return true;
    return e->kind == Kind::Accent && simple_operand(e->children[0]);
  }

  std::string power(const ExprPtr& base, const ExprPtr& exp) const {
    bool parens = base->kind == Kind::Sum || base->kind == Kind::Product ||
                  base->kind == Kind::Power || base->kind == Kind::Rational ||
                  base->kind == Kind::Integral;
    std::string b = print(base);
    if (parens) b = "(" + b + ")";
    return b + exponent_suffix(exp);
  }

  std::string product(const ExprPtr& e) const {
    TermParts parts = term_parts(e);

    struct Item {
      ExprPtr base;
      Rational exp;
      bool is_tan = false;
    };
    std::vector<Item> items;
    for (const auto& f : parts.factors) {
      if (f->kind == Kind::Power && is_rational(f->children[1]))
        items.push_back({f->children[0], f->children[1]->value, false});
      else
        items.push_back({f, Rational(1), false});
    }

    // Opposite powers of sin and cos of the same argument display as tan.
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].base->kind != Kind::Function) continue;
      for (std::size_t j = i + 1; j < items.size(); ++j) {
        if (items[j].base->kind != Kind::Function) continue;
        const auto& a = items[i];
        const auto& b = items[j];
        bool pair = ((a.base->name == "sin" && b.base->name == "cos") ||
                     (a.base->name == "cos" && b.base->name == "sin")) &&
                    structural_equal(a.base->children[0], b.base->children[0]) &&
                    cmp(a.exp, Rational(0) - b.exp) == 0;
        if (!pair) continue;
        Rational tan_exp = a.base->name == "sin" ? a.exp : b.exp;
        ExprPtr arg = a.base->children[0];
        items[i] = {make_function("tan", arg), tan_exp, true};
        items.erase(items.begin() + j);
        break;
      }
    }

    // Two or more plain factors with negative exponents display as a single
    // grouped inverse: r^{-2} sin^{-2} -> (r^{2} sin^{2})^{-1}.
    std::vector<std::size_t> negs;
    for (std::size_t i = 0; i < items.size(); ++i)
      if (!items[i].is_tan && sgn(items[i].exp) < 0) negs.push_back(i);

    std::vector<std::string> rendered;
    if (negs.size() >= 2) {
      std::vector<ExprPtr> inner;
      for (std::size_t i : negs)
        inner.push_back(items[i].exp == Rational(-1)
                            ? items[i].base
                            : make_power(items[i].base,
                                         make_rational(Rational(0) - items[i].exp)));
      std::string group =
          "(" + print(make_product(std::move(inner))) + ")" +
          exponent_suffix(make_int(-1));
      std::set<std::size_t> skip(negs.begin() + 1, negs.end());
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (skip.count(i)) continue;
        if (i == negs[0]) {
          rendered.push_back(group);
          continue;
        }
        rendered.push_back(render_item(items[i].base, items[i].exp));
      }
    } else {
      for (const auto& it : items) rendered.push_back(render_item(it.base, it.exp));
    }

    std::string out;
    if (parts.coefficient == Rational(-1)) {
      out = "-";
    } else if (parts.coefficient != Rational(1)) {
      out = rational(parts.coefficient) + " ";
    }
    for (std::size_t i = 0; i < rendered.size(); ++i) {
      if (i > 0) out += " ";
      out += rendered[i];
    }
    return out;
  }

  std::string render_item(const ExprPtr& base, const Rational& exp) const {
    if (exp == Rational(1)) {
      if (base->kind == Kind::Sum) return "(" + print(base) + ")";
      return print(base);
    }
    return power(base, make_rational(exp));
  }

  std::string sum(const ExprPtr& e) const {
    std::string out;
    for (std::size_t i = 0; i < e->children.size(); ++i) {
      std::string t = print(e->children[i]);
      if (i == 0) {
        out = t;
      } else if (!t.empty() && t[0] == '-') {
        out += " - " + t.substr(1);
      } else {
        out += " + " + t;
      }
    }
    return out;
  }

  std::string list_body(const ExprPtr& e) const {
    std::string out = "{";
    for (std::size_t i = 0; i < e->children.size(); ++i) {
      if (i > 0) out += ", ";
      out += print(e->children[i]);
    }
    return out + "}";
  }

  std::string print(const ExprPtr& e) const {
    switch (e->kind) {
      case Kind::Rational:
        return rational(e->value);
      case Kind::Symbol:
        return name(e->name);
      case Kind::Wildcard:
        return "#";
      case Kind::Tensor:
        return name(e->name) + index_groups(e->indices);
      case Kind::Accent: {
        const ExprPtr& op = e->children[0];
        if (op->kind == Kind::Wildcard) return name(e->name) + "{#}";
        if (simple_operand(op)) return name(e->name) + " " + print(op);
        return name(e->name) + "{" + print(op) + "}";
      }
      case Kind::Derivative: {
        std::string head = name(e->name) + index_groups(e->indices);
        const ExprPtr& op = e->children[0];
        if (op->kind == Kind::Wildcard) return head + "{#}";
        if (simple_operand(op)) return head + print(op);
        return head + "(" + print(op) + ")";
      }
      case Kind::Function: {
        std::string head = (mode == PrintMode::Latex ? "\\" : "") + e->name;
        return head + "(" + print(e->children[0]) + ")";
      }
      case Kind::Power:
        return power(e->children[0], e->children[1]);
      case Kind::Product:
        return product(e);
      case Kind::Sum:
        return sum(e);
      case Kind::Integral: {
        const std::string& coord = e->name;
        std::string body = print(e->children[0]);
        if (e->children[0]->kind == Kind::Sum) body = "(" + body + ")";
        std::string head = mode == PrintMode::Latex ? "\\int" : "int";
        if (name(coord) == coord)
          return head + " " + body + " d" + coord;
        return head + "{" + print(e->children[0]) + "}{" + name(coord) + "}";
      }
      case Kind::Equation:
        return print(e->children[0]) + " = " + print(e->children[1]);
      case Kind::RuleNode:
        return print(e->children[0]) + " -> " + print(e->children[1]);
      case Kind::List:
      case Kind::Table:
        return list_body(e);
    }
    return "?";
  }
};

}  // namespace

std::string print_expr(const ExprPtr& e, PrintMode mode) {
  Printer p{mode};
  return p.print(e);
}

std::string print_name(const std::string& n, PrintMode mode) {
  Printer p{mode};
  return p.name(n);
}

}  // namespace tce
