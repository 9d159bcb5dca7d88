#include "tce/rewrite.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tce/error.hpp"
#include "tce/index_ops.hpp"
#include "tce/pattern.hpp"
#include "tce/scalar.hpp"

namespace tce {

namespace {

// ---------------------------------------------------------------------------
// distribute
// ---------------------------------------------------------------------------

// c * D(t) for a single term t: rational coefficients commute with linear
// operators, so they are pulled in front.
ExprPtr linear_apply(const ExprPtr& op_node, const ExprPtr& operand) {
  if (is_zero(operand)) return make_rational(Rational(0));
  TermParts tp = term_parts(operand);
  ExprPtr core = make_term(Rational(1), tp.factors);
  ExprPtr applied;
  if (op_node->kind == Kind::Derivative) {
    applied = make_derivative(op_node->name, op_node->indices, core);
  } else {
    applied = make_accent(op_node->name, core);
  }
  if (rat_is_one(tp.coefficient)) return applied;
  return make_product({make_rational(tp.coefficient), applied});
}

ExprPtr distribute_node(const ExprPtr& e, const PropertyRegistry& reg);

ExprPtr distribute_children(const ExprPtr& e, const PropertyRegistry& reg) {
  std::vector<ExprPtr> ch;
  ch.reserve(e->children.size());
  bool changed = false;
  for (const auto& c : e->children) {
    ExprPtr d = distribute_node(c, reg);
    if (d.get() != c.get()) changed = true;
    ch.push_back(d);
  }
  if (!changed) return e;
  return with_children(e, std::move(ch));
}

ExprPtr distribute_node(const ExprPtr& e, const PropertyRegistry& reg) {
  switch (e->kind) {
    case Kind::Rational:
    case Kind::Symbol:
    case Kind::Wildcard:
    case Kind::Tensor:
      return e;
    case Kind::Sum:
    case Kind::Equation:
    case Kind::RuleNode:
    case Kind::List:
    case Kind::Table:
    case Kind::Function:
    case Kind::Power:
    case Kind::Integral:
      return distribute_children(e, reg);
    case Kind::Product: {
      ExprPtr p = distribute_children(e, reg);
      if (p->kind != Kind::Product) return p;
      bool has_sum = false;
      for (const auto& f : p->children)
        if (f->kind == Kind::Sum) has_sum = true;
      if (!has_sum) return p;
      std::vector<std::vector<ExprPtr>> combos{{}};
      for (const auto& f : p->children) {
        if (f->kind != Kind::Sum) {
          for (auto& combo : combos) combo.push_back(f);
          continue;
        }
        std::vector<std::vector<ExprPtr>> next;
        next.reserve(combos.size() * f->children.size());
        for (const auto& combo : combos) {
          for (const auto& t : f->children) {
            auto grown = combo;
            grown.push_back(t);
            next.push_back(std::move(grown));
          }
        }
        combos = std::move(next);
      }
      std::vector<ExprPtr> terms;
      terms.reserve(combos.size());
      for (auto& combo : combos) terms.push_back(make_product(std::move(combo)));
      return make_sum(std::move(terms));
    }
    case Kind::Derivative:
    case Kind::Accent: {
      ExprPtr d = distribute_node(e->children[0], reg);
      if (d->kind == Kind::Sum) {
        std::vector<ExprPtr> terms;
        terms.reserve(d->children.size());
        for (const auto& t : d->children) terms.push_back(linear_apply(e, t));
        return make_sum(std::move(terms));
      }
      return linear_apply(e, d);
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// canonicalise helpers
// ---------------------------------------------------------------------------

bool subtree_has_sum(const ExprPtr& e) {
  if (e->kind == Kind::Sum) return true;
  for (const auto& c : e->children)
    if (subtree_has_sum(c)) return true;
  return false;
}

// All tensor nodes (pre-order) in a term whose head is declared symmetric or
// antisymmetric; these contribute slot permutations to the search space.
void collect_sym_sites(const ExprPtr& e, const PropertyRegistry& reg,
                       std::vector<std::pair<const Expr*, bool>>& sites) {
  if (e->kind == Kind::Tensor && e->indices.size() >= 2) {
    if (reg.is_antisymmetric(e)) {
      sites.emplace_back(e.get(), true);
    } else if (reg.is_symmetric(e)) {
      sites.emplace_back(e.get(), false);
    }
  }
  for (const auto& c : e->children) collect_sym_sites(c, reg, sites);
}

// Rebuild `e` with the chosen slot permutation applied at each symmetric
// site (same pre-order as collect_sym_sites); `sign` picks up the parity of
// antisymmetric permutations.
ExprPtr apply_slot_perms(const ExprPtr& e,
                         const std::vector<std::pair<const Expr*, bool>>& sites,
                         const std::vector<std::vector<int>>& perms,
                         std::size_t& cursor, int& sign) {
  if (e->kind == Kind::Tensor && cursor < sites.size() &&
      sites[cursor].first == e.get()) {
    const auto& perm = perms[cursor];
    bool antisym = sites[cursor].second;
    ++cursor;
    std::vector<Index> ix(e->indices.size());
    int inversions = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      ix[i] = e->indices[static_cast<std::size_t>(perm[i])];
      for (std::size_t j = 0; j < i; ++j)
        if (perm[j] > perm[i]) ++inversions;
    }
    if (antisym && (inversions % 2) != 0) sign = -sign;
    return make_tensor(e->name, std::move(ix));
  }
  std::vector<ExprPtr> ch;
  ch.reserve(e->children.size());
  bool changed = false;
  for (const auto& c : e->children) {
    ExprPtr n = apply_slot_perms(c, sites, perms, cursor, sign);
    if (n.get() != c.get()) changed = true;
    ch.push_back(std::move(n));
  }
  if (!changed) return e;
  return with_children(e, std::move(ch));
}

// True if some antisymmetric tensor in the term carries the same index name
// twice among its own slots (such a term is identically zero).
bool antisymmetric_collapse(const ExprPtr& e, const PropertyRegistry& reg) {
  if (e->kind == Kind::Tensor && reg.is_antisymmetric(e)) {
    for (std::size_t i = 0; i < e->indices.size(); ++i)
      for (std::size_t j = i + 1; j < e->indices.size(); ++j)
        if (e->indices[i].name == e->indices[j].name) return true;
  }
  for (const auto& c : e->children)
    if (antisymmetric_collapse(c, reg)) return true;
  return false;
}

// Index occurrence census for one flat term: names in first-occurrence
// order with their occurrence counts. Coordinate labels are not abstract
// indices and are skipped.
void index_census(const ExprPtr& e, const PropertyRegistry& reg,
                  std::vector<std::string>& order,
                  std::map<std::string, int>& count) {
  for (const auto& ix : e->indices) {
    if (reg.is_coordinate(ix.name)) continue;
    auto it = count.find(ix.name);
    if (it == count.end()) {
      count.emplace(ix.name, 1);
      order.push_back(ix.name);
    } else {
      ++it->second;
    }
  }
  for (const auto& c : e->children) index_census(c, reg, order, count);
}

constexpr std::size_t kCanonicalSearchCap = 20000;
constexpr std::size_t kMaxAbstractIndices = 8;

struct Candidate {
  std::vector<ExprPtr> factors;
  int sign = 1;
  bool valid = false;
};

ExprPtr canonicalise_node(const ExprPtr& e, const PropertyRegistry& reg);

// Canonicalise the pieces of a term that sits inside a larger index context
// (a factor of a parent term, or a term of a sum nested under a derivative):
// slot permutations and factor sorting only — dummy names and variances
// belong to the enclosing context and must not change.
ExprPtr canonicalise_local(const ExprPtr& e, const PropertyRegistry& reg);

ExprPtr canonical_flat_term(const ExprPtr& t, const PropertyRegistry& reg) {
  TermParts tp = term_parts(t);
  if (tp.factors.empty()) return t;
  ExprPtr core = make_term(Rational(1), tp.factors);

  if (antisymmetric_collapse(core, reg)) return make_rational(Rational(0));

  std::vector<std::string> order;
  std::map<std::string, int> count;
  index_census(core, reg, order, count);
  if (order.size() > kMaxAbstractIndices)
    throw EngineError(ErrorKind::TermTooLarge,
                      "term has more than 8 distinct abstract indices");

  std::vector<std::string> frees, dummies;
  for (const auto& n : order) {
    if (count[n] == 1)
      frees.push_back(n);
    else
      dummies.push_back(n);
  }

  // Dummy names are relabeled onto the first available names of the declared
  // pool; free names stay put and block their pool entries.
  std::vector<std::string> targets;
  const auto& pool = reg.index_pool();
  if (!pool.empty() && !dummies.empty()) {
    for (const auto& p : pool) {
      if (std::find(frees.begin(), frees.end(), p) != frees.end()) continue;
      targets.push_back(p);
      if (targets.size() == dummies.size()) break;
    }
    if (targets.size() < dummies.size())
      throw EngineError(ErrorKind::OutOfIndices,
                        "declared index set too small to relabel dummies");
  }
  bool relabel = !targets.empty();

  // Paired raise/lower flips make sense only for position=free dummy pairs.
  std::vector<std::string> flippable;
  for (std::size_t i = 0; i < dummies.size(); ++i) {
    const std::string& name = relabel ? targets[i] : dummies[i];
    auto pos = reg.index_position(name);
    if (!pos || *pos == IndexPosition::Free) flippable.push_back(name);
  }

  std::vector<std::pair<const Expr*, bool>> sites;
  collect_sym_sites(core, reg, sites);

  // Search-space size guard.
  std::size_t space = 1;
  auto mul_capped = [&](std::size_t f) {
    if (f == 0) f = 1;
    if (space > kCanonicalSearchCap / f)
      space = kCanonicalSearchCap + 1;
    else
      space *= f;
  };
  std::size_t assignments = 1;
  for (std::size_t i = 2; i <= dummies.size(); ++i) assignments *= i;
  if (!relabel) assignments = 1;
  mul_capped(assignments);
  mul_capped(static_cast<std::size_t>(1) << flippable.size());
  for (const auto& s : sites) {
    std::size_t r = 1;
    for (std::size_t i = 2; i <= s.first->indices.size(); ++i) r *= i;
    mul_capped(r);
  }
  if (space > kCanonicalSearchCap)
    throw EngineError(ErrorKind::TermTooLarge,
                      "canonical form search space too large");

  // Enumerate slot permutations per site.
  std::vector<std::vector<std::vector<int>>> site_perms;
  for (const auto& s : sites) {
    std::vector<int> base(s.first->indices.size());
    for (std::size_t i = 0; i < base.size(); ++i) base[i] = static_cast<int>(i);
    std::vector<std::vector<int>> all;
    do {
      all.push_back(base);
    } while (std::next_permutation(base.begin(), base.end()));
    site_perms.push_back(std::move(all));
  }

  Candidate best;
  std::vector<std::size_t> perm_choice(sites.size(), 0);

  std::function<void(std::size_t, const ExprPtr&, int)> over_flips;
  std::function<void(const ExprPtr&, int)> finish;

  finish = [&](const ExprPtr& cand, int sign) {
    ExprPtr sorted = sort_product(cand, reg);
    TermParts sp = term_parts(sorted);
    if (!best.valid ||
        [&] {
          // lexicographic comparison of factor lists
          std::size_t n = std::min(sp.factors.size(), best.factors.size());
          for (std::size_t i = 0; i < n; ++i) {
            int c = compare_expr(sp.factors[i], best.factors[i]);
            if (c != 0) return c < 0;
          }
          return sp.factors.size() < best.factors.size();
        }()) {
      best.factors = sp.factors;
      best.sign = sign;
      best.valid = true;
    }
  };

  over_flips = [&](std::size_t i, const ExprPtr& cand, int sign) {
    if (i == flippable.size()) {
      finish(cand, sign);
      return;
    }
    over_flips(i + 1, cand, sign);
    over_flips(i + 1, flip_indices(cand, {flippable[i]}), sign);
  };

  std::function<void(std::size_t)> over_perms = [&](std::size_t site) {
    if (site == sites.size()) {
      int sign = 1;
      std::size_t cursor = 0;
      std::vector<std::vector<int>> chosen;
      chosen.reserve(sites.size());
      for (std::size_t i = 0; i < sites.size(); ++i)
        chosen.push_back(site_perms[i][perm_choice[i]]);
      ExprPtr permuted = apply_slot_perms(core, sites, chosen, cursor, sign);
      if (relabel) {
        std::vector<int> assign(dummies.size());
        for (std::size_t i = 0; i < assign.size(); ++i)
          assign[i] = static_cast<int>(i);
        do {
          std::map<std::string, std::string> ren;
          bool identity = true;
          for (std::size_t i = 0; i < dummies.size(); ++i) {
            ren[dummies[i]] = targets[static_cast<std::size_t>(assign[i])];
            if (dummies[i] != ren[dummies[i]]) identity = false;
          }
          ExprPtr renamed = identity ? permuted : rename_indices(permuted, ren);
          over_flips(0, renamed, sign);
        } while (std::next_permutation(assign.begin(), assign.end()));
      } else {
        over_flips(0, permuted, sign);
      }
      return;
    }
    for (std::size_t p = 0; p < site_perms[site].size(); ++p) {
      perm_choice[site] = p;
      over_perms(site + 1);
    }
  };
  over_perms(0);

  Rational coeff = tp.coefficient;
  if (best.sign < 0) coeff = -coeff;
  return make_term(coeff, best.factors);
}

// A term that contains sums (e.g. a product of sum factors, or a derivative
// of a sum) is canonicalised piecewise: each nested flat term in local mode.
ExprPtr canonical_structured_term(const ExprPtr& t, const PropertyRegistry& reg) {
  TermParts tp = term_parts(t);
  std::vector<ExprPtr> factors;
  factors.reserve(tp.factors.size());
  for (const auto& f : tp.factors) factors.push_back(canonicalise_local(f, reg));
  return sort_product(make_term(tp.coefficient, factors), reg);
}

// An integral body is index-closed with respect to sibling factors when
// every other factor is an index-free scalar, so the body can be
// canonicalised as a full expression of its own.  A rational prefactor the
// body picks up from merging equivalent terms is hoisted out of the
// integral (∫ c·f = c·∫ f) so it combines with the term's coefficient.
ExprPtr canonical_integral_term(TermParts tp, const PropertyRegistry& reg) {
  Rational coeff = tp.coefficient;
  std::vector<ExprPtr> factors;
  factors.reserve(tp.factors.size());
  for (const auto& f : tp.factors) {
    if (f->kind != Kind::Integral) {
      factors.push_back(f);
      continue;
    }
    ExprPtr body = canonicalise_node(f->children[0], reg);
    if (body->kind == Kind::Rational) {
      coeff *= body->value;
      body = make_rational(Rational(1));
    } else if (body->kind == Kind::Product &&
               body->children.front()->kind == Kind::Rational) {
      coeff *= body->children.front()->value;
      std::vector<ExprPtr> rest(body->children.begin() + 1,
                                body->children.end());
      body = rest.size() == 1 ? rest.front() : make_product(std::move(rest));
    }
    factors.push_back(make_integral(body, f->name));
  }
  return sort_product(make_term(coeff, std::move(factors)), reg);
}

ExprPtr canonical_term(const ExprPtr& t, const PropertyRegistry& reg) {
  if (t->kind == Kind::Rational) return t;
  if (subtree_has_sum(t)) {
    TermParts tp = term_parts(t);
    bool any_integral = false;
    bool siblings_scalar = true;
    for (const auto& f : tp.factors) {
      if (f->kind == Kind::Integral)
        any_integral = true;
      else if (!is_scalar(f))
        siblings_scalar = false;
    }
    if (any_integral && siblings_scalar)
      return canonical_integral_term(std::move(tp), reg);
    return canonical_structured_term(t, reg);
  }
  return canonical_flat_term(t, reg);
}

// Local mode: minimal slot ordering for (anti)symmetric tensors, recursion
// into nested structures, factor sorting — but no dummy renames or flips.
ExprPtr canonicalise_local(const ExprPtr& e, const PropertyRegistry& reg) {
  switch (e->kind) {
    case Kind::Rational:
    case Kind::Symbol:
    case Kind::Wildcard:
      return e;
    case Kind::Tensor: {
      if (e->indices.size() < 2) return e;
      bool antisym = reg.is_antisymmetric(e);
      if (!antisym && !reg.is_symmetric(e)) return e;
      if (antisym) {
        for (std::size_t i = 0; i < e->indices.size(); ++i)
          for (std::size_t j = i + 1; j < e->indices.size(); ++j)
            if (e->indices[i].name == e->indices[j].name)
              return make_rational(Rational(0));
      }
      std::vector<int> perm(e->indices.size());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
      std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) {
        const Index& ia = e->indices[static_cast<std::size_t>(a)];
        const Index& ib = e->indices[static_cast<std::size_t>(b)];
        if (ia.name != ib.name) return ia.name < ib.name;
        return ia.variance == Variance::Upper && ib.variance == Variance::Lower;
      });
      int inversions = 0;
      for (std::size_t i = 0; i < perm.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
          if (perm[j] > perm[i]) ++inversions;
      std::vector<Index> ix(perm.size());
      for (std::size_t i = 0; i < perm.size(); ++i)
        ix[i] = e->indices[static_cast<std::size_t>(perm[i])];
      ExprPtr sorted = make_tensor(e->name, std::move(ix));
      if (antisym && (inversions % 2) != 0)
        return make_product({make_rational(Rational(-1)), sorted});
      return sorted;
    }
    case Kind::Sum: {
      std::vector<ExprPtr> terms;
      terms.reserve(e->children.size());
      for (const auto& t : e->children)
        terms.push_back(canonical_structured_term(t, reg));
      return make_sum(std::move(terms));
    }
    case Kind::Product:
      return canonical_structured_term(e, reg);
    default: {
      std::vector<ExprPtr> ch;
      ch.reserve(e->children.size());
      bool changed = false;
      for (const auto& c : e->children) {
        ExprPtr n = canonicalise_local(c, reg);
        if (n.get() != c.get()) changed = true;
        ch.push_back(std::move(n));
      }
      if (!changed) return e;
      return with_children(e, std::move(ch));
    }
  }
}

ExprPtr canonicalise_node(const ExprPtr& e, const PropertyRegistry& reg) {
  switch (e->kind) {
    case Kind::Sum: {
      std::vector<ExprPtr> terms;
      terms.reserve(e->children.size());
      for (const auto& t : e->children) terms.push_back(canonical_term(t, reg));
      // Terms that land on the same canonical form must merge (or cancel)
      // for the result to be a unique representative of the sum.
      return collect_terms(make_sum(std::move(terms)), reg);
    }
    case Kind::Equation:
    case Kind::RuleNode:
    case Kind::List:
    case Kind::Table: {
      std::vector<ExprPtr> ch;
      ch.reserve(e->children.size());
      for (const auto& c : e->children) ch.push_back(canonicalise_node(c, reg));
      return with_children(e, std::move(ch));
    }
    case Kind::Integral:
      return make_integral(canonicalise_node(e->children[0], reg), e->name);
    default:
      return canonical_term(e, reg);
  }
}

// ---------------------------------------------------------------------------
// vary
// ---------------------------------------------------------------------------

struct Varier {
  ExprPtr pat;
  ExprPtr repl;
  const PropertyRegistry& reg;
  std::set<std::string> used;

  ExprPtr try_match(const ExprPtr& node) {
    Bindings b;
    if (!match_object(pat, node, reg, b)) return nullptr;
    return instantiate(repl, b, reg, used);
  }

  ExprPtr operator()(const ExprPtr& e) {
    switch (e->kind) {
      case Kind::Rational:
      case Kind::Wildcard:
        return make_rational(Rational(0));
      case Kind::Sum:
      case Kind::Equation:
      case Kind::List:
      case Kind::Table: {
        std::vector<ExprPtr> ch;
        ch.reserve(e->children.size());
        for (const auto& c : e->children) ch.push_back((*this)(c));
        return with_children(e, std::move(ch));
      }
      case Kind::Integral:
        return make_integral((*this)(e->children[0]), e->name);
      case Kind::Product: {
        std::vector<ExprPtr> terms;
        for (std::size_t i = 0; i < e->children.size(); ++i) {
          ExprPtr vi = (*this)(e->children[i]);
          if (is_zero(vi)) continue;
          std::vector<ExprPtr> factors = e->children;
          factors[i] = vi;
          terms.push_back(make_product(std::move(factors)));
        }
        return make_sum(std::move(terms));
      }
      case Kind::Power: {
        const ExprPtr& base = e->children[0];
        const ExprPtr& exp = e->children[1];
        ExprPtr vb = (*this)(base);
        if (is_zero(vb)) return vb;
        if (exp->kind != Kind::Rational)
          throw EngineError(ErrorKind::RuleShape,
                            "cannot vary a non-rational power");
        Rational n = exp->value;
        ExprPtr reduced = make_power(base, make_rational(n - 1));
        return make_product({make_rational(n), reduced, vb});
      }
      case Kind::Derivative: {
        if (ExprPtr hit = try_match(e)) return hit;
        ExprPtr v = (*this)(e->children[0]);
        if (is_zero(v)) return v;
        return make_derivative(e->name, e->indices, v);
      }
      case Kind::Accent: {
        if (ExprPtr hit = try_match(e)) return hit;
        ExprPtr v = (*this)(e->children[0]);
        if (is_zero(v)) return v;
        return make_accent(e->name, v);
      }
      case Kind::Tensor:
      case Kind::Symbol:
      case Kind::Function:
      case Kind::RuleNode: {
        if (ExprPtr hit = try_match(e)) return hit;
        return make_rational(Rational(0));
      }
    }
    return make_rational(Rational(0));
  }
};

// ---------------------------------------------------------------------------
// integrate_by_parts
// ---------------------------------------------------------------------------

bool matches_marker(const ExprPtr& e, const ExprPtr& marker,
                    const PropertyRegistry& reg) {
  Bindings b;
  return match_object(marker, e, reg, b);
}

bool contains_marker(const ExprPtr& e, const ExprPtr& marker,
                     const PropertyRegistry& reg) {
  if (matches_marker(e, marker, reg)) return true;
  for (const auto& c : e->children)
    if (contains_marker(c, marker, reg)) return true;
  return false;
}

// ∫ (∂f)·c1..cm = -∫ f·∂(c1..cm): Leibniz over the complement, factors that
// do not depend on anything drop out (their derivative vanishes), an empty
// or constant complement is a pure boundary term and yields zero.
ExprPtr move_derivative(const Rational& coeff, const ExprPtr& deriv,
                        const std::vector<ExprPtr>& complement,
                        const PropertyRegistry& reg) {
  const ExprPtr& operand = deriv->children[0];
  std::vector<ExprPtr> moved;
  for (std::size_t j = 0; j < complement.size(); ++j) {
    if (!reg.depends_nonconstant(complement[j])) continue;
    std::vector<ExprPtr> factors;
    factors.reserve(complement.size() + 1);
    for (std::size_t k = 0; k < complement.size(); ++k) {
      if (k == j)
        factors.push_back(make_derivative(deriv->name, deriv->indices,
                                          complement[k]));
      else
        factors.push_back(complement[k]);
    }
    factors.push_back(operand);
    moved.push_back(make_term(-coeff, factors));
  }
  return make_sum(std::move(moved));
}

struct PartsIntegrator {
  ExprPtr marker;
  const PropertyRegistry& reg;

  bool derivative_wraps_marker(const ExprPtr& f) const {
    return f->kind == Kind::Derivative &&
           contains_marker(f->children[0], marker, reg);
  }

  // Rule (a): while a derivative factor still wraps the marker, move it.
  ExprPtr unwrap(const ExprPtr& t) const {
    if (t->kind == Kind::Sum) {
      std::vector<ExprPtr> terms;
      terms.reserve(t->children.size());
      for (const auto& c : t->children) terms.push_back(unwrap(c));
      return make_sum(std::move(terms));
    }
    TermParts tp = term_parts(t);
    for (std::size_t i = 0; i < tp.factors.size(); ++i) {
      if (!derivative_wraps_marker(tp.factors[i])) continue;
      std::vector<ExprPtr> complement;
      for (std::size_t k = 0; k < tp.factors.size(); ++k)
        if (k != i) complement.push_back(tp.factors[k]);
      return unwrap(move_derivative(tp.coefficient, tp.factors[i], complement, reg));
    }
    return t;
  }

  ExprPtr term(const ExprPtr& t) const {
    if (!contains_marker(t, marker, reg)) return t;
    TermParts tp = term_parts(t);
    bool wrapped = false;
    for (const auto& f : tp.factors)
      if (derivative_wraps_marker(f)) wrapped = true;
    if (wrapped) return unwrap(t);

    // Rule (b): the marker stands free; move the first derivative factor
    // onto the complement (which contains the marker).
    bool bare = false;
    for (const auto& f : tp.factors)
      if (matches_marker(f, marker, reg)) bare = true;
    if (!bare) return t;
    for (std::size_t i = 0; i < tp.factors.size(); ++i) {
      if (tp.factors[i]->kind != Kind::Derivative) continue;
      std::vector<ExprPtr> complement;
      for (std::size_t k = 0; k < tp.factors.size(); ++k)
        if (k != i) complement.push_back(tp.factors[k]);
      return move_derivative(tp.coefficient, tp.factors[i], complement, reg);
    }
    return t;
  }

  ExprPtr integrand(const ExprPtr& e) const {
    if (e->kind == Kind::Sum) {
      std::vector<ExprPtr> terms;
      terms.reserve(e->children.size());
      for (const auto& t : e->children) terms.push_back(term(t));
      return make_sum(std::move(terms));
    }
    return term(e);
  }

  ExprPtr walk(const ExprPtr& e) const {
    if (e->kind == Kind::Integral)
      return make_integral(integrand(e->children[0]), e->name);
    if (e->children.empty()) return e;
    std::vector<ExprPtr> ch;
    ch.reserve(e->children.size());
    bool changed = false;
    for (const auto& c : e->children) {
      ExprPtr n = walk(c);
      if (n.get() != c.get()) changed = true;
      ch.push_back(std::move(n));
    }
    if (!changed) return e;
    return with_children(e, std::move(ch));
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// public entry points
// ---------------------------------------------------------------------------

ExprPtr distribute(const ExprPtr& e, const PropertyRegistry& reg) {
  return distribute_node(e, reg);
}

ExprPtr sort_product(const ExprPtr& e, const PropertyRegistry& reg) {
  std::vector<ExprPtr> ch;
  ch.reserve(e->children.size());
  bool changed = false;
  for (const auto& c : e->children) {
    ExprPtr n = sort_product(c, reg);
    if (n.get() != c.get()) changed = true;
    ch.push_back(std::move(n));
  }
  if (e->kind == Kind::Product) {
    std::stable_sort(ch.begin(), ch.end(), [](const ExprPtr& a, const ExprPtr& b) {
      return compare_expr(a, b) < 0;
    });
    return make_product(std::move(ch));
  }
  if (!changed) return e;
  return with_children(e, std::move(ch));
}

ExprPtr collect_terms(const ExprPtr& e, const PropertyRegistry& reg) {
  std::vector<ExprPtr> ch;
  ch.reserve(e->children.size());
  bool changed = false;
  for (const auto& c : e->children) {
    ExprPtr n = collect_terms(c, reg);
    if (n.get() != c.get()) changed = true;
    ch.push_back(std::move(n));
  }
  ExprPtr node = changed ? with_children(e, std::move(ch)) : e;

  if (node->kind == Kind::Integral) {
    // Pull a rational coefficient out of a single-term integrand so it can
    // merge with coefficients outside the integral.
    const ExprPtr& body = node->children[0];
    if (body->kind != Kind::Sum) {
      TermParts tp = term_parts(body);
      if (!rat_is_one(tp.coefficient) && !tp.factors.empty()) {
        ExprPtr stripped =
            make_integral(make_term(Rational(1), tp.factors), node->name);
        return make_product({make_rational(tp.coefficient), stripped});
      }
    }
    return node;
  }

  if (node->kind != Kind::Sum) return node;

  std::vector<ExprPtr> keys;
  std::vector<Rational> coeffs;
  for (const auto& t : node->children) {
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
  std::vector<ExprPtr> terms;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (rat_is_zero(coeffs[i])) continue;
    TermParts tp = term_parts(keys[i]);
    terms.push_back(make_term(coeffs[i], tp.factors));
  }
  return make_sum(std::move(terms));
}

ExprPtr canonicalise(const ExprPtr& e, const PropertyRegistry& reg) {
  return canonicalise_node(e, reg);
}

ExprPtr substitute(const ExprPtr& e, const ExprPtr& rule,
                   const PropertyRegistry& reg) {
  if (rule->kind == Kind::List) {
    ExprPtr out = e;
    for (const auto& r : rule->children) out = match_replace(out, r, reg);
    return out;
  }
  return match_replace(e, rule, reg);
}

ExprPtr vary(const ExprPtr& e, const ExprPtr& rule, const PropertyRegistry& reg) {
  auto [pat, repl] = split_rule(rule, reg);
  Varier v{pat, repl, reg, {}};
  collect_index_names(e, v.used);
  return v(e);
}

ExprPtr integrate_by_parts(const ExprPtr& e, const ExprPtr& marker,
                           const PropertyRegistry& reg) {
  PartsIntegrator ibp{marker, reg};
  return ibp.walk(e);
}

}  // namespace tce
