#include "tce/components.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tce/error.hpp"
#include "tce/index_ops.hpp"
#include "tce/rewrite.hpp"
#include "tce/scalar.hpp"

namespace tce {

namespace {

ExprPtr zero() { return make_rational(Rational(0)); }

ExprPtr unwrap_rules(const ExprPtr& rules) {
  if (rules->kind == Kind::Equation && rules->children[1]->kind == Kind::List)
    return rules->children[1];
  if (rules->kind == Kind::Equation)
    return make_list({rules});
  return rules;
}

bool same_slots(const std::vector<Index>& a, const std::vector<Index>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i] == b[i])) return false;
  return true;
}

bool same_signature(const std::vector<Index>& a, const std::vector<Index>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].variance != b[i].variance) return false;
  return true;
}

// Abstract (non-coordinate) index names used anywhere in the expression.
// Component-table entries hold concrete data and are not descended into.
void gather_abstract_names(const ExprPtr& e, const PropertyRegistry& reg,
                           std::set<std::string>& out) {
  for (const auto& ix : e->indices)
    if (!reg.is_coordinate(ix.name)) out.insert(ix.name);
  if (e->kind == Kind::Table) return;
  for (const auto& c : e->children) gather_abstract_names(c, reg, out);
}

// ---------------------------------------------------------------------------
// cell evaluation
// ---------------------------------------------------------------------------

struct Evaluator {
  const ComponentRules& rules;
  const PropertyRegistry& reg;

  using Assign = std::map<std::string, std::string>;

  Index concrete(const Index& slot, const Assign& assign) const {
    if (reg.is_coordinate(slot.name)) return slot;
    auto it = assign.find(slot.name);
    if (it == assign.end())
      throw EngineError(ErrorKind::CannotEnumerate,
                        "index " + slot.name + " has no assigned value");
    return Index{it->second, slot.variance};
  }

  const std::vector<std::string>& values_of(const std::string& name) const {
    const auto* vals = reg.index_values(name);
    if (!vals)
      throw EngineError(ErrorKind::CannotEnumerate,
                        "index " + name + " has no declared values");
    return *vals;
  }

  ExprPtr cell(const ExprPtr& e, const Assign& assign) const {
    switch (e->kind) {
      case Kind::Rational:
      case Kind::Symbol:
        return e;
      case Kind::Sum: {
        std::vector<ExprPtr> terms;
        terms.reserve(e->children.size());
        for (const auto& t : e->children) terms.push_back(cell(t, assign));
        return make_sum(std::move(terms));
      }
      case Kind::Function:
        return make_function(e->name, cell(e->children[0], assign));
      case Kind::Power:
        return make_power(cell(e->children[0], assign),
                          cell(e->children[1], assign));
      case Kind::Product:
      case Kind::Tensor:
      case Kind::Table:
      case Kind::Derivative:
        return term_cell(e, assign);
      case Kind::Equation:
        return make_equation(cell(e->children[0], assign),
                             cell(e->children[1], assign));
      default:
        throw EngineError(ErrorKind::NotScalar,
                          "cannot evaluate this expression to components");
    }
  }

  // One term: expand dummy pairs into explicit sums over declared values,
  // then evaluate the factors.
  ExprPtr term_cell(const ExprPtr& t, const Assign& assign) const {
    IndexCounts counts = index_profile(t, reg);
    for (const auto& name : counts.order) {
      if (assign.count(name)) continue;
      const auto& rec = counts.records.at(name);
      if (rec.count == 1)
        throw EngineError(ErrorKind::CannotEnumerate,
                          "index " + name + " has no assigned value");
      if (rec.count == 2) {
        std::vector<ExprPtr> terms;
        for (const auto& v : values_of(name)) {
          Assign extended = assign;
          extended[name] = v;
          terms.push_back(term_cell(t, extended));
        }
        return make_sum(std::move(terms));
      }
    }
    if (t->kind != Kind::Product) return factor_cell(t, assign);
    std::vector<ExprPtr> factors;
    factors.reserve(t->children.size());
    for (const auto& f : t->children) factors.push_back(factor_cell(f, assign));
    return make_product(std::move(factors));
  }

  ExprPtr factor_cell(const ExprPtr& f, const Assign& assign) const {
    switch (f->kind) {
      case Kind::Rational:
      case Kind::Symbol:
        return f;
      case Kind::Sum:
      case Kind::Function:
      case Kind::Power:
      case Kind::Product:
        return cell(f, assign);
      case Kind::Tensor: {
        std::vector<Index> tuple;
        tuple.reserve(f->indices.size());
        for (const auto& ix : f->indices) tuple.push_back(concrete(ix, assign));
        auto hit = rules.find(f->name, tuple);
        if (!hit)
          throw EngineError(ErrorKind::UnknownHead,
                            "no component rules for tensor " + f->name);
        return *hit;
      }
      case Kind::Table: {
        std::vector<Index> tuple;
        tuple.reserve(f->indices.size());
        for (const auto& ix : f->indices) tuple.push_back(concrete(ix, assign));
        for (const auto& entry : f->children) {
          const ExprPtr& elhs = entry->children[0];
          if (elhs->kind == Kind::Tensor && same_slots(elhs->indices, tuple))
            return entry->children[1];
        }
        return zero();
      }
      case Kind::Derivative: {
        ExprPtr inner = cell(f->children[0], assign);
        for (const auto& ix : f->indices) {
          Index c = concrete(ix, assign);
          inner = diff(simplify(inner), c.name);
        }
        return inner;
      }
      default:
        throw EngineError(ErrorKind::NotScalar,
                          "cannot evaluate this factor to components");
    }
  }
};

// ---------------------------------------------------------------------------
// determinants / inverse
// ---------------------------------------------------------------------------

using Matrix = std::vector<std::vector<ExprPtr>>;

Matrix minor_of(const Matrix& m, std::size_t row, std::size_t col) {
  Matrix out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i == row) continue;
    std::vector<ExprPtr> r;
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (j == col) continue;
      r.push_back(m[i][j]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

ExprPtr determinant(const Matrix& m) {
  if (m.size() == 1) return m[0][0];
  std::vector<ExprPtr> terms;
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (is_zero(m[0][j])) continue;
    ExprPtr sub = determinant(minor_of(m, 0, j));
    ExprPtr term = make_product({m[0][j], sub});
    if (j % 2 == 1) term = make_product({make_rational(Rational(-1)), term});
    terms.push_back(term);
  }
  return make_sum(std::move(terms));
}

}  // namespace

// ---------------------------------------------------------------------------
// ComponentRules
// ---------------------------------------------------------------------------

ComponentRules::ComponentRules(const ExprPtr& rules, const PropertyRegistry& reg) {
  ExprPtr list = unwrap_rules(rules);
  if (list->kind != Kind::List)
    throw EngineError(ErrorKind::RuleShape,
                      "component rules must be a list of equations");
  for (const auto& entry : list->children) {
    if (entry->kind != Kind::Equation || entry->children.size() != 2)
      throw EngineError(ErrorKind::RuleShape,
                        "component rules must be a list of equations");
    const ExprPtr& lh = entry->children[0];
    if (lh->kind != Kind::Tensor)
      throw EngineError(ErrorKind::RuleShape,
                        "component assignment must name a tensor component");
    for (const auto& ix : lh->indices) {
      if (!reg.is_coordinate(ix.name))
        throw EngineError(ErrorKind::RuleShape,
                          "component assignment indices must be coordinates, got " +
                              ix.name);
    }
    for (const auto& prev : entries_) {
      if (prev.lhs->name == lh->name && same_slots(prev.lhs->indices, lh->indices))
        throw EngineError(ErrorKind::DuplicateAssignment,
                          "duplicate component assignment for " + lh->name);
    }
    entries_.push_back({lh, entry->children[1]});
  }
}

std::optional<ExprPtr> ComponentRules::find(const std::string& name,
                                            const std::vector<Index>& slots) const {
  bool head_known = false;
  for (const auto& e : entries_) {
    if (e.lhs->name != name) continue;
    if (!same_signature(e.lhs->indices, slots)) continue;
    head_known = true;
    if (same_slots(e.lhs->indices, slots)) return e.rhs;
  }
  if (head_known) return zero();
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// complete
// ---------------------------------------------------------------------------

ExprPtr complete(const ExprPtr& rules, const ExprPtr& pattern,
                 const PropertyRegistry& reg) {
  if (pattern->kind != Kind::Tensor || pattern->indices.size() != 2)
    throw EngineError(ErrorKind::RuleShape,
                      "inverse-metric pattern must be a rank-2 tensor");
  if (!reg.lookup(pattern, PropKind::InverseMetric))
    throw EngineError(ErrorKind::MissingProperty,
                      "pattern " + pattern->name +
                          " does not carry the InverseMetric property");

  ExprPtr list = unwrap_rules(rules);
  ComponentRules cr(list, reg);

  // The metric head is whichever listed head carries the Metric property.
  std::string metric_head;
  std::vector<Index> sample;
  for (const auto& e : cr.entries()) {
    if (reg.lookup(e.lhs, PropKind::Metric)) {
      metric_head = e.lhs->name;
      sample = e.lhs->indices;
      break;
    }
  }
  if (metric_head.empty())
    throw EngineError(ErrorKind::MissingProperty,
                      "component rules contain no metric components");

  const auto* values = reg.index_values(pattern->indices[0].name);
  if (!values || values->empty())
    throw EngineError(ErrorKind::CannotEnumerate,
                      "index " + pattern->indices[0].name +
                          " has no declared values");
  const std::size_t n = values->size();

  Matrix m(n, std::vector<ExprPtr>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<Index> tuple{Index{(*values)[i], sample[0].variance},
                               Index{(*values)[j], sample[1].variance}};
      auto hit = cr.find(metric_head, tuple);
      m[i][j] = hit ? *hit : zero();
    }
  }

  ExprPtr det = simplify(determinant(m));
  if (is_zero(det))
    throw EngineError(ErrorKind::SingularMetric, "metric determinant is zero");
  ExprPtr det_inv = make_power(det, make_rational(Rational(-1)));

  std::vector<ExprPtr> out = list->children;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      // inverse[i][j] = cofactor(j, i) / det
      ExprPtr cof = determinant(minor_of(m, j, i));
      if (((i + j) % 2) == 1)
        cof = make_product({make_rational(Rational(-1)), cof});
      ExprPtr val = simplify(make_product({cof, det_inv}));
      if (is_zero(val)) continue;
      ExprPtr lhs = make_tensor(
          pattern->name, {Index{(*values)[i], pattern->indices[0].variance},
                          Index{(*values)[j], pattern->indices[1].variance}});
      out.push_back(make_equation(lhs, val));
    }
  }
  ExprPtr extended = make_list(std::move(out));
  ComponentRules validate(extended, reg);  // rejects duplicate assignments
  return extended;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

namespace {

ExprPtr evaluate_expr(const ExprPtr& expr, const ExprPtr& lhs_hint,
                      const ComponentRules& cr, const PropertyRegistry& reg) {
  // Every abstract index must be enumerable before we start.
  std::set<std::string> names;
  gather_abstract_names(expr, reg, names);
  for (const auto& n : names) {
    auto pos = reg.index_position(n);
    if (!pos || *pos == IndexPosition::Free)
      throw EngineError(ErrorKind::CannotEnumerate,
                        "index " + n +
                            " has position=free and cannot be enumerated");
    if (!reg.index_values(n))
      throw EngineError(ErrorKind::CannotEnumerate,
                        "index " + n + " has no declared values");
  }

  Evaluator ev{cr, reg};

  std::vector<Index> frees = free_indices(expr, reg);
  if (frees.empty()) return simplify(ev.cell(expr, {}));

  // Enumerate in left-hand-side slot order when one is available; the first
  // index varies slowest.
  if (lhs_hint && lhs_hint->kind == Kind::Tensor) {
    std::vector<Index> ordered;
    for (const auto& slot : lhs_hint->indices) {
      for (const auto& f : frees)
        if (f.name == slot.name) ordered.push_back(f);
    }
    for (const auto& f : frees) {
      bool present = false;
      for (const auto& o : ordered)
        if (o.name == f.name) present = true;
      if (!present) ordered.push_back(f);
    }
    frees = std::move(ordered);
  }

  std::vector<const std::vector<std::string>*> axes;
  axes.reserve(frees.size());
  for (const auto& f : frees) axes.push_back(&ev.values_of(f.name));

  std::vector<ExprPtr> entries;
  std::vector<std::size_t> pos(frees.size(), 0);
  bool done = false;
  while (!done) {
    Evaluator::Assign assign;
    std::map<std::string, std::string> renames;
    for (std::size_t i = 0; i < frees.size(); ++i) {
      assign[frees[i].name] = (*axes[i])[pos[i]];
      renames[frees[i].name] = (*axes[i])[pos[i]];
    }
    ExprPtr val = simplify(ev.cell(expr, assign));
    if (!is_zero(val)) {
      ExprPtr label =
          rename_indices(lhs_hint ? lhs_hint : expr, renames);
      entries.push_back(make_equation(label, val));
    }
    // odometer: last position fastest
    std::size_t k = frees.size();
    while (k > 0) {
      --k;
      if (++pos[k] < axes[k]->size()) break;
      pos[k] = 0;
      if (k == 0) done = true;
    }
  }

  if (entries.empty()) return zero();
  if (lhs_hint && lhs_hint->kind == Kind::Tensor)
    return make_table(lhs_hint->name, lhs_hint->indices, std::move(entries));
  return make_list(std::move(entries));
}

}  // namespace

ExprPtr evaluate(const ExprPtr& target, const ExprPtr& rules, bool rhs_only,
                 const PropertyRegistry& reg) {
  ComponentRules cr(rules, reg);
  if (target->kind == Kind::Equation) {
    const ExprPtr& lh = target->children[0];
    const ExprPtr& rh = target->children[1];
    ExprPtr new_rhs = evaluate_expr(rh, lh, cr, reg);
    ExprPtr new_lhs = rhs_only ? lh : evaluate_expr(lh, nullptr, cr, reg);
    return make_equation(new_lhs, new_rhs);
  }
  return evaluate_expr(target, nullptr, cr, reg);
}

// ---------------------------------------------------------------------------
// curvature pipelines
// ---------------------------------------------------------------------------

namespace {

struct GeometrySetup {
  std::string metric_head;
  std::string inverse_head;
  std::string deriv_head;
  std::vector<std::string> names;  // five fixed-position index names
};

GeometrySetup geometry_setup(const ComponentRules& cr, const PropertyRegistry& reg) {
  GeometrySetup s;
  for (const auto& e : cr.entries()) {
    if (s.metric_head.empty() && reg.lookup(e.lhs, PropKind::Metric))
      s.metric_head = e.lhs->name;
    if (s.inverse_head.empty() && reg.lookup(e.lhs, PropKind::InverseMetric))
      s.inverse_head = e.lhs->name;
  }
  if (s.metric_head.empty() || s.inverse_head.empty())
    throw EngineError(ErrorKind::MissingProperty,
                      "rules must contain metric and inverse-metric components");
  auto dh = reg.first_head(PropKind::PartialDerivative);
  if (!dh) dh = reg.first_head(PropKind::Derivative);
  if (!dh)
    throw EngineError(ErrorKind::MissingProperty,
                      "no derivative operator declared");
  s.deriv_head = *dh;
  for (const auto& p : reg.index_pool()) {
    auto pos = reg.index_position(p);
    if (pos && *pos == IndexPosition::Fixed && reg.index_values(p))
      s.names.push_back(p);
    if (s.names.size() == 5) break;
  }
  if (s.names.size() < 5)
    throw EngineError(ErrorKind::CannotEnumerate,
                      "need at least five declared fixed-position index names");
  return s;
}

Index up(const std::string& n) { return Index{n, Variance::Upper}; }
Index dn(const std::string& n) { return Index{n, Variance::Lower}; }

}  // namespace

ExprPtr riemann_pipeline(const ExprPtr& rules, const PropertyRegistry& reg) {
  ExprPtr list = unwrap_rules(rules);
  ComponentRules cr(list, reg);
  GeometrySetup s = geometry_setup(cr, reg);
  const std::string& a = s.names[0];
  const std::string& b = s.names[1];
  const std::string& c = s.names[2];
  const std::string& d = s.names[3];
  const std::string& e = s.names[4];

  auto D = [&](const std::string& ix, ExprPtr operand) {
    return make_derivative(s.deriv_head, {dn(ix)}, std::move(operand));
  };
  auto G = [&](const std::string& u, const std::string& l1, const std::string& l2) {
    return make_tensor("Gamma", {up(u), dn(l1), dn(l2)});
  };
  ExprPtr half = make_rational(Rational(1, 2));
  ExprPtr g_ad = make_tensor(s.inverse_head, {up(a), up(d)});
  auto gl = [&](const std::string& i, const std::string& j) {
    return make_tensor(s.metric_head, {dn(i), dn(j)});
  };
  ExprPtr gamma_rhs = make_product(
      {half, g_ad,
       make_sum({D(c, gl(d, b)), D(b, gl(d, c)),
                 make_product({make_rational(Rational(-1)), D(d, gl(b, c))})})});
  ExprPtr gamma_eq = make_equation(G(a, b, c), gamma_rhs);
  ExprPtr gamma_tab = evaluate(gamma_eq, list, true, reg);

  auto R4 = [&](const std::string& u, const std::string& l1,
                const std::string& l2, const std::string& l3) {
    return make_tensor("R", {up(u), dn(l1), dn(l2), dn(l3)});
  };
  ExprPtr riemann_rhs = make_sum(
      {D(c, G(a, b, d)),
       make_product({make_rational(Rational(-1)), D(d, G(a, b, c))}),
       make_product({G(a, e, c), G(e, b, d)}),
       make_product({make_rational(Rational(-1)), G(a, e, d), G(e, b, c)})});
  ExprPtr riemann_eq = make_equation(R4(a, b, c, d), riemann_rhs);
  ExprPtr spliced = substitute(riemann_eq, gamma_tab, reg);
  return evaluate(spliced, list, true, reg);
}

std::pair<ExprPtr, ExprPtr> ricci_and_scalar(const ExprPtr& rules,
                                             const PropertyRegistry& reg) {
  ExprPtr list = unwrap_rules(rules);
  ComponentRules cr(list, reg);
  GeometrySetup s = geometry_setup(cr, reg);
  const std::string& a = s.names[0];
  const std::string& b = s.names[1];
  const std::string& c = s.names[2];

  ExprPtr riemann = riemann_pipeline(list, reg);

  ExprPtr ricci_eq = make_equation(
      make_tensor("R", {dn(b), dn(c)}),
      make_tensor("R", {up(a), dn(b), dn(a), dn(c)}));
  ricci_eq = substitute(ricci_eq, riemann, reg);
  ExprPtr ricci = evaluate(ricci_eq, list, true, reg);

  ExprPtr scalar_eq = make_equation(
      make_symbol("R"),
      make_product({make_tensor("R", {dn(b), dn(c)}),
                    make_tensor(s.inverse_head, {up(b), up(c)})}));
  scalar_eq = substitute(scalar_eq, ricci, reg);
  ExprPtr scalar = evaluate(scalar_eq, list, true, reg);
  return {ricci, scalar->children[1]};
}

}  // namespace tce
