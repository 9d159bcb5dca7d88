#include "tce/index_ops.hpp"

#include <algorithm>

#include "tce/error.hpp"

namespace tce {

void IndexCounts::add(const Index& idx) {
  auto& rec = records[idx.name];
  if (rec.count == 0) order.push_back(idx.name);
  if (++rec.count > 2)
    throw EngineError(ErrorKind::MalformedTerm,
                      "index " + idx.name + " appears more than twice in a term");
  rec.variances.push_back(idx.variance);
}

void IndexCounts::merge(const IndexCounts& other) {
  for (const auto& name : other.order) {
    const auto& orec = other.records.at(name);
    auto& rec = records[name];
    if (rec.count == 0) order.push_back(name);
    rec.count += orec.count;
    if (rec.count > 2)
      throw EngineError(ErrorKind::MalformedTerm,
                        "index " + name + " appears more than twice in a term");
    rec.variances.insert(rec.variances.end(), orec.variances.begin(),
                         orec.variances.end());
  }
}

namespace {

// Visible part of a profile: names occurring exactly once, with variance.
std::vector<Index> open_part(const IndexCounts& counts) {
  std::vector<Index> open;
  for (const auto& name : counts.order) {
    const auto& rec = counts.records.at(name);
    if (rec.count == 1) open.push_back({name, rec.variances[0]});
  }
  return open;
}

bool same_open_set(const std::vector<Index>& a, const std::vector<Index>& b) {
  if (a.size() != b.size()) return false;
  for (const auto& idx : a)
    if (std::find(b.begin(), b.end(), idx) == b.end()) return false;
  return true;
}

}  // namespace

IndexCounts index_profile(const ExprPtr& e, const PropertyRegistry& reg) {
  IndexCounts counts;
  switch (e->kind) {
    case Kind::Rational:
    case Kind::Symbol:
    case Kind::Wildcard:
      return counts;
    case Kind::Tensor:
    case Kind::Table:
      for (const auto& idx : e->indices)
        if (!reg.is_coordinate(idx.name)) counts.add(idx);
      return counts;
    case Kind::Derivative:
      for (const auto& idx : e->indices)
        if (!reg.is_coordinate(idx.name)) counts.add(idx);
      counts.merge(index_profile(e->children[0], reg));
      return counts;
    case Kind::Sum: {
      // Terms must agree on what they expose; internally-paired names are
      // still reported so an outer occurrence of the same name is caught.
      bool first = true;
      std::vector<Index> open;
      for (const auto& t : e->children) {
        if (is_zero(t)) continue;
        IndexCounts tc = index_profile(t, reg);
        std::vector<Index> topen = open_part(tc);
        if (first) {
          counts = tc;
          open = std::move(topen);
          first = false;
        } else {
          if (!same_open_set(open, topen))
            throw EngineError(ErrorKind::InconsistentSum,
                              "sum terms disagree on free indices");
          for (const auto& name : tc.order)
            if (!counts.has(name)) {
              counts.order.push_back(name);
              counts.records[name] = tc.records.at(name);
            }
        }
      }
      return counts;
    }
    case Kind::Equation:
    case Kind::RuleNode: {
      IndexCounts l = index_profile(e->children[0], reg);
      IndexCounts r = index_profile(e->children[1], reg);
      if (!is_zero(e->children[0]) && !is_zero(e->children[1]) &&
          !same_open_set(open_part(l), open_part(r)))
        throw EngineError(ErrorKind::InconsistentSum,
                          "equation sides disagree on free indices");
      return is_zero(e->children[0]) ? r : l;
    }
    case Kind::List:
      for (const auto& item : e->children) index_profile(item, reg);
      return counts;
    default:
      for (const auto& c : e->children) counts.merge(index_profile(c, reg));
      return counts;
  }
}

std::vector<Index> free_indices(const ExprPtr& e, const PropertyRegistry& reg) {
  IndexCounts counts = index_profile(e, reg);
  std::vector<Index> free;
  for (const auto& name : counts.order) {
    const auto& rec = counts.records.at(name);
    if (rec.count == 1) {
      free.push_back({name, rec.variances[0]});
    } else {
      auto pos = reg.index_position(name);
      bool fixed = pos.has_value() && *pos == IndexPosition::Fixed;
      if (!fixed && rec.variances[0] == rec.variances[1])
        throw EngineError(ErrorKind::MalformedTerm,
                          "contracted index " + name +
                              " must appear once upper and once lower");
    }
  }
  return free;
}

std::vector<std::string> dummy_names(const ExprPtr& term, const PropertyRegistry& reg) {
  IndexCounts counts = index_profile(term, reg);
  std::vector<std::string> dummies;
  for (const auto& name : counts.order)
    if (counts.records.at(name).count == 2) dummies.push_back(name);
  return dummies;
}

ExprPtr rename_indices(const ExprPtr& e, const std::map<std::string, std::string>& renames) {
  if (renames.empty()) return e;
  std::vector<Index> indices = e->indices;
  bool touched = false;
  for (auto& idx : indices) {
    auto it = renames.find(idx.name);
    if (it != renames.end()) {
      idx.name = it->second;
      touched = true;
    }
  }
  std::vector<ExprPtr> children;
  children.reserve(e->children.size());
  bool child_touched = false;
  for (const auto& c : e->children) {
    ExprPtr nc = rename_indices(c, renames);
    child_touched |= nc.get() != c.get();
    children.push_back(std::move(nc));
  }
  if (!touched && !child_touched) return e;
  if (e->kind == Kind::Tensor) return make_tensor(e->name, std::move(indices));
  if (e->kind == Kind::Derivative)
    return make_derivative(e->name, std::move(indices), children[0]);
  if (e->kind == Kind::Table)
    return make_table(e->name, std::move(indices), std::move(children));
  return with_children(e, std::move(children));
}

ExprPtr flip_indices(const ExprPtr& e, const std::set<std::string>& names) {
  if (names.empty()) return e;
  std::vector<Index> indices = e->indices;
  bool touched = false;
  for (auto& idx : indices)
    if (names.count(idx.name)) {
      idx.variance = flip(idx.variance);
      touched = true;
    }
  std::vector<ExprPtr> children;
  children.reserve(e->children.size());
  bool child_touched = false;
  for (const auto& c : e->children) {
    ExprPtr nc = flip_indices(c, names);
    child_touched |= nc.get() != c.get();
    children.push_back(std::move(nc));
  }
  if (!touched && !child_touched) return e;
  if (e->kind == Kind::Tensor) return make_tensor(e->name, std::move(indices));
  if (e->kind == Kind::Derivative)
    return make_derivative(e->name, std::move(indices), children[0]);
  if (e->kind == Kind::Table)
    return make_table(e->name, std::move(indices), std::move(children));
  return with_children(e, std::move(children));
}

void collect_index_names(const ExprPtr& e, std::set<std::string>& out) {
  for (const auto& idx : e->indices) out.insert(idx.name);
  for (const auto& c : e->children) collect_index_names(c, out);
}

namespace {

bool factor_has_sum(const ExprPtr& f) {
  if (f->kind == Kind::Sum) return true;
  if (f->kind == Kind::Derivative || f->kind == Kind::Accent ||
      f->kind == Kind::Power || f->kind == Kind::Integral)
    for (const auto& c : f->children)
      if (factor_has_sum(c)) return true;
  return false;
}

ExprPtr rename_term(const ExprPtr& term, const PropertyRegistry& reg,
                    const std::set<std::string>& reserved);

// Recurse into sum substructure of a factor, renaming each branch with the
// surrounding term's names reserved.
ExprPtr rename_inside(const ExprPtr& f, const PropertyRegistry& reg,
                      const std::set<std::string>& reserved) {
  if (f->kind == Kind::Sum) {
    std::vector<ExprPtr> terms;
    terms.reserve(f->children.size());
    for (const auto& t : f->children) terms.push_back(rename_term(t, reg, reserved));
    return make_sum(std::move(terms));
  }
  if (f->kind == Kind::Derivative || f->kind == Kind::Accent ||
      f->kind == Kind::Power || f->kind == Kind::Integral) {
    std::vector<ExprPtr> children;
    children.reserve(f->children.size());
    for (const auto& c : f->children) children.push_back(rename_inside(c, reg, reserved));
    return with_children(f, std::move(children));
  }
  return f;
}

ExprPtr rename_term(const ExprPtr& term, const PropertyRegistry& reg,
                    const std::set<std::string>& reserved) {
  IndexCounts counts = index_profile(term, reg);
  if (factor_has_sum(term) ||
      (term->kind == Kind::Product &&
       std::any_of(term->children.begin(), term->children.end(), factor_has_sum))) {
    // Pairs spanning sum factors keep their names; branches are handled
    // with this term's names off-limits.
    std::set<std::string> inner_reserved = reserved;
    collect_index_names(term, inner_reserved);
    if (term->kind == Kind::Product) {
      std::vector<ExprPtr> factors;
      factors.reserve(term->children.size());
      for (const auto& f : term->children)
        factors.push_back(rename_inside(f, reg, inner_reserved));
      return make_product(std::move(factors));
    }
    return rename_inside(term, reg, inner_reserved);
  }

  std::vector<std::string> dummies;
  std::set<std::string> frees;
  for (const auto& name : counts.order) {
    if (counts.records.at(name).count == 2)
      dummies.push_back(name);
    else
      frees.insert(name);
  }
  if (dummies.empty()) return term;

  std::vector<std::string> targets;
  for (const auto& name : reg.index_pool()) {
    if (targets.size() == dummies.size()) break;
    if (frees.count(name) || reserved.count(name)) continue;
    targets.push_back(name);
  }
  if (reg.index_pool().empty()) return term;  // nothing declared: leave names
  if (targets.size() < dummies.size())
    throw EngineError(ErrorKind::OutOfIndices,
                      "declared index pool exhausted while renaming dummies");
  std::map<std::string, std::string> renames;
  for (size_t i = 0; i < dummies.size(); ++i)
    if (dummies[i] != targets[i]) renames[dummies[i]] = targets[i];
  return rename_indices(term, renames);
}

}  // namespace

ExprPtr rename_dummies(const ExprPtr& e, const PropertyRegistry& reg) {
  switch (e->kind) {
    case Kind::Sum: {
      std::vector<ExprPtr> terms;
      terms.reserve(e->children.size());
      for (const auto& t : e->children) terms.push_back(rename_dummies(t, reg));
      return make_sum(std::move(terms));
    }
    case Kind::Equation:
    case Kind::RuleNode:
    case Kind::List: {
      std::vector<ExprPtr> children;
      children.reserve(e->children.size());
      for (const auto& c : e->children) children.push_back(rename_dummies(c, reg));
      return with_children(e, std::move(children));
    }
    case Kind::Integral:
      return make_integral(rename_dummies(e->children[0], reg), e->name);
    default:
      return rename_term(e, reg, {});
  }
}

}  // namespace tce
