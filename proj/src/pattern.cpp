#include "tce/pattern.hpp"

#include <algorithm>
#include <functional>

#include "tce/error.hpp"
#include "tce/index_ops.hpp"

namespace tce {

namespace {

bool position_allows_flip(const PropertyRegistry& reg, const std::string& name) {
  auto pos = reg.index_position(name);
  return !pos || *pos == IndexPosition::Free;
}

// Bind one pattern slot to one site slot. A variance mismatch is accepted
// only when both names sit in raisable (position=free) index sets.
bool bind_index(const Index& pat, const Index& site, const PropertyRegistry& reg,
                Bindings& bindings) {
  if (reg.is_coordinate(pat.name)) {
    return pat.name == site.name && pat.variance == site.variance;
  }
  bool flipped = pat.variance != site.variance;
  if (flipped && !(position_allows_flip(reg, pat.name) &&
                   position_allows_flip(reg, site.name))) {
    return false;
  }
  auto it = bindings.find(pat.name);
  if (it != bindings.end()) {
    return it->second.name == site.name && it->second.flipped == flipped;
  }
  bindings.emplace(pat.name, IndexBinding{site.name, flipped});
  return true;
}

bool bind_index_row(const std::vector<Index>& pat, const std::vector<Index>& site,
                    const PropertyRegistry& reg, Bindings& bindings) {
  if (pat.size() != site.size()) return false;
  for (std::size_t i = 0; i < pat.size(); ++i) {
    if (!bind_index(pat[i], site[i], reg, bindings)) return false;
  }
  return true;
}

}  // namespace

bool match_object(const ExprPtr& pattern, const ExprPtr& node,
                  const PropertyRegistry& reg, Bindings& bindings) {
  if (pattern->kind == Kind::Wildcard) return true;
  if (pattern->kind != node->kind) return false;
  switch (pattern->kind) {
    case Kind::Rational:
      return cmp(pattern->value, node->value) == 0;
    case Kind::Symbol:
      return pattern->name == node->name;
    case Kind::Tensor:
      return pattern->name == node->name &&
             bind_index_row(pattern->indices, node->indices, reg, bindings);
    case Kind::Derivative:
      return pattern->name == node->name &&
             bind_index_row(pattern->indices, node->indices, reg, bindings) &&
             match_object(pattern->children[0], node->children[0], reg, bindings);
    case Kind::Accent:
      return pattern->name == node->name &&
             match_object(pattern->children[0], node->children[0], reg, bindings);
    case Kind::Function:
      return pattern->name == node->name &&
             match_object(pattern->children[0], node->children[0], reg, bindings);
    default:
      // Composite patterns are rejected by rule validation; if one slips in
      // via a function argument, require an exact structural match.
      return structural_equal(pattern, node);
  }
}

ExprPtr instantiate(const ExprPtr& templ, const Bindings& bindings,
                    const PropertyRegistry& reg, std::set<std::string>& used_names) {
  // Template-local abstract index names (dummies of the replacement) must not
  // collide with anything else in the enclosing term, so they are renamed to
  // the first free names of the declared pool.
  std::vector<std::string> locals;
  std::set<std::string> seen;
  std::function<void(const ExprPtr&)> scan = [&](const ExprPtr& e) {
    for (const Index& ix : e->indices) {
      if (bindings.count(ix.name) || reg.is_coordinate(ix.name)) continue;
      if (seen.insert(ix.name).second) locals.push_back(ix.name);
    }
    for (const auto& c : e->children) scan(c);
  };
  scan(templ);

  std::set<std::string> avoid = used_names;
  for (const auto& [pat, site] : bindings) {
    (void)pat;
    avoid.insert(site.name);
  }
  std::map<std::string, std::string> fresh;
  const auto& pool = reg.index_pool();
  for (const std::string& local : locals) {
    if (pool.empty()) {
      // No declared index sets: keep the template's own names.
      if (avoid.count(local)) {
        throw EngineError(ErrorKind::OutOfIndices,
                          "no spare index name for '" + local + "' in replacement");
      }
      fresh[local] = local;
      avoid.insert(local);
      continue;
    }
    bool assigned = false;
    for (const std::string& cand : pool) {
      if (avoid.count(cand)) continue;
      fresh[local] = cand;
      avoid.insert(cand);
      assigned = true;
      break;
    }
    if (!assigned) {
      throw EngineError(ErrorKind::OutOfIndices,
                        "index set exhausted while instantiating replacement");
    }
  }

  std::function<ExprPtr(const ExprPtr&)> build = [&](const ExprPtr& e) -> ExprPtr {
    std::vector<Index> ix = e->indices;
    bool ix_changed = false;
    for (Index& s : ix) {
      auto it = bindings.find(s.name);
      if (it != bindings.end()) {
        Variance v = it->second.flipped ? flip(s.variance) : s.variance;
        if (s.name != it->second.name || s.variance != v) {
          s = Index{it->second.name, v};
          ix_changed = true;
        }
        continue;
      }
      auto fit = fresh.find(s.name);
      if (fit != fresh.end() && fit->second != s.name) {
        s.name = fit->second;
        ix_changed = true;
      }
    }
    std::vector<ExprPtr> ch;
    ch.reserve(e->children.size());
    bool ch_changed = false;
    for (const auto& c : e->children) {
      ExprPtr nc = build(c);
      ch_changed = ch_changed || nc.get() != c.get();
      ch.push_back(std::move(nc));
    }
    if (!ix_changed && !ch_changed) return e;
    auto n = std::make_shared<Expr>(*e);
    n->indices = std::move(ix);
    if (!ch_changed) return n;
    // Rebuild through the factories so product/sum invariants hold after a
    // child of a composite changed shape.
    return with_children(n, std::move(ch));
  };
  ExprPtr result = build(templ);
  collect_index_names(result, used_names);
  return result;
}

std::pair<ExprPtr, ExprPtr> split_rule(const ExprPtr& rule, const PropertyRegistry& reg) {
  if ((rule->kind != Kind::Equation && rule->kind != Kind::RuleNode) ||
      rule->children.size() != 2) {
    throw EngineError(ErrorKind::RuleShape, "a rule must have the form lhs -> rhs");
  }
  ExprPtr pat = lhs(rule);
  ExprPtr repl = rhs(rule);

  std::function<void(const ExprPtr&)> check_lhs = [&](const ExprPtr& e) {
    switch (e->kind) {
      case Kind::Symbol:
      case Kind::Rational:
      case Kind::Tensor:
        return;
      case Kind::Derivative:
      case Kind::Accent:
      case Kind::Function:
        check_lhs(e->children[0]);
        return;
      case Kind::Wildcard:
        throw EngineError(ErrorKind::RuleShape,
                          "'#' wildcards are only valid in property patterns");
      default:
        throw EngineError(ErrorKind::RuleShape,
                          "rule left-hand side must be a single named object");
    }
  };
  check_lhs(pat);

  // A component-rule list on the right of an equation defines the components
  // of the tensor on the left; splice it in as a slot-carrying table.
  if (repl->kind == Kind::List) {
    if (pat->kind != Kind::Tensor) {
      throw EngineError(ErrorKind::RuleShape,
                        "component lists can only replace a plain tensor");
    }
    for (const auto& entry : repl->children) {
      if (entry->kind != Kind::Equation) {
        throw EngineError(ErrorKind::RuleShape,
                          "component list entries must be equations");
      }
    }
    return {pat, make_table(pat->name, pat->indices, repl->children)};
  }

  if (!is_zero(repl)) {
    auto pf = free_indices(pat, reg);
    auto rf = free_indices(repl, reg);
    auto key = [](const std::vector<Index>& v) {
      std::vector<std::pair<std::string, Variance>> k;
      k.reserve(v.size());
      for (const auto& ix : v) k.emplace_back(ix.name, ix.variance);
      std::sort(k.begin(), k.end());
      return k;
    };
    if (key(pf) != key(rf)) {
      throw EngineError(ErrorKind::RuleShape,
                        "free indices differ between the two sides of the rule");
    }
  }
  return {pat, repl};
}

namespace {

struct Replacer {
  const ExprPtr& pat;
  const ExprPtr& repl;
  const PropertyRegistry& reg;

  // Bottom-up walk within one term; `used` accumulates every index name seen
  // or introduced so far so later instantiations stay collision-free.
  std::pair<ExprPtr, bool> walk(const ExprPtr& e, std::set<std::string>& used) {
    // Component tables and rule lists: entry left-hand sides are row labels,
    // only the stored values are live expressions.
    if (e->kind == Kind::Table || e->kind == Kind::List) {
      std::vector<ExprPtr> ch;
      ch.reserve(e->children.size());
      bool changed = false, replaced = false;
      for (const auto& entry : e->children) {
        if (entry->kind == Kind::Equation) {
          auto [nrhs, rep] = walk(rhs(entry), used);
          replaced = replaced || rep;
          if (nrhs.get() != rhs(entry).get()) {
            changed = true;
            ch.push_back(make_equation(lhs(entry), nrhs));
          } else {
            ch.push_back(entry);
          }
        } else {
          auto [ne, rep] = walk(entry, used);
          replaced = replaced || rep;
          changed = changed || ne.get() != entry.get();
          ch.push_back(std::move(ne));
        }
      }
      return {changed ? with_children(e, std::move(ch)) : e, replaced};
    }

    std::vector<ExprPtr> ch;
    ch.reserve(e->children.size());
    bool changed = false, replaced = false;
    for (const auto& c : e->children) {
      auto [nc, rep] = walk(c, used);
      replaced = replaced || rep;
      changed = changed || nc.get() != c.get();
      ch.push_back(std::move(nc));
    }
    ExprPtr node = changed ? with_children(e, std::move(ch)) : e;
    if (replaced) return {node, true};  // non-overlapping: parent is done

    Bindings b;
    if (match_object(pat, node, reg, b)) {
      return {instantiate(repl, b, reg, used), true};
    }
    return {node, false};
  }

  ExprPtr in_term(const ExprPtr& t) {
    std::set<std::string> used;
    collect_index_names(t, used);
    return walk(t, used).first;
  }

  ExprPtr all(const ExprPtr& e) {
    switch (e->kind) {
      case Kind::Sum:
      case Kind::Equation:
      case Kind::RuleNode:
      case Kind::List: {
        std::vector<ExprPtr> ch;
        ch.reserve(e->children.size());
        bool changed = false;
        for (const auto& c : e->children) {
          ExprPtr nc = all(c);
          changed = changed || nc.get() != c.get();
          ch.push_back(std::move(nc));
        }
        return changed ? with_children(e, std::move(ch)) : e;
      }
      default:
        return in_term(e);
    }
  }
};

}  // namespace

ExprPtr match_replace(const ExprPtr& e, const ExprPtr& rule, const PropertyRegistry& reg) {
  auto [pat, repl] = split_rule(rule, reg);
  Replacer r{pat, repl, reg};
  return r.all(e);
}

}  // namespace tce
