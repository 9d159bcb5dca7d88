#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tce/expr.hpp"
#include "tce/properties.hpp"

namespace tce {

// Sparse component assignments: tensor head + concrete coordinate index
// tuple -> scalar value. Built from a list of equations such as
// { g_{theta theta} = r**2, ... }; unlisted tuples of a listed head are zero.
class ComponentRules {
 public:
  ComponentRules() = default;
  // `rules` is a List of equations (an equation whose rhs is such a list is
  // unwrapped). Throws on malformed entries or duplicate assignments.
  ComponentRules(const ExprPtr& rules, const PropertyRegistry& reg);

  struct Entry {
    ExprPtr lhs;  // tensor with concrete coordinate indices
    ExprPtr rhs;  // scalar value
  };
  const std::vector<Entry>& entries() const { return entries_; }

  // Value for an exact head + slot tuple; zero when the head signature is
  // known but the tuple is not listed; nullopt when the head is unknown.
  std::optional<ExprPtr> find(const std::string& name,
                              const std::vector<Index>& slots) const;

 private:
  std::vector<Entry> entries_;
};

// Extend metric component rules with the symbolic inverse metric (cofactor
// expansion + simplify). `pattern` names the inverse head (e.g. g^{alpha
// beta}) and must carry the InverseMetric property. Returns the extended
// list; a vanishing determinant reports a singular metric.
ExprPtr complete(const ExprPtr& rules, const ExprPtr& pattern,
                 const PropertyRegistry& reg);

// Expand all abstract indices of `target` over their declared coordinate
// values: dummy pairs become explicit sums, derivatives with concrete
// indices apply the scalar kernel, tensor heads are looked up in `rules` or
// in spliced component tables, and every cell is simplified. An equation
// keeps its left-hand side and receives a component table (or scalar) on the
// right; `rhs_only=false` additionally evaluates the left-hand side.
ExprPtr evaluate(const ExprPtr& target, const ExprPtr& rules, bool rhs_only,
                 const PropertyRegistry& reg);

// Convenience composition: Christoffel symbols from the completed metric
// rules, then the Riemann tensor R^a_{bcd} = dGamma^a_{bd}/dx^c - ... as a
// component-table equation. Requires at least five declared fixed-position
// index names and both metric and inverse-metric components in `rules`.
ExprPtr riemann_pipeline(const ExprPtr& rules, const PropertyRegistry& reg);

// Ricci tensor (trace of Riemann over slots 1 and 3) and scalar curvature
// (full contraction with the inverse metric).
std::pair<ExprPtr, ExprPtr> ricci_and_scalar(const ExprPtr& rules,
                                             const PropertyRegistry& reg);

}  // namespace tce
