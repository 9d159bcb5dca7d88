#pragma once

#include <map>
#include <set>
#include <string>

#include "tce/expr.hpp"
#include "tce/properties.hpp"

namespace tce {

// What a pattern index name is bound to at a match site. `flipped` records
// that the site slot has the opposite variance from the pattern slot, which
// is only legal for position=free indices (the rule is then applied in its
// raised/lowered form, so template occurrences flip too).
struct IndexBinding {
  std::string name;
  bool flipped = false;
};
using Bindings = std::map<std::string, IndexBinding>;

// Structural match of a single-object pattern (symbol, tensor,
// derivative-of-object, accent-of-object, function) against a node.
// Wildcard patterns match anything. Extends `bindings` on success; on
// failure `bindings` content is unspecified, start from a fresh map.
bool match_object(const ExprPtr& pattern, const ExprPtr& node,
                  const PropertyRegistry& reg, Bindings& bindings);

// Build the replacement: bound pattern indices are renamed (and flipped where
// the match site demanded it); template-local dummies are freshened from the
// declared pool avoiding `used_names`, which is grown by the new names.
ExprPtr instantiate(const ExprPtr& templ, const Bindings& bindings,
                    const PropertyRegistry& reg, std::set<std::string>& used_names);

// Leftmost-innermost, non-overlapping rewrite of every match of rule's lhs
// by its rhs. `rule` is an equation or rule node. An equation whose rhs is a
// component-rule list splices in a slot-carrying Table at each match site.
// Free indices of lhs and rhs must agree (rhs 0 is always allowed).
ExprPtr match_replace(const ExprPtr& e, const ExprPtr& rule,
                      const PropertyRegistry& reg);

// Shared validation: returns {lhs, rhs-as-template}. Throws RuleShape.
std::pair<ExprPtr, ExprPtr> split_rule(const ExprPtr& rule, const PropertyRegistry& reg);

}  // namespace tce
