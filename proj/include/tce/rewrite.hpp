#pragma once

#include "tce/expr.hpp"
#include "tce/properties.hpp"

namespace tce {

// Expand products over sums, apply derivative/accent linearity (rational
// coefficients move out of derivative operands), keep integrals intact.
// No product rule and no binomial expansion of powers.
ExprPtr distribute(const ExprPtr& e, const PropertyRegistry& reg);

// Sort the factors of every product into the engine's total order.
ExprPtr sort_product(const ExprPtr& e, const PropertyRegistry& reg);

// Merge structurally equal terms of every sum (exact rational coefficient
// arithmetic, first-appearance order, zero terms dropped). Also pulls a
// rational coefficient out of single-term integrands so it can merge with
// coefficients outside the integral.
ExprPtr collect_terms(const ExprPtr& e, const PropertyRegistry& reg);

// Per-term canonical form: minimal representative over dummy-index
// relabelings (onto the declared pool), paired raise/lower flips
// (position=free only) and declared (anti)symmetric slot permutations,
// tracking sign. A term with more than eight distinct abstract indices is
// rejected (term-too-large); an antisymmetric tensor carrying a repeated
// index name collapses the term to zero.
ExprPtr canonicalise(const ExprPtr& e, const PropertyRegistry& reg);

// Apply a rule (equation or lhs->rhs, or a list of them) everywhere.
ExprPtr substitute(const ExprPtr& e, const ExprPtr& rule, const PropertyRegistry& reg);

// First-order variation: sum over single-occurrence replacements of the
// rule's lhs in every term; occurrences under derivatives vary in place.
ExprPtr vary(const ExprPtr& e, const ExprPtr& rule, const PropertyRegistry& reg);

// Inside every integral, move derivatives off the factor containing the
// marker object onto the complementary factors (sign flip, boundary terms
// dropped). Terms without the marker are left alone.
ExprPtr integrate_by_parts(const ExprPtr& e, const ExprPtr& marker,
                           const PropertyRegistry& reg);

}  // namespace tce
