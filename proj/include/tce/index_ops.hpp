#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "tce/expr.hpp"
#include "tce/properties.hpp"

namespace tce {

// Occurrence counts of abstract index names in one term-like subtree.
// Coordinate-valued labels (declared ::Coordinate) are concrete and ignored.
// An index name appearing more than twice raises MalformedTerm; sums whose
// terms disagree on their visible (count-1) indices raise InconsistentSum.
struct IndexCounts {
  struct Record {
    int count = 0;
    std::vector<Variance> variances;  // in occurrence order, at most 2
  };
  std::vector<std::string> order;  // first-appearance order
  std::map<std::string, Record> records;

  void add(const Index& idx);
  void merge(const IndexCounts& other);
  bool has(const std::string& name) const { return records.count(name) > 0; }
};

IndexCounts index_profile(const ExprPtr& e, const PropertyRegistry& reg);

// Free (exactly-once) indices in first-appearance order. Validates the
// variance rule for dummies: a position=free (or undeclared) pair must be one
// upper and one lower; position=fixed pairs may repeat in any variance.
// Equations/rules check that both sides agree (a literal zero side matches
// anything); lists check each entry independently and have no free indices.
std::vector<Index> free_indices(const ExprPtr& e, const PropertyRegistry& reg);

// Names of dummy (exactly-twice) indices of a term, first-appearance order.
std::vector<std::string> dummy_names(const ExprPtr& term, const PropertyRegistry& reg);

// Rename per-term dummies to the declared pool in first-appearance order,
// skipping names taken by free indices. Idempotent; throws OutOfIndices when
// the pool cannot cover the dummies. Variances are preserved.
ExprPtr rename_dummies(const ExprPtr& e, const PropertyRegistry& reg);

// Substitute index names throughout (slots only, not symbols).
ExprPtr rename_indices(const ExprPtr& e, const std::map<std::string, std::string>& renames);

// Flip the variance of every slot occurrence of the given names.
ExprPtr flip_indices(const ExprPtr& e, const std::set<std::string>& names);

// Every index name occurring anywhere in the subtree (including coordinates).
void collect_index_names(const ExprPtr& e, std::set<std::string>& out);

}  // namespace tce
