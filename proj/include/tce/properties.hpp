#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tce/expr.hpp"

namespace tce {

enum class PropKind {
  Indices,
  Coordinate,
  Derivative,
  PartialDerivative,
  AntiSymmetric,
  Symmetric,
  Depends,
  Accent,
  Metric,
  InverseMetric,
};

enum class IndexPosition { Free, Fixed };

// One option inside a `::Prop(...)` declaration. Positional arguments
// (Depends items) have an empty key; `values={a,b}` carries several items.
struct PropOption {
  std::string key;
  std::vector<ExprPtr> items;
};

struct Property {
  PropKind kind;
  IndexPosition position = IndexPosition::Free;  // Indices
  std::vector<std::string> values;               // Indices: coordinate names, declared order
  std::vector<ExprPtr> depends_on;               // Depends
};

const char* property_name(PropKind kind);
std::optional<PropKind> property_kind_from_name(const std::string& name);

// Declaration store. Built while a script's setup statements run, read-only
// afterwards; later declarations shadow earlier ones for the same pattern.
class PropertyRegistry {
public:
  // `pattern` is one declared object (a symbol, F_{\mu\nu}, \partial{#}, ...).
  // Throws on unknown properties/options, malformed patterns, or a
  // Symmetric/AntiSymmetric clash on the same head and rank.
  void attach(const ExprPtr& pattern, const std::string& prop,
              const std::vector<PropOption>& options);

  // Most recent property of the given kind whose pattern matches `node`.
  const Property* lookup(const ExprPtr& node, PropKind kind) const;

  bool is_coordinate(const std::string& name) const;
  std::optional<IndexPosition> index_position(const std::string& name) const;
  // Coordinate values an index ranges over, in declared order.
  const std::vector<std::string>* index_values(const std::string& name) const;
  // All declared index names, in declaration order (the dummy rename pool).
  const std::vector<std::string>& index_pool() const { return pool_; }

  bool is_antisymmetric(const ExprPtr& tensor) const {
    return lookup(tensor, PropKind::AntiSymmetric) != nullptr;
  }
  bool is_symmetric(const ExprPtr& tensor) const {
    return lookup(tensor, PropKind::Symmetric) != nullptr;
  }
  bool is_derivative_op(const ExprPtr& node) const {
    return lookup(node, PropKind::Derivative) != nullptr ||
           lookup(node, PropKind::PartialDerivative) != nullptr;
  }

  // True when `\partial` of this object can be nonzero: the object (or the
  // thing under its accents/derivatives) carries a Depends property, or it
  // is built from coordinates. Objects never declared to depend on anything
  // are constants.
  bool depends_nonconstant(const ExprPtr& node) const;

  // Head name of the first declaration carrying the given property
  // (e.g. the partial-derivative operator); empty when none is declared.
  std::optional<std::string> first_head(PropKind kind) const;

private:
  struct Entry {
    ExprPtr pattern;
    Property prop;
  };
  std::vector<Entry> entries_;
  std::vector<std::string> pool_;
  std::map<std::string, Property> index_info_;
  std::set<std::string> coordinates_;
};

// Does a declaration pattern cover this node? (head/kind/rank matching;
// variance is compared strictly only for slots whose pattern index is
// declared position=fixed).
bool pattern_covers(const ExprPtr& pattern, const ExprPtr& node,
                    const PropertyRegistry& reg);

}  // namespace tce
