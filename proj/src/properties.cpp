#include "tce/properties.hpp"

#include <algorithm>

#include "tce/error.hpp"

namespace tce {

const char* property_name(PropKind kind) {
  switch (kind) {
    case PropKind::Indices:          return "Indices";
    case PropKind::Coordinate:       return "Coordinate";
    case PropKind::Derivative:       return "Derivative";
    case PropKind::PartialDerivative:return "PartialDerivative";
    case PropKind::AntiSymmetric:    return "AntiSymmetric";
    case PropKind::Symmetric:        return "Symmetric";
    case PropKind::Depends:          return "Depends";
    case PropKind::Accent:           return "Accent";
    case PropKind::Metric:           return "Metric";
    case PropKind::InverseMetric:    return "InverseMetric";
  }
  return "?";
}

std::optional<PropKind> property_kind_from_name(const std::string& name) {
  static const std::map<std::string, PropKind> table = {
      {"Indices", PropKind::Indices},
      {"Coordinate", PropKind::Coordinate},
      {"Derivative", PropKind::Derivative},
      {"PartialDerivative", PropKind::PartialDerivative},
      {"AntiSymmetric", PropKind::AntiSymmetric},
      {"Symmetric", PropKind::Symmetric},
      {"Depends", PropKind::Depends},
      {"Accent", PropKind::Accent},
      {"Metric", PropKind::Metric},
      {"InverseMetric", PropKind::InverseMetric},
  };
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

bool pattern_covers(const ExprPtr& pattern, const ExprPtr& node,
                    const PropertyRegistry& reg) {
  if (pattern->kind == Kind::Wildcard) return true;
  switch (pattern->kind) {
    case Kind::Symbol:
      return node->kind == Kind::Symbol && node->name == pattern->name;
    case Kind::Tensor: {
      if (node->kind != Kind::Tensor && node->kind != Kind::Table) return false;
      if (node->name != pattern->name) return false;
      if (node->indices.size() != pattern->indices.size()) return false;
      for (size_t i = 0; i < pattern->indices.size(); ++i) {
        auto pos = reg.index_position(pattern->indices[i].name);
        bool strict = pos.has_value() && *pos == IndexPosition::Fixed;
        if (strict && node->indices[i].variance != pattern->indices[i].variance)
          return false;
      }
      return true;
    }
    case Kind::Derivative:
      // `\partial{#}` covers every derivative with that head.
      return node->kind == Kind::Derivative && node->name == pattern->name;
    case Kind::Accent:
      return node->kind == Kind::Accent && node->name == pattern->name;
    default:
      return false;
  }
}

namespace {

void require_no_options(const std::string& prop, const std::vector<PropOption>& options) {
  if (!options.empty())
    throw EngineError(ErrorKind::UnknownOption,
                      prop + " takes no options");
}

std::string symbol_name(const ExprPtr& e, const std::string& context) {
  if (e->kind != Kind::Symbol)
    throw EngineError(ErrorKind::UnknownOption,
                      context + " expects a symbol");
  return e->name;
}

}  // namespace

void PropertyRegistry::attach(const ExprPtr& pattern_in, const std::string& prop,
                              const std::vector<PropOption>& options) {
  auto kind = property_kind_from_name(prop);
  if (!kind)
    throw EngineError(ErrorKind::UnknownOption, "unknown property: " + prop);

  // Before a head is declared, the parser reads `\nabla{#}` as an accent;
  // store derivative declarations in derivative shape so lookups match.
  ExprPtr pattern = pattern_in;
  if ((*kind == PropKind::Derivative || *kind == PropKind::PartialDerivative) &&
      pattern->kind == Kind::Accent) {
    pattern = make_derivative(pattern->name, {}, pattern->children[0]);
  }

  Property p{*kind};
  switch (*kind) {
    case PropKind::Indices: {
      std::string name = symbol_name(pattern, "Indices object");
      for (const auto& opt : options) {
        if (opt.key == "position") {
          std::string v = symbol_name(opt.items.at(0), "position");
          if (v == "free")
            p.position = IndexPosition::Free;
          else if (v == "fixed")
            p.position = IndexPosition::Fixed;
          else
            throw EngineError(ErrorKind::UnknownOption, "position=" + v);
        } else if (opt.key == "values") {
          for (const auto& item : opt.items)
            p.values.push_back(symbol_name(item, "values entry"));
        } else {
          throw EngineError(ErrorKind::UnknownOption,
                            "Indices option: " + (opt.key.empty() ? "<positional>" : opt.key));
        }
      }
      if (std::find(pool_.begin(), pool_.end(), name) == pool_.end())
        pool_.push_back(name);
      index_info_[name] = p;
      break;
    }
    case PropKind::Coordinate:
      require_no_options(prop, options);
      coordinates_.insert(symbol_name(pattern, "Coordinate object"));
      break;
    case PropKind::Derivative:
    case PropKind::PartialDerivative:
      require_no_options(prop, options);
      if (pattern->kind != Kind::Derivative)
        throw EngineError(ErrorKind::UnknownOption,
                          prop + " must be attached to an operator pattern like \\partial{#}");
      break;
    case PropKind::Accent:
      require_no_options(prop, options);
      if (pattern->kind != Kind::Accent)
        throw EngineError(ErrorKind::UnknownOption,
                          "Accent must be attached to a pattern like \\delta{#}");
      break;
    case PropKind::AntiSymmetric:
    case PropKind::Symmetric: {
      require_no_options(prop, options);
      if (pattern->kind != Kind::Tensor || pattern->indices.size() < 2)
        throw EngineError(ErrorKind::UnknownOption,
                          prop + " needs a tensor pattern with at least two indices");
      PropKind other = *kind == PropKind::Symmetric ? PropKind::AntiSymmetric
                                                    : PropKind::Symmetric;
      for (const auto& e : entries_)
        if (e.prop.kind == other && e.pattern->kind == Kind::Tensor &&
            e.pattern->name == pattern->name &&
            e.pattern->indices.size() == pattern->indices.size())
          throw EngineError(ErrorKind::ConflictingProperty,
                            pattern->name + " cannot be both Symmetric and AntiSymmetric");
      break;
    }
    case PropKind::Metric:
    case PropKind::InverseMetric:
      require_no_options(prop, options);
      if (pattern->kind != Kind::Tensor || pattern->indices.size() != 2)
        throw EngineError(ErrorKind::UnknownOption,
                          prop + " needs a rank-2 tensor pattern");
      break;
    case PropKind::Depends:
      for (const auto& opt : options) {
        if (!opt.key.empty())
          throw EngineError(ErrorKind::UnknownOption, "Depends option: " + opt.key);
        for (const auto& item : opt.items) p.depends_on.push_back(item);
      }
      if (p.depends_on.empty())
        throw EngineError(ErrorKind::UnknownOption, "Depends needs at least one argument");
      break;
  }
  entries_.push_back({pattern, std::move(p)});
}

const Property* PropertyRegistry::lookup(const ExprPtr& node, PropKind kind) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
    if (it->prop.kind == kind && pattern_covers(it->pattern, node, *this))
      return &it->prop;
  return nullptr;
}

bool PropertyRegistry::is_coordinate(const std::string& name) const {
  return coordinates_.count(name) > 0;
}

std::optional<IndexPosition> PropertyRegistry::index_position(const std::string& name) const {
  auto it = index_info_.find(name);
  if (it == index_info_.end()) return std::nullopt;
  return it->second.position;
}

const std::vector<std::string>* PropertyRegistry::index_values(const std::string& name) const {
  auto it = index_info_.find(name);
  if (it == index_info_.end() || it->second.values.empty()) return nullptr;
  return &it->second.values;
}

std::optional<std::string> PropertyRegistry::first_head(PropKind kind) const {
  for (const auto& entry : entries_)
    if (entry.prop.kind == kind && !entry.pattern->name.empty())
      return entry.pattern->name;
  return std::nullopt;
}

bool PropertyRegistry::depends_nonconstant(const ExprPtr& node) const {
  switch (node->kind) {
    case Kind::Rational:
    case Kind::Wildcard:
      return false;
    case Kind::Symbol:
      if (is_coordinate(node->name)) return true;
      return lookup(node, PropKind::Depends) != nullptr;
    case Kind::Tensor:
      return lookup(node, PropKind::Depends) != nullptr;
    case Kind::Accent:
    case Kind::Derivative:
      return depends_nonconstant(node->children[0]);
    default:
      // Composite scalars (functions, powers, products, sums, integrals):
      // nonconstant when anything inside is.
      for (const auto& c : node->children)
        if (depends_nonconstant(c)) return true;
      return false;
  }
}

}  // namespace tce
