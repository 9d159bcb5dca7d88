#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tce/expr.hpp"
#include "tce/parser.hpp"
#include "tce/printer.hpp"
#include "tce/properties.hpp"

namespace tce {

// Interpreter state for a script or interactive session: the property
// registry, the label bindings, the `_` register, and the post-process
// pipeline applied to every expression-producing statement.
class Session {
public:
  explicit Session(PrintMode mode = PrintMode::Plain, bool postprocess = true);

  // Execute one parsed statement. Returns the lines this statement displays
  // (empty when the statement ends in '.').
  std::vector<std::string> run_statement(const Statement& st);

  // Parse and execute a whole script, collecting every displayed line.
  // Engine errors are rethrown with the statement's line number prefixed.
  std::vector<std::string> run_script(const std::string& source);

  PropertyRegistry& registry() { return reg_; }
  const PropertyRegistry& registry() const { return reg_; }
  PrintMode mode() const { return mode_; }

  // Value bound to a label, or nullptr when the label is unbound.
  ExprPtr binding(const std::string& label) const;
  ExprPtr last() const { return last_; }

private:
  struct Resolved {
    ExprPtr value;
    std::optional<std::string> label;  // set when the arg named a binding
  };

  ExprPtr post(ExprPtr e) const;
  Resolved resolve(const CallArg& arg, bool require_binding) const;
  void rebind(const Resolved& target, const ExprPtr& value);
  std::vector<std::string> run_call(const Statement& st);
  std::string attach_echo(const Statement& st) const;

  PropertyRegistry reg_;
  std::map<std::string, ExprPtr> bindings_;
  ExprPtr last_;
  std::optional<std::string> last_label_;
  std::vector<std::string> post_ops_;
  PrintMode mode_;
  bool postprocess_;
};

}  // namespace tce
