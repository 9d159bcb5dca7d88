#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tce/expr.hpp"
#include "tce/lexer.hpp"
#include "tce/properties.hpp"

namespace tce {

// One argument of an operation call: either a parsed expression
// (labels arrive as bare symbols, `$...$` groups arrive parsed) or a
// double-quoted string such as "integrate".
struct CallArg {
  ExprPtr expr;
  std::string str;
  bool is_string = false;
};

struct Statement {
  enum class Type { Attach, Assign, Call, Show };
  Type type = Type::Show;
  bool display = true;  // ';' displays the result, '.' suppresses it
  int line = 1, col = 1;

  // Attach: patterns '::' prop_name '(' options ')'
  std::vector<ExprPtr> patterns;
  std::string prop_name;
  std::vector<PropOption> options;

  // Assign: label ':=' expr   /   Show: expr
  std::string label;
  ExprPtr expr;

  // Call: op '(' args, key=value... ')'
  std::string op;
  std::vector<CallArg> args;
  std::vector<std::pair<std::string, ExprPtr>> kwargs;
};

// Incremental statement reader. Statements must be parsed one at a time
// because property attachments change how later text reads (a juxtaposed
// `\delta A_{\mu}` is an accent only once \delta{#}::Accent is declared).
class StatementStream {
public:
  StatementStream(const std::string& src, const PropertyRegistry& reg);
  ~StatementStream();
  StatementStream(const StatementStream&) = delete;
  StatementStream& operator=(const StatementStream&) = delete;

  // Next statement, or nullopt at end of input. Throws ParseError; the
  // error's incomplete() flag is set when input ended mid-statement.
  std::optional<Statement> next();

private:
  struct Impl;
  Impl* impl_;
};

// Parse a single full expression (tests, `$...$` fragments).
ExprPtr parse_expression(const std::string& src, const PropertyRegistry& reg);

}  // namespace tce
