#pragma once

#include <stdexcept>
#include <string>

namespace tce {

// Every failure the engine can signal deliberately. Statement runners catch
// EngineError; anything else escaping is a bug.
enum class ErrorKind {
  Parse,              // malformed notation (carries line/column)
  MalformedTerm,      // index repeated more than twice, or bad variance pairing
  InconsistentSum,    // sum terms disagree on free indices
  RuleShape,          // pattern/template free-index mismatch or unsupported pattern
  OutOfIndices,       // declared index pool exhausted during renaming
  TermTooLarge,       // canonicalise bound (8 abstract indices) exceeded
  MissingProperty,    // operation needs a property that was never attached
  ConflictingProperty,// e.g. Symmetric and AntiSymmetric on the same slots
  UnknownOption,      // property option not understood
  DuplicateAssignment,// component rule lists the same head+tuple twice
  UnknownHead,        // evaluate met a tensor with no rules and no table
  CannotEnumerate,    // evaluate met an index without declared values
  SingularMetric,     // complete() on a non-invertible metric
  NotScalar,          // scalar kernel handed tensorial content
  UndefinedValue,     // division by syntactic zero
  UnsupportedIntegral,// integrate_basic outside the supported class
  UnknownFunction,    // scalar_call with an unrecognized function name
  UnknownOp,          // session statement names no known operation
  UnboundLabel,       // op argument referenced a label with no binding
  Io,                 // script file unreadable, etc.
};

class EngineError : public std::runtime_error {
public:
  EngineError(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

// Parse errors carry a 1-based source position.
class ParseError : public EngineError {
public:
  ParseError(std::string message, int line, int column, bool incomplete = false)
      : EngineError(ErrorKind::Parse,
                    "line " + std::to_string(line) + ", column " +
                        std::to_string(column) + ": " + std::move(message)),
        line_(line), column_(column), incomplete_(incomplete) {}
  int line() const { return line_; }
  int column() const { return column_; }
  // True when the input is a prefix of a valid statement (REPL keeps reading).
  bool incomplete() const { return incomplete_; }

private:
  int line_;
  int column_;
  bool incomplete_;
};

}  // namespace tce
