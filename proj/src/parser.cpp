#include "tce/parser.hpp"

#include <set>

#include "tce/error.hpp"

namespace tce {

namespace {

const std::set<std::string>& builtin_functions() {
  static const std::set<std::string> fns = {"sin", "cos", "tan", "log"};
  return fns;
}

bool is_builtin_command(const std::string& name) {
  return builtin_functions().count(name) || name == "frac" || name == "int" ||
         name == "partial";
}

class Parser {
public:
  Parser(std::vector<Token> toks, const PropertyRegistry& reg)
      : toks_(std::move(toks)), reg_(reg) {}

  bool at_end() const { return cur().type == Tok::End; }

  std::optional<Statement> parse_statement();
  ExprPtr parse_relation();

  void expect_end() {
    if (!at_end()) fail("trailing input after expression");
  }

private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const PropertyRegistry& reg_;

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t k = 1) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  void advance() {
    if (pos_ + 1 < toks_.size()) ++pos_;
  }
  bool is_op(const char* text) const {
    return cur().type == Tok::Op && cur().text == text;
  }
  void eat_op(const char* text) {
    if (!is_op(text)) fail(std::string("expected '") + text + "'");
    advance();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, cur().line, cur().col, cur().type == Tok::End);
  }

  bool derivative_head(const std::string& name) const {
    if (name == "partial") return true;
    return reg_.is_derivative_op(make_derivative(name, {}, make_wildcard()));
  }
  bool accent_head(const std::string& name) const {
    return reg_.lookup(make_accent(name, make_wildcard()), PropKind::Accent) != nullptr;
  }

  // expression grammar
  ExprPtr parse_sum();
  ExprPtr parse_product();
  ExprPtr parse_power();
  ExprPtr parse_atom();
  ExprPtr parse_tight_atom();
  ExprPtr parse_word_atom();
  ExprPtr parse_function(const std::string& name);
  ExprPtr parse_integral();
  ExprPtr parse_exponent();
  std::vector<Index> parse_index_groups();
  void parse_index_group(Variance v, std::vector<Index>& out);
  bool caret_starts_indices() const;
  bool starts_atom(const Token& t) const;

  // statement pieces
  Statement parse_call(Statement st);
  Statement parse_attach(Statement st, ExprPtr pattern_expr);
  std::vector<PropOption> parse_options();
  void parse_terminator(Statement& st);
};

bool Parser::starts_atom(const Token& t) const {
  if (t.type == Tok::Word || t.type == Tok::Number) return true;
  return t.type == Tok::Op && t.text == "(";
}

std::optional<Statement> Parser::parse_statement() {
  if (at_end()) return std::nullopt;
  Statement st;
  st.line = cur().line;
  st.col = cur().col;

  if (cur().type == Tok::Word && !cur().backslashed) {
    if (peek().type == Tok::Op && peek().text == ":=") {
      st.type = Statement::Type::Assign;
      st.label = cur().text;
      advance();
      advance();
      st.expr = parse_relation();
      parse_terminator(st);
      return st;
    }
    if (peek().type == Tok::Op && peek().text == "(" &&
        !is_builtin_command(cur().text)) {
      return parse_call(std::move(st));
    }
  }

  ExprPtr e = parse_relation();
  if (is_op("::")) return parse_attach(std::move(st), e);
  st.type = Statement::Type::Show;
  st.expr = e;
  parse_terminator(st);
  return st;
}

Statement Parser::parse_call(Statement st) {
  st.type = Statement::Type::Call;
  st.op = cur().text;
  advance();
  eat_op("(");
  bool first = true;
  while (!is_op(")")) {
    if (!first) eat_op(",");
    first = false;
    if (cur().type == Tok::Str) {
      CallArg a;
      a.is_string = true;
      a.str = cur().text;
      advance();
      st.args.push_back(std::move(a));
      continue;
    }
    if (cur().type == Tok::Word && !cur().backslashed && peek().type == Tok::Op &&
        peek().text == "=") {
      std::string key = cur().text;
      advance();
      advance();
      st.kwargs.emplace_back(key, parse_relation());
      continue;
    }
    CallArg a;
    a.expr = parse_relation();
    st.args.push_back(std::move(a));
  }
  eat_op(")");
  parse_terminator(st);
  return st;
}

Statement Parser::parse_attach(Statement st, ExprPtr pattern_expr) {
  st.type = Statement::Type::Attach;
  eat_op("::");
  if (cur().type != Tok::Word) fail("expected a property name after '::'");
  st.prop_name = cur().text;
  advance();
  if (is_op("(")) st.options = parse_options();
  if (pattern_expr->kind == Kind::List) {
    st.patterns = pattern_expr->children;
    if (st.patterns.empty()) fail("empty pattern list before '::'");
  } else {
    st.patterns = {pattern_expr};
  }
  parse_terminator(st);
  return st;
}

std::vector<PropOption> Parser::parse_options() {
  std::vector<PropOption> out;
  eat_op("(");
  bool first = true;
  while (!is_op(")")) {
    if (!first) eat_op(",");
    first = false;
    PropOption opt;
    if (cur().type == Tok::Word && !cur().backslashed && peek().type == Tok::Op &&
        peek().text == "=") {
      opt.key = cur().text;
      advance();
      advance();
      if (is_op("{")) {
        advance();
        while (!is_op("}")) {
          if (!opt.items.empty()) eat_op(",");
          opt.items.push_back(parse_relation());
        }
        advance();
      } else {
        opt.items.push_back(parse_relation());
      }
    } else {
      opt.items.push_back(parse_relation());
    }
    out.push_back(std::move(opt));
  }
  eat_op(")");
  return out;
}

void Parser::parse_terminator(Statement& st) {
  if (is_op(";")) {
    st.display = true;
    advance();
    return;
  }
  if (is_op(".")) {
    st.display = false;
    advance();
    return;
  }
  fail("expected ';' or '.' to end the statement");
}

ExprPtr Parser::parse_relation() {
  ExprPtr a = parse_sum();
  if (is_op("=")) {
    advance();
    return make_equation(a, parse_sum());
  }
  if (is_op("->")) {
    advance();
    return make_rule(a, parse_sum());
  }
  return a;
}

ExprPtr Parser::parse_sum() {
  std::vector<ExprPtr> terms;
  bool negative = false;
  if (is_op("+")) {
    advance();
  } else if (is_op("-")) {
    negative = true;
    advance();
  }
  while (true) {
    ExprPtr t = parse_product();
    if (negative) t = make_product({make_int(-1), t});
    terms.push_back(std::move(t));
    if (is_op("+")) {
      negative = false;
      advance();
    } else if (is_op("-")) {
      negative = true;
      advance();
    } else {
      break;
    }
  }
  return terms.size() == 1 ? terms[0] : make_sum(std::move(terms));
}

ExprPtr Parser::parse_product() {
  std::vector<ExprPtr> factors;
  factors.push_back(parse_power());
  while (true) {
    if (is_op("*")) {
      advance();
      factors.push_back(parse_power());
    } else if (is_op("/")) {
      advance();
      factors.push_back(make_power(parse_power(), make_int(-1)));
    } else if (starts_atom(cur())) {
      factors.push_back(parse_power());  // juxtaposition
    } else {
      break;
    }
  }
  return factors.size() == 1 ? factors[0] : make_product(std::move(factors));
}

ExprPtr Parser::parse_power() {
  ExprPtr base = parse_atom();
  while (is_op("**") || is_op("^")) {
    advance();
    base = make_power(base, parse_exponent());
  }
  return base;
}

ExprPtr Parser::parse_exponent() {
  if (is_op("{")) {
    advance();
    ExprPtr e = parse_sum();
    eat_op("}");
    return e;
  }
  if (is_op("(")) {
    advance();
    ExprPtr e = parse_sum();
    eat_op(")");
    return e;
  }
  bool neg = false;
  if (is_op("-")) {
    neg = true;
    advance();
  }
  if (cur().type != Tok::Number) fail("expected an exponent");
  ExprPtr n = make_rational(rat_from_string(cur().text));
  advance();
  return neg ? make_product({make_int(-1), n}) : n;
}

ExprPtr Parser::parse_atom() {
  switch (cur().type) {
    case Tok::Number: {
      ExprPtr n = make_rational(rat_from_string(cur().text));
      advance();
      return n;
    }
    case Tok::Word:
      return parse_word_atom();
    case Tok::Op: {
      if (is_op("(")) {
        advance();
        ExprPtr e = parse_sum();
        eat_op(")");
        return e;
      }
      if (is_op("{")) {
        advance();
        std::vector<ExprPtr> items;
        while (!is_op("}")) {
          if (!items.empty()) eat_op(",");
          items.push_back(parse_relation());
        }
        advance();
        return make_list(std::move(items));
      }
      if (is_op("$")) {
        advance();
        ExprPtr e = parse_relation();
        eat_op("$");
        return e;
      }
      if (is_op("_")) {
        advance();
        return make_symbol("_");
      }
      if (is_op("#")) {
        advance();
        return make_wildcard();
      }
      break;
    }
    default:
      break;
  }
  fail("expected an expression");
}

// True when the '^' at the cursor opens an index group: `^{...}` whose braces
// contain only names, or `^name`. Numeric/compound content means a power.
bool Parser::caret_starts_indices() const {
  const Token& next = peek();
  if (next.type == Tok::Word) return true;
  if (!(next.type == Tok::Op && next.text == "{")) return false;
  std::size_t j = pos_ + 2;
  bool any = false;
  while (j < toks_.size() && toks_[j].type == Tok::Word) {
    ++j;
    any = true;
  }
  return any && j < toks_.size() && toks_[j].type == Tok::Op && toks_[j].text == "}";
}

void Parser::parse_index_group(Variance v, std::vector<Index>& out) {
  if (is_op("{")) {
    advance();
    bool any = false;
    while (!is_op("}")) {
      if (cur().type != Tok::Word) fail("expected an index name");
      out.push_back(Index{cur().text, v});
      advance();
      any = true;
    }
    if (!any) fail("empty index group");
    advance();
    return;
  }
  if (cur().type != Tok::Word) fail("expected an index name");
  out.push_back(Index{cur().text, v});
  advance();
}

std::vector<Index> Parser::parse_index_groups() {
  std::vector<Index> slots;
  while (true) {
    if (is_op("_")) {
      advance();
      parse_index_group(Variance::Lower, slots);
    } else if (is_op("^") && caret_starts_indices()) {
      advance();
      parse_index_group(Variance::Upper, slots);
    } else {
      break;
    }
  }
  return slots;
}

ExprPtr Parser::parse_function(const std::string& name) {
  ExprPtr arg;
  if (is_op("(")) {
    advance();
    arg = parse_sum();
    eat_op(")");
  } else if (is_op("{")) {
    advance();
    arg = parse_sum();
    eat_op("}");
  } else {
    fail("expected an argument after \\" + name);
  }
  if (name == "tan") {
    // tan is a display form; the engine works with sin/cos internally.
    return make_product({make_function("sin", arg),
                         make_power(make_function("cos", arg), make_int(-1))});
  }
  return make_function(name, arg);
}

ExprPtr Parser::parse_integral() {
  if (is_op("{")) {
    advance();
    ExprPtr integrand = parse_relation();
    eat_op("}");
    eat_op("{");
    if (cur().type != Tok::Word) fail("expected the integration coordinate");
    std::string coord = cur().text;
    advance();
    eat_op("}");
    return make_integral(integrand, coord);
  }
  // `\int <factors> dx` — the measure is a plain word 'd' + declared coordinate.
  std::vector<ExprPtr> factors;
  while (true) {
    if (cur().type == Tok::Word && !cur().backslashed && cur().text.size() >= 2 &&
        cur().text[0] == 'd' && reg_.is_coordinate(cur().text.substr(1))) {
      std::string coord = cur().text.substr(1);
      advance();
      if (factors.empty()) fail("empty integrand");
      ExprPtr integrand =
          factors.size() == 1 ? factors[0] : make_product(std::move(factors));
      return make_integral(integrand, coord);
    }
    if (!starts_atom(cur())) fail("expected 'd<coordinate>' to close the integral");
    factors.push_back(parse_power());
  }
}

ExprPtr Parser::parse_word_atom() {
  std::string name = cur().text;
  advance();
  if (builtin_functions().count(name)) return parse_function(name);
  if (name == "frac") {
    eat_op("{");
    ExprPtr num = parse_sum();
    eat_op("}");
    eat_op("{");
    ExprPtr den = parse_sum();
    eat_op("}");
    return make_product({num, make_power(den, make_int(-1))});
  }
  if (name == "int") return parse_integral();

  std::vector<Index> slots = parse_index_groups();

  if (is_op("{")) {
    advance();
    ExprPtr operand = parse_relation();
    eat_op("}");
    if (name == "partial" || derivative_head(name))
      return make_derivative(name, std::move(slots), operand);
    if (slots.empty()) return make_accent(name, operand);
    fail("unexpected '{' after an indexed object");
  }
  if (name == "partial" || derivative_head(name)) {
    if (is_op("(")) {
      advance();
      ExprPtr operand = parse_sum();
      eat_op(")");
      return make_derivative(name, std::move(slots), operand);
    }
    if (cur().type == Tok::Word)
      return make_derivative(name, std::move(slots), parse_tight_atom());
    fail("expected an operand after the derivative");
  }
  if (slots.empty() && accent_head(name) && cur().type == Tok::Word)
    return make_accent(name, parse_tight_atom());

  if (slots.empty()) return make_symbol(name);
  return make_tensor(name, std::move(slots));
}

// The operand a juxtaposed accent or derivative grabs: one named object with
// its indices (possibly under further accents), no trailing powers.
ExprPtr Parser::parse_tight_atom() {
  if (cur().type != Tok::Word) fail("expected an object");
  std::string name = cur().text;
  advance();
  if (builtin_functions().count(name)) return parse_function(name);
  if (accent_head(name) && (cur().type == Tok::Word || is_op("{"))) {
    if (is_op("{")) {
      advance();
      ExprPtr operand = parse_relation();
      eat_op("}");
      return make_accent(name, operand);
    }
    return make_accent(name, parse_tight_atom());
  }
  std::vector<Index> slots = parse_index_groups();
  if (slots.empty()) return make_symbol(name);
  return make_tensor(name, std::move(slots));
}

}  // namespace

struct StatementStream::Impl {
  Parser parser;
  Impl(std::vector<Token> toks, const PropertyRegistry& reg)
      : parser(std::move(toks), reg) {}
};

StatementStream::StatementStream(const std::string& src, const PropertyRegistry& reg)
    : impl_(new Impl(lex(src), reg)) {}

StatementStream::~StatementStream() { delete impl_; }

std::optional<Statement> StatementStream::next() { return impl_->parser.parse_statement(); }

ExprPtr parse_expression(const std::string& src, const PropertyRegistry& reg) {
  Parser p(lex(src), reg);
  ExprPtr e = p.parse_relation();
  p.expect_end();
  return e;
}

}  // namespace tce
