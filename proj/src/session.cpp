#include "tce/session.hpp"

#include <functional>
#include <utility>

#include "tce/components.hpp"
#include "tce/error.hpp"
#include "tce/index_ops.hpp"
#include "tce/rewrite.hpp"
#include "tce/scalar.hpp"

namespace tce {
namespace {

using UnaryOp = std::function<ExprPtr(const ExprPtr&, const PropertyRegistry&)>;

// Operations usable both as calls and as post-process pipeline stages.
const std::map<std::string, UnaryOp>& unary_ops() {
  static const std::map<std::string, UnaryOp> ops = {
      {"distribute", [](const ExprPtr& e, const PropertyRegistry& r) { return distribute(e, r); }},
      {"sort_product", [](const ExprPtr& e, const PropertyRegistry& r) { return sort_product(e, r); }},
      {"collect_terms", [](const ExprPtr& e, const PropertyRegistry& r) { return collect_terms(e, r); }},
      {"canonicalise", [](const ExprPtr& e, const PropertyRegistry& r) { return canonicalise(e, r); }},
      {"rename_dummies", [](const ExprPtr& e, const PropertyRegistry& r) { return rename_dummies(e, r); }},
  };
  return ops;
}

// Apply the scalar kernel over the maximal scalar subexpressions of `e`.
// With no function name: integrals of scalar integrands are evaluated when
// possible (an unsupported integral is left in place, simplified), and every
// other scalar subtree is brought to kernel normal form. With a name, the
// named kernel entry point is applied instead.
ExprPtr map_scalar_node(const ExprPtr& e, const std::string& fn) {
  if (e->kind == Kind::Integral && is_scalar(e->children[0])) {
    if (fn.empty()) {
      try {
        return integrate_basic(e->children[0], e->name);
      } catch (const EngineError& err) {
        if (err.kind() != ErrorKind::UnsupportedIntegral) throw;
        return make_integral(simplify(e->children[0]), e->name);
      }
    }
    try {
      return scalar_call(fn, e);
    } catch (const EngineError& err) {
      if (err.kind() != ErrorKind::UnsupportedIntegral) throw;
      return e;
    }
  }
  if (is_scalar(e)) {
    if (fn.empty()) return simplify(e);
    try {
      return scalar_call(fn, e);
    } catch (const EngineError& err) {
      if (err.kind() != ErrorKind::UnsupportedIntegral) throw;
      return e;
    }
  }
  if (e->children.empty()) return e;
  std::vector<ExprPtr> kids;
  kids.reserve(e->children.size());
  bool changed = false;
  for (const auto& c : e->children) {
    ExprPtr m = map_scalar_node(c, fn);
    changed = changed || m != c;
    kids.push_back(std::move(m));
  }
  return changed ? with_children(e, std::move(kids)) : e;
}

bool kwarg_truth(const ExprPtr& v, const std::string& key) {
  if (v && v->kind == Kind::Symbol) {
    if (v->name == "True") return true;
    if (v->name == "False") return false;
  }
  throw EngineError(ErrorKind::UnknownOption,
                    key + " expects True or False");
}

}  // namespace

Session::Session(PrintMode mode, bool postprocess)
    : last_(make_rational(0)),
      post_ops_({"sort_product", "canonicalise", "collect_terms"}),
      mode_(mode),
      postprocess_(postprocess) {}

ExprPtr Session::binding(const std::string& label) const {
  auto it = bindings_.find(label);
  return it == bindings_.end() ? nullptr : it->second;
}

ExprPtr Session::post(ExprPtr e) const {
  if (!postprocess_) return e;
  const auto& ops = unary_ops();
  for (const auto& name : post_ops_) e = ops.at(name)(e, reg_);
  return e;
}

Session::Resolved Session::resolve(const CallArg& arg, bool require_binding) const {
  if (arg.is_string)
    throw EngineError(ErrorKind::UnknownOp,
                      "expected an expression argument, got a string");
  const ExprPtr& e = arg.expr;
  if (e->kind == Kind::Symbol) {
    if (e->name == "_") return {last_, last_label_};
    auto it = bindings_.find(e->name);
    if (it != bindings_.end()) return {it->second, e->name};
    if (require_binding)
      throw EngineError(ErrorKind::UnboundLabel,
                        "no expression bound to label '" + e->name + "'");
  }
  return {e, std::nullopt};
}

void Session::rebind(const Resolved& target, const ExprPtr& value) {
  if (target.label) bindings_[*target.label] = value;
  last_ = value;
  last_label_ = target.label;
}

std::string Session::attach_echo(const Statement& st) const {
  std::string props = st.prop_name;
  std::string opts;
  for (const auto& opt : st.options) {
    // Echo only short keyed options (position=fixed); value lists stay quiet.
    if (opt.key.empty() || opt.items.size() != 1) continue;
    opts += (opts.empty() ? "" : ", ");
    opts += opt.key + "=" + print_expr(opt.items[0], mode_);
  }
  if (!opts.empty()) props += "(" + opts + ")";
  std::string objs;
  for (const auto& p : st.patterns) {
    if (!objs.empty()) objs += ", ";
    objs += print_expr(p, mode_);
  }
  if (st.patterns.size() > 1) objs = "[" + objs + "]";
  return "Attached property " + props + " to " + objs + ".";
}

std::vector<std::string> Session::run_statement(const Statement& st) {
  std::vector<std::string> out;
  switch (st.type) {
    case Statement::Type::Attach: {
      for (const auto& p : st.patterns) reg_.attach(p, st.prop_name, st.options);
      if (st.display) out.push_back(attach_echo(st));
      return out;
    }
    case Statement::Type::Assign: {
      ExprPtr v = post(st.expr);
      bindings_[st.label] = v;
      last_ = v;
      last_label_ = st.label;
      if (st.display) out.push_back(print_expr(v, mode_));
      return out;
    }
    case Statement::Type::Show: {
      Resolved r = resolve(CallArg{st.expr, "", false}, false);
      ExprPtr v = post(r.value);
      last_ = v;
      last_label_ = r.label;
      if (st.display) out.push_back(print_expr(v, mode_));
      return out;
    }
    case Statement::Type::Call:
      return run_call(st);
  }
  return out;
}

std::vector<std::string> Session::run_call(const Statement& st) {
  std::vector<std::string> out;
  auto need_args = [&](std::size_t n) {
    if (st.args.size() != n)
      throw EngineError(ErrorKind::UnknownOp,
                        st.op + " expects " + std::to_string(n) +
                            " argument(s), got " + std::to_string(st.args.size()));
  };
  auto need_string = [&](std::size_t i) -> const std::string& {
    if (i >= st.args.size() || !st.args[i].is_string)
      throw EngineError(ErrorKind::UnknownOp,
                        st.op + " expects a function name string");
    return st.args[i].str;
  };
  auto no_kwargs = [&]() {
    if (!st.kwargs.empty())
      throw EngineError(ErrorKind::UnknownOption,
                        st.op + " takes no keyword arguments");
  };

  const auto& ops = unary_ops();

  // set_post_process(op, ...): replace the pipeline; empty call disables it.
  if (st.op == "set_post_process") {
    no_kwargs();
    std::vector<std::string> names;
    for (const auto& a : st.args) {
      if (a.is_string || a.expr->kind != Kind::Symbol ||
          !ops.count(a.expr->name))
        throw EngineError(ErrorKind::UnknownOp,
                          "set_post_process: unknown operation" +
                              (a.is_string ? " '" + a.str + "'"
                               : a.expr->kind == Kind::Symbol
                                   ? " '" + a.expr->name + "'"
                                   : ""));
      names.push_back(a.expr->name);
    }
    post_ops_ = std::move(names);
    return out;
  }

  ExprPtr value;
  Resolved target;
  bool rebinds = true;

  if (auto it = ops.find(st.op); it != ops.end()) {
    need_args(1);
    no_kwargs();
    target = resolve(st.args[0], true);
    value = it->second(target.value, reg_);
  } else if (st.op == "substitute" || st.op == "vary" ||
             st.op == "integrate_by_parts") {
    need_args(2);
    no_kwargs();
    target = resolve(st.args[0], true);
    Resolved arg = resolve(st.args[1], false);
    if (st.op == "substitute")
      value = substitute(target.value, arg.value, reg_);
    else if (st.op == "vary")
      value = vary(target.value, arg.value, reg_);
    else
      value = integrate_by_parts(target.value, arg.value, reg_);
  } else if (st.op == "evaluate") {
    need_args(2);
    target = resolve(st.args[0], true);
    Resolved rules = resolve(st.args[1], true);
    bool rhs_only = false;
    for (const auto& kw : st.kwargs) {
      if (kw.first == "rhsonly")
        rhs_only = kwarg_truth(kw.second, kw.first);
      else
        throw EngineError(ErrorKind::UnknownOption,
                          "evaluate: unknown keyword '" + kw.first + "'");
    }
    value = evaluate(target.value, rules.value, rhs_only, reg_);
  } else if (st.op == "complete") {
    need_args(2);
    no_kwargs();
    target = resolve(st.args[0], true);
    Resolved pat = resolve(st.args[1], false);
    value = complete(target.value, pat.value, reg_);
  } else if (st.op == "map_scalar") {
    no_kwargs();
    if (st.args.size() != 1 && st.args.size() != 2)
      throw EngineError(ErrorKind::UnknownOp,
                        "map_scalar expects an expression and an optional "
                        "function name");
    target = resolve(st.args[0], true);
    std::string fn = st.args.size() == 2 ? need_string(1) : "";
    value = map_scalar_node(target.value, fn);
  } else if (st.op == "to_scalar") {
    need_args(1);
    no_kwargs();
    target = resolve(st.args[0], true);
    value = map_scalar_node(target.value, "");
    if (!is_scalar(value))
      throw EngineError(ErrorKind::NotScalar,
                        "to_scalar: expression has tensorial content");
    rebinds = false;
  } else if (st.op == "scalar_call") {
    need_args(2);
    no_kwargs();
    const std::string& fn = need_string(0);
    Resolved arg = resolve(st.args[1], true);
    value = scalar_call(fn, arg.value);
    rebinds = false;
  } else {
    throw EngineError(ErrorKind::UnknownOp,
                      "unknown operation '" + st.op + "'");
  }

  value = post(value);
  if (rebinds) {
    rebind(target, value);
  } else {
    last_ = value;
    last_label_.reset();
  }
  if (st.display) out.push_back(print_expr(value, mode_));
  return out;
}

std::vector<std::string> Session::run_script(const std::string& source) {
  std::vector<std::string> out;
  StatementStream stream(source, reg_);
  while (auto st = stream.next()) {
    try {
      auto lines = run_statement(*st);
      out.insert(out.end(), lines.begin(), lines.end());
    } catch (const ParseError&) {
      throw;
    } catch (const EngineError& e) {
      throw EngineError(e.kind(), "line " + std::to_string(st->line) + ": " +
                                      e.what());
    }
  }
  return out;
}

}  // namespace tce
