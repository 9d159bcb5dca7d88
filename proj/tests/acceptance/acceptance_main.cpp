// End-to-end acceptance checks. Each check prints exactly one PASS/FAIL line:
//
//   1. action-variation-derivation   scripted variation of the field action
//                                    reaches -int dA^mu d^nu F_{mu nu} dx,
//                                    with all intermediates verified against
//                                    independently entered reference forms
//                                    (canonical equivalence + numeric oracle)
//   2. sphere-curvature-values       metric completion, Christoffel, Riemann,
//                                    Ricci and scalar curvature of the round
//                                    two-sphere, checked value by value
//   3. scalar-bridge-rebinding       map_scalar writes back through '_',
//                                    to_scalar / scalar_call have no side
//                                    effect on bindings
//   4. canonicalisation-random-suite idempotence + contraction-oracle
//                                    invariance of every rewrite op on 500
//                                    random index-consistent terms
//   5. scalar-kernel-suite           diff vs finite differences, integrate
//                                    then diff is the identity, metric times
//                                    inverse metric contracts to the identity
//   6. numeric-curvature-crosscheck  symbolic curvature components agree with
//                                    a fully numeric finite-difference
//                                    pipeline at random evaluation points
//   7. cli-determinism-roundtrip     `--check` against the goldens passes
//                                    twice; every displayed expression parses
//                                    back to the identical string

#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "tce/components.hpp"
#include "tce/error.hpp"
#include "tce/expr.hpp"
#include "tce/index_ops.hpp"
#include "tce/parser.hpp"
#include "tce/printer.hpp"
#include "tce/properties.hpp"
#include "tce/rewrite.hpp"
#include "tce/scalar.hpp"
#include "tce/session.hpp"

using namespace tce;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw Failure(msg);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string script_path(const std::string& name) {
  return std::string(TCE_SCRIPTS_DIR) + "/" + name;
}

std::string latex(const ExprPtr& e) { return print_expr(e, PrintMode::Latex); }

// Displayed expression lines (attach echoes filtered out).
std::vector<std::string> expression_lines(const std::vector<std::string>& lines) {
  std::vector<std::string> out;
  for (const auto& l : lines)
    if (l.rfind("Attached", 0) != 0) out.push_back(l);
  return out;
}

// Replace every integral by its integrand so expressions can be compared by
// the contraction oracle (the measure is the same on both sides throughout).
ExprPtr strip_integrals(const ExprPtr& e) {
  if (e->kind == Kind::Integral) return strip_integrals(e->children[0]);
  if (e->children.empty()) return e;
  std::vector<ExprPtr> kids;
  kids.reserve(e->children.size());
  for (const auto& c : e->children) kids.push_back(strip_integrals(c));
  return with_children(e, std::move(kids));
}

bool zero_diff(const ExprPtr& a, const ExprPtr& b) {
  return is_zero(simplify(
      make_sum({a, make_product({make_int(-1), b})})));
}

// ---------------------------------------------------------------------------
// 1. action variation
// ---------------------------------------------------------------------------

void check_action_variation() {
  Session s(PrintMode::Latex);
  auto lines = s.run_script(read_file(script_path("maxwell.tce")));
  auto ex = expression_lines(lines);
  require(ex.size() == 9, "expected 9 displayed expressions, got " +
                              std::to_string(ex.size()));
  // the label shows its mutated value after substitute
  require(ex[2] == ex[3], "label display changed between statements");

  const PropertyRegistry& reg = s.registry();
  auto ref = [&](const char* src) { return parse_expression(src, reg); };

  struct Check {
    std::size_t line;
    ExprPtr want;
    const char* what;
  };
  const std::vector<Check> checks = {
      {2,
       ref("-1/4 \\int (\\partial_{\\mu}A_{\\nu} - \\partial_{\\nu}A_{\\mu}) "
           "(\\partial^{\\mu}A^{\\nu} - \\partial^{\\nu}A^{\\mu}) dx"),
       "after substitution"},
      {4,
       ref("-1/4 \\int ((\\partial^{\\mu}A^{\\nu} - \\partial^{\\nu}A^{\\mu}) "
           "(\\partial_{\\mu}\\delta A_{\\nu} - \\partial_{\\nu}\\delta "
           "A_{\\mu}) + (\\partial_{\\mu}A_{\\nu} - \\partial_{\\nu}A_{\\mu}) "
           "(\\partial^{\\mu}\\delta A^{\\nu} - \\partial^{\\nu}\\delta "
           "A^{\\mu})) dx"),
       "after variation"},
      {5,
       ref("-1/4 \\int (4 \\partial^{\\mu}A^{\\nu} \\partial_{\\mu}\\delta "
           "A_{\\nu} - 4 \\partial^{\\mu}A^{\\nu} \\partial_{\\nu}\\delta "
           "A_{\\mu}) dx"),
       "after expansion"},
      {6,
       ref("-1/4 \\int (-4 \\delta A^{\\mu} "
           "\\partial^{\\nu}(\\partial_{\\nu}A_{\\mu}) + 4 \\delta A^{\\mu} "
           "\\partial^{\\nu}(\\partial_{\\mu}A_{\\nu})) dx"),
       "after integration by parts"},
      {8, ref("-\\int \\delta A^{\\mu} \\partial^{\\nu}F_{\\mu \\nu} dx"),
       "final field equation"},
  };

  for (const auto& c : checks) {
    ExprPtr got = strip_integrals(parse_expression(ex[c.line], reg));
    ExprPtr want = strip_integrals(c.want);
    require(oracle::equivalent(got, want, reg),
            std::string(c.what) + ": canonical forms differ");
    // the oracle consumes flat terms, so expand grouped factors first
    ExprPtr got_flat = distribute(got, reg);
    ExprPtr want_flat = distribute(want, reg);
    for (unsigned seed : {11u, 12u, 13u}) {
      oracle::ContractionOracle co(3, seed, {"F"});
      require(
          oracle::nearly_all(co.eval(got_flat, {}), co.eval(want_flat, {}), 1e-9),
          std::string(c.what) + ": contraction oracle disagrees");
    }
  }
}

// ---------------------------------------------------------------------------
// 2. sphere curvature
// ---------------------------------------------------------------------------

// Table-equation cells keyed by the printed left-hand side.
std::map<std::string, ExprPtr> table_cells(const ExprPtr& eq,
                                           const char* what) {
  require(eq && eq->kind == Kind::Equation, std::string(what) + " not bound");
  require(eq->children[1]->kind == Kind::Table,
          std::string(what) + " has no component table");
  std::map<std::string, ExprPtr> out;
  for (const auto& entry : eq->children[1]->children)
    out[latex(entry->children[0])] = entry->children[1];
  return out;
}

void check_sphere_curvature() {
  Session s(PrintMode::Latex);
  auto lines = s.run_script(read_file(script_path("sphere.tce")));
  const PropertyRegistry& reg = s.registry();
  auto ref = [&](const char* src) { return parse_expression(src, reg); };

  // metric completion: exactly the two inverse entries, in closed form
  ExprPtr g = s.binding("g");
  require(g && g->kind == Kind::List && g->children.size() == 4,
          "completed metric should hold 4 component rules");
  ComponentRules cr(g, reg);
  auto phi_theta = [&]() -> std::pair<std::string, std::string> {
    const auto* vals = reg.index_values(reg.index_pool().front());
    require(vals && vals->size() == 2, "index values missing");
    return {(*vals)[0], (*vals)[1]};  // declared order: phi then theta
  }();
  const std::string& PHI = phi_theta.first;
  const std::string& THETA = phi_theta.second;
  auto up = [](const std::string& n) { return Index{n, Variance::Upper}; };
  auto dn = [](const std::string& n) { return Index{n, Variance::Lower}; };

  auto gtt = cr.find("g", {up(THETA), up(THETA)});
  auto gpp = cr.find("g", {up(PHI), up(PHI)});
  require(gtt && zero_diff(*gtt, ref("r**(-2)")),
          "inverse metric theta-theta entry");
  require(gpp && zero_diff(*gpp, ref("(r**2 \\sin(\\theta)**2)**(-1)")),
          "inverse metric phi-phi entry");

  // Christoffel symbols: three nonzero components and no others
  auto gam = table_cells(s.binding("Gamma"), "Gamma");
  require(gam.size() == 3, "expected 3 nonzero connection components, got " +
                               std::to_string(gam.size()));
  auto cell = [&](std::map<std::string, ExprPtr>& cells, const std::string& key,
                  const char* want, const char* what) {
    auto it = cells.find(key);
    require(it != cells.end(), std::string(what) + " missing (" + key + ")");
    require(zero_diff(it->second, ref(want)),
            std::string(what) + " has the wrong value");
  };
  cell(gam, "\\Gamma^{\\varphi}_{\\varphi \\theta}",
       "\\cos(\\theta) \\sin(\\theta)**(-1)", "Gamma^phi_{phi theta}");
  cell(gam, "\\Gamma^{\\varphi}_{\\theta \\varphi}",
       "\\cos(\\theta) \\sin(\\theta)**(-1)", "Gamma^phi_{theta phi}");
  cell(gam, "\\Gamma^{\\theta}_{\\varphi \\varphi}",
       "-\\sin(\\theta) \\cos(\\theta)", "Gamma^theta_{phi phi}");

  // Riemann tensor: the four nonzero components
  auto r4 = table_cells(s.binding("R4"), "R4");
  require(r4.size() == 4, "expected 4 nonzero curvature components, got " +
                              std::to_string(r4.size()));
  cell(r4, "R^{\\theta}_{\\varphi \\theta \\varphi}", "\\sin(\\theta)**2",
       "R^theta_{phi theta phi}");
  cell(r4, "R^{\\theta}_{\\varphi \\varphi \\theta}", "-\\sin(\\theta)**2",
       "R^theta_{phi phi theta}");
  cell(r4, "R^{\\varphi}_{\\theta \\theta \\varphi}", "-1",
       "R^phi_{theta theta phi}");
  cell(r4, "R^{\\varphi}_{\\theta \\varphi \\theta}", "1",
       "R^phi_{theta phi theta}");

  // Ricci tensor
  auto r2 = table_cells(s.binding("R2"), "R2");
  require(r2.size() == 2, "expected 2 nonzero Ricci components, got " +
                              std::to_string(r2.size()));
  cell(r2, "R_{\\theta \\theta}", "1", "R_{theta theta}");
  cell(r2, "R_{\\varphi \\varphi}", "\\sin(\\theta)**2", "R_{phi phi}");

  // scalar curvature, printed exactly
  auto ex = expression_lines(lines);
  require(!ex.empty() && ex.back() == "R = 2 r^{-2}",
          "scalar curvature printed as '" + (ex.empty() ? "" : ex.back()) +
              "'");
}

// ---------------------------------------------------------------------------
// 3. scalar bridge
// ---------------------------------------------------------------------------

void check_scalar_bridge() {
  Session s;
  s.run_script("x::Coordinate.\n");
  s.run_script("ex := \\int{1/x}{x};\n");
  auto out = s.run_script("map_scalar(_);\n");
  require(out.size() == 1 && out[0] == "log(x)", "map_scalar result");
  require(print_expr(s.binding("ex"), PrintMode::Plain) == "log(x)",
          "map_scalar must rebind the target label");

  s.run_script("ex2 := \\int{1/x}{x};\n");
  std::string before = print_expr(s.binding("ex2"), PrintMode::Plain);
  out = s.run_script("to_scalar(ex2);\n");
  require(out.size() == 1 && out[0] == "log(x)", "to_scalar result");
  require(print_expr(s.binding("ex2"), PrintMode::Plain) == before,
          "to_scalar must not rebind");
  out = s.run_script("scalar_call(\"integrate\", ex2);\n");
  require(out.size() == 1 && out[0] == "log(x)", "scalar_call result");
  require(print_expr(s.binding("ex2"), PrintMode::Plain) == before,
          "scalar_call must not rebind");
}

// ---------------------------------------------------------------------------
// 4. canonicalisation random suite
// ---------------------------------------------------------------------------

void check_canonicalisation() {
  PropertyRegistry reg = oracle::RandomTerms::registry();

  // antisymmetric pair collapses
  ExprPtr fab = make_tensor("F", {{"a", Variance::Lower}, {"b", Variance::Lower}});
  ExprPtr fba = make_tensor("F", {{"b", Variance::Lower}, {"a", Variance::Lower}});
  require(is_zero(canonicalise(make_sum({fab, fba}), reg)),
          "F_{a b} + F_{b a} must cancel");

  using Op = ExprPtr (*)(const ExprPtr&, const PropertyRegistry&);
  const std::vector<std::pair<const char*, Op>> ops = {
      {"distribute", distribute},       {"sort_product", sort_product},
      {"collect_terms", collect_terms}, {"canonicalise", canonicalise},
      {"rename_dummies", rename_dummies}};

  oracle::RandomTerms gen(2026);
  for (int i = 0; i < 500; ++i) {
    ExprPtr t = gen.next();
    ExprPtr c1 = canonicalise(t, reg);
    require(structural_equal(c1, canonicalise(c1, reg)),
            "canonicalise not idempotent on term " + std::to_string(i));

    std::vector<std::string> order;
    for (const auto& f : free_indices(t, reg)) order.push_back(f.name);
    oracle::ContractionOracle co(3, 500 + static_cast<unsigned>(i), {"F"});
    auto want = co.eval(t, order);
    for (const auto& [name, op] : ops) {
      auto got = co.eval(op(t, reg), order);
      require(oracle::nearly_all(want, got, 1e-9),
              std::string(name) + " changed the value of term " +
                  std::to_string(i));
    }
  }
}

// ---------------------------------------------------------------------------
// 5. scalar kernel suite
// ---------------------------------------------------------------------------

void check_scalar_kernel() {
  // derivative vs central finite differences
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> xs(0.35, 1.65);
  int accepted = 0;
  while (accepted < 100) {
    ExprPtr e = oracle::random_scalar(rng, 3);
    double x0 = xs(rng);
    std::map<std::string, double> env{{"x", x0}};
    double sym, fd;
    try {
      sym = eval_double(diff(e, "x"), env);
      fd = oracle::fd_derivative(e, "x", env);
    } catch (const EngineError&) {
      continue;
    }
    if (!std::isfinite(sym) || !std::isfinite(fd) || std::fabs(fd) > 1e3)
      continue;
    require(oracle::nearly(sym, fd, 1e-6),
            "diff disagrees with finite differences");
    ++accepted;
  }

  // integrate then differentiate is the identity on the supported class
  ExprPtr x = make_symbol("x");
  const Rational coeffs[] = {Rational(1), Rational(-1), Rational(2),
                             Rational(1, 2), Rational(-5, 3)};
  for (int n = -4; n <= 4; ++n) {
    for (const auto& c : coeffs) {
      ExprPtr e = make_term(c, {make_power(x, make_int(n))});
      ExprPtr back = diff(integrate_basic(e, "x"), "x");
      require(zero_diff(back, e), "diff(integrate(c x^n)) != c x^n");
    }
  }
  ExprPtr poly = parse_expression("3 x**2 - 5/2 x**(-1) + 7", PropertyRegistry{});
  require(zero_diff(diff(integrate_basic(poly, "x"), "x"), poly),
          "diff(integrate(polynomial)) != polynomial");

  // metric times inverse metric gives the identity, symbolically
  auto kronecker_check = [&](const std::string& rules_src,
                             const char* what) {
    PropertyRegistry reg;
    reg.attach(make_symbol("u"), "Coordinate", {});
    reg.attach(make_symbol("v"), "Coordinate", {});
    for (const char* n : {"m", "n", "p", "q", "s"})
      reg.attach(make_symbol(n), "Indices",
                 {{"values", {make_symbol("u"), make_symbol("v")}},
                  {"position", {make_symbol("fixed")}}});
    reg.attach(make_derivative("partial", {}, make_wildcard()),
               "PartialDerivative", {});
    reg.attach(parse_expression("g_{m n}", reg), "Metric", {});
    reg.attach(parse_expression("g^{m n}", reg), "InverseMetric", {});
    ExprPtr full =
        complete(parse_expression(rules_src, reg), parse_expression("g^{m n}", reg), reg);
    ComponentRules cr(full, reg);
    const char* vals[] = {"u", "v"};
    for (const char* a : vals) {
      for (const char* c : vals) {
        std::vector<ExprPtr> terms;
        for (const char* b : vals) {
          auto lo = cr.find("g", {Index{a, Variance::Lower},
                                  Index{b, Variance::Lower}});
          auto hi = cr.find("g", {Index{b, Variance::Upper},
                                  Index{c, Variance::Upper}});
          require(lo && hi, "metric component lookup failed");
          terms.push_back(make_product({*lo, *hi}));
        }
        ExprPtr total = simplify(make_sum(std::move(terms)));
        bool diag = std::string(a) == c;
        require(diag ? zero_diff(total, make_int(1)) : is_zero(total),
                std::string(what) + ": contraction is not the identity");
      }
    }
  };
  // the round-sphere metric, with u as the polar angle
  kronecker_check("{ g_{u u} = r**2, g_{v v} = r**2 sin(u)**2 }", "sphere");
  // random diagonal metrics with rational entries
  std::uniform_int_distribution<int> num(1, 9), den(1, 7);
  for (int i = 0; i < 5; ++i) {
    Rational a(num(rng), den(rng));
    Rational b(-num(rng), den(rng));
    std::string src = "{ g_{u u} = " + a.get_str() + ", g_{v v} = " +
                      b.get_str() + " }";
    kronecker_check(src, "random diagonal");
  }
}

// ---------------------------------------------------------------------------
// 6. numeric curvature cross-check
// ---------------------------------------------------------------------------

// Fully numeric pipeline: metric values -> finite-difference Christoffel ->
// finite-difference Riemann, never touching the symbolic engine.
struct NumericGeometry {
  double r;
  static constexpr double h_metric = 1e-6;
  static constexpr double h_gamma = 1e-4;

  // coordinates: axis 0 = polar angle, axis 1 = azimuth
  std::array<std::array<double, 2>, 2> metric(double th) const {
    double s = std::sin(th);
    return {{{r * r, 0.0}, {0.0, r * r * s * s}}};
  }
  std::array<std::array<double, 2>, 2> inverse(double th) const {
    auto g = metric(th);
    double det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    return {{{g[1][1] / det, -g[0][1] / det}, {-g[1][0] / det, g[0][0] / det}}};
  }
  double dmetric(int d, int b, int c, double th) const {
    if (d == 1) return 0.0;  // nothing depends on the azimuth
    return (metric(th + h_metric)[b][c] - metric(th - h_metric)[b][c]) /
           (2.0 * h_metric);
  }
  double gamma(int a, int b, int c, double th) const {
    auto gi = inverse(th);
    double v = 0.0;
    for (int d = 0; d < 2; ++d)
      v += 0.5 * gi[a][d] *
           (dmetric(b, d, c, th) + dmetric(c, d, b, th) - dmetric(d, b, c, th));
    return v;
  }
  double dgamma(int der, int a, int b, int c, double th) const {
    if (der == 1) return 0.0;
    return (gamma(a, b, c, th + h_gamma) - gamma(a, b, c, th - h_gamma)) /
           (2.0 * h_gamma);
  }
  double riemann(int a, int b, int c, int d, double th) const {
    double v = dgamma(c, a, d, b, th) - dgamma(d, a, c, b, th);
    for (int e = 0; e < 2; ++e)
      v += gamma(a, c, e, th) * gamma(e, d, b, th) -
           gamma(a, d, e, th) * gamma(e, c, b, th);
    return v;
  }
};

void check_numeric_curvature() {
  Session s(PrintMode::Latex);
  s.run_script(read_file(script_path("sphere.tce")));
  const PropertyRegistry& reg = s.registry();

  const auto* vals = reg.index_values(reg.index_pool().front());
  require(vals && vals->size() == 2, "index values missing");
  const std::string PHI = (*vals)[0], THETA = (*vals)[1];
  auto axis = [&](const std::string& n) { return n == THETA ? 0 : 1; };

  ExprPtr gam = s.binding("Gamma");
  ExprPtr r4 = s.binding("R4");
  require(gam && r4, "curvature labels not bound");

  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> ths(0.2, 1.3), rs(0.5, 3.0);
  for (int pt = 0; pt < 5; ++pt) {
    double th0 = ths(rng), r0 = rs(rng);
    std::map<std::string, double> env{{THETA, th0}, {"r", r0}};

    double gammaE[2][2][2] = {};
    for (const auto& entry : gam->children[1]->children) {
      const auto& ix = entry->children[0]->indices;
      gammaE[axis(ix[0].name)][axis(ix[1].name)][axis(ix[2].name)] =
          eval_double(entry->children[1], env);
    }
    double riemE[2][2][2][2] = {};
    for (const auto& entry : r4->children[1]->children) {
      const auto& ix = entry->children[0]->indices;
      riemE[axis(ix[0].name)][axis(ix[1].name)][axis(ix[2].name)]
           [axis(ix[3].name)] = eval_double(entry->children[1], env);
    }

    NumericGeometry num{r0};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          require(oracle::nearly(gammaE[a][b][c], num.gamma(a, b, c, th0), 1e-4),
                  "connection component mismatch at point " +
                      std::to_string(pt));
          for (int d = 0; d < 2; ++d)
            require(oracle::nearly(riemE[a][b][c][d],
                                   num.riemann(a, b, c, d, th0), 1e-4),
                    "curvature component mismatch at point " +
                        std::to_string(pt));
        }
  }
}

// ---------------------------------------------------------------------------
// 7. CLI determinism and round-trip
// ---------------------------------------------------------------------------

void check_cli_roundtrip() {
  for (const char* name : {"maxwell", "sphere"}) {
    std::string cmd = std::string("\"") + TCE_CLI_PATH +
                      "\" --format latex --check \"" +
                      script_path(std::string(name) + ".tce") + "\" \"" +
                      script_path(std::string(name) + ".golden") + "\"";
    for (int run = 0; run < 2; ++run) {
      int rc = std::system(cmd.c_str());
      require(rc == 0, std::string(name) + ": --check failed (run " +
                           std::to_string(run + 1) + ")");
    }

    Session s(PrintMode::Latex);
    auto lines =
        s.run_script(read_file(script_path(std::string(name) + ".tce")));
    for (const auto& line : expression_lines(lines)) {
      ExprPtr parsed = parse_expression(line, s.registry());
      require(latex(parsed) == line,
              std::string(name) + ": line does not round-trip: " + line);
    }
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void()>>> criteria = {
      {"action-variation-derivation", check_action_variation},
      {"sphere-curvature-values", check_sphere_curvature},
      {"scalar-bridge-rebinding", check_scalar_bridge},
      {"canonicalisation-random-suite", check_canonicalisation},
      {"scalar-kernel-suite", check_scalar_kernel},
      {"numeric-curvature-crosscheck", check_numeric_curvature},
      {"cli-determinism-roundtrip", check_cli_roundtrip},
  };

  int failures = 0;
  for (const auto& [name, body] : criteria) {
    try {
      body();
      std::cout << "PASS  " << name << "\n";
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "FAIL  " << name << ": " << e.what() << "\n";
    }
  }
  return failures == 0 ? 0 : 1;
}
