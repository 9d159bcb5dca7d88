#include <string>
#include <vector>

#include "doctest.h"
#include "tce/error.hpp"
#include "tce/expr.hpp"
#include "tce/printer.hpp"
#include "tce/session.hpp"

using namespace tce;

namespace {
std::string plain(const ExprPtr& e) { return print_expr(e, PrintMode::Plain); }
}  // namespace

TEST_CASE("assign, show, and the display terminators") {
  Session s;
  auto out = s.run_script("ex := 2 + 3;\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "5");  // post-processing collects the terms
  CHECK(plain(s.binding("ex")) == "5");

  CHECK(s.run_script("ex.\n").empty());  // '.' suppresses display
  out = s.run_script("ex;\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "5");

  // showing an unbound symbol just shows the symbol
  out = s.run_script("q;\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "q");

  // '_' starts out as zero in a fresh session
  Session t;
  out = t.run_script("_;\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "0");

  // ...and afterwards names the previous statement's result
  out = s.run_script("_;\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "q");
}

TEST_CASE("attach echo lines") {
  Session s(PrintMode::Latex);
  auto out = s.run_script(
      "{\\mu, \\nu}::Indices(values={x, y}, position=fixed);\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] ==
        "Attached property Indices(position=fixed) to [\\mu, \\nu].");

  out = s.run_script("F_{\\mu \\nu}::AntiSymmetric;\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "Attached property AntiSymmetric to F_{\\mu \\nu}.");

  out = s.run_script("\\delta{#}::Accent;\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "Attached property Accent to \\delta{#}.");

  // '.' attaches silently
  CHECK(s.run_script("\\partial{#}::PartialDerivative.\n").empty());
}

TEST_CASE("scalar bridge rebinds through '_'") {
  Session s;
  s.run_script("x::Coordinate.\n");
  auto out = s.run_script("ex := \\int{1/x}{x};\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "int x**(-1) dx");  // plain mode spells the integral bare

  // '_' names the most recent binding, so the result lands back in ex
  out = s.run_script("map_scalar(_);\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "log(x)");
  out = s.run_script("ex;\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "log(x)");
}

TEST_CASE("to_scalar and scalar_call leave bindings untouched") {
  Session s;
  s.run_script("x::Coordinate.\n");
  s.run_script("tr := sin(x)**2 + cos(x)**2;\n");

  auto out = s.run_script("scalar_call(\"expand_trig\", tr);\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "1");
  CHECK(plain(s.binding("tr")) != "1");  // binding unchanged
  CHECK(plain(s.last()) == "1");

  // to_scalar brings the argument to kernel normal form without rebinding
  // (no trig identities: that is expand_trig's job)
  std::string before = plain(s.binding("tr"));
  out = s.run_script("to_scalar(tr);\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "cos(x)**2 + sin(x)**2");
  CHECK(plain(s.binding("tr")) == before);

  // after an anonymous result, '_' no longer names a label: operating on it
  // must not write back into tr
  s.run_script("distribute(_);\n");
  CHECK(plain(s.binding("tr")) == before);
}

TEST_CASE("post-processing pipeline control") {
  Session s;
  s.run_script("set_post_process();\n");
  auto out = s.run_script("ex := 2 + 3;\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "2 + 3");  // pipeline disabled

  s.run_script("set_post_process(collect_terms);\n");
  out = s.run_script("ex := 2 + 3;\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "5");

  CHECK_THROWS_AS(s.run_script("set_post_process(zap);\n"), EngineError);
}

TEST_CASE("assignments are post-processed before binding") {
  Session s(PrintMode::Latex);
  s.run_script("{\\mu, \\nu}::Indices.\n");
  s.run_script("F_{\\mu \\nu}::AntiSymmetric.\n");
  auto out = s.run_script("ex := F_{\\nu \\mu};\n");
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "-F_{\\mu \\nu}");

  // a call ending in '.' still rebinds, it just stays quiet
  CHECK(s.run_script("canonicalise(ex).\n").empty());
  CHECK(print_expr(s.binding("ex"), PrintMode::Latex) == "-F_{\\mu \\nu}");
}

TEST_CASE("session error reporting") {
  Session s;
  // unbound label in an operation argument
  try {
    s.run_script("distribute(nosuch);\n");
    FAIL("expected an error");
  } catch (const EngineError& e) {
    CHECK(e.kind() == ErrorKind::UnboundLabel);
    CHECK(std::string(e.what()).rfind("line 1:", 0) == 0);
  }

  // the line prefix reflects the statement's position in the script
  try {
    s.run_script("ok := 1;\n\ndistribute(nosuch);\n");
    FAIL("expected an error");
  } catch (const EngineError& e) {
    CHECK(std::string(e.what()).rfind("line 3:", 0) == 0);
  }

  CHECK_THROWS_AS(s.run_script("frobnicate(ok);\n"), EngineError);

  // an engine error must not corrupt the session: ok is still bound
  CHECK(plain(s.binding("ok")) == "1");
}
