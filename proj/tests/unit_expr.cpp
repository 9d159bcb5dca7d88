#include "doctest.h"
#include "tce/expr.hpp"

using namespace tce;

namespace {
Index up(const std::string& n) { return Index{n, Variance::Upper}; }
Index dn(const std::string& n) { return Index{n, Variance::Lower}; }
}  // namespace

TEST_CASE("rational leaves fold exactly") {
  CHECK(is_zero(make_int(0)));
  CHECK(make_rational(Rational(2, 4))->value == Rational(1, 2));
  ExprPtr p = make_power(make_int(2), make_int(10));
  REQUIRE(p->kind == Kind::Rational);
  CHECK(p->value == Rational(1024));
  ExprPtr q = make_power(make_rational(Rational(2, 3)), make_int(-2));
  CHECK(q->value == Rational(9, 4));
}

TEST_CASE("product invariants: flattening, coefficient slot, annihilation") {
  ExprPtr x = make_symbol("x");
  ExprPtr y = make_symbol("y");

  ExprPtr p = make_product({make_int(2), x, make_product({make_int(3), y})});
  REQUIRE(p->kind == Kind::Product);
  REQUIRE(p->children.size() == 3);
  CHECK(p->children[0]->value == Rational(6));
  CHECK(p->children[1] == x);
  CHECK(p->children[2] == y);

  CHECK(is_zero(make_product({make_int(0), x})));
  CHECK(make_product({make_int(1), x}) == x);
  CHECK(make_product({make_int(2), make_rational(Rational(1, 2))})->value ==
        Rational(1));
}

TEST_CASE("sum invariants: flattening and zero dropping") {
  ExprPtr x = make_symbol("x");
  ExprPtr y = make_symbol("y");
  ExprPtr s = make_sum({x, make_int(0), make_sum({y, x})});
  REQUIRE(s->kind == Kind::Sum);
  CHECK(s->children.size() == 3);
  CHECK(is_zero(make_sum({})));
  CHECK(make_sum({x}) == x);
}

TEST_CASE("power invariants") {
  ExprPtr x = make_symbol("x");
  ExprPtr y = make_symbol("y");
  CHECK(make_power(x, make_int(0))->value == Rational(1));
  CHECK(make_power(x, make_int(1)) == x);

  // (x^2)^3 = x^6
  ExprPtr n = make_power(make_power(x, make_int(2)), make_int(3));
  REQUIRE(n->kind == Kind::Power);
  CHECK(n->children[1]->value == Rational(6));

  // (x y)^2 distributes over the factors
  ExprPtr d = make_power(make_product({x, y}), make_int(2));
  REQUIRE(d->kind == Kind::Product);
  CHECK(d->children.size() == 2);
  CHECK(d->children[0]->kind == Kind::Power);
}

TEST_CASE("term decomposition round-trips") {
  ExprPtr x = make_symbol("x");
  ExprPtr t = make_product({make_rational(Rational(-3, 4)), x,
                            make_tensor("F", {dn("a"), dn("b")})});
  TermParts tp = term_parts(t);
  CHECK(tp.coefficient == Rational(-3, 4));
  CHECK(tp.factors.size() == 2);
  CHECK(structural_equal(make_term(tp.coefficient, tp.factors), t));

  TermParts lone = term_parts(make_int(5));
  CHECK(lone.coefficient == Rational(5));
  CHECK(lone.factors.empty());
}

TEST_CASE("comparison is a strict total order on distinct shapes") {
  ExprPtr a = make_tensor("F", {up("m"), dn("n")});
  ExprPtr b = make_tensor("F", {dn("m"), dn("n")});
  ExprPtr c = make_tensor("G", {dn("m"), dn("n")});

  // upper sorts before lower on the same name
  CHECK(compare_expr(a, b) < 0);
  CHECK(compare_expr(b, a) > 0);
  CHECK(compare_expr(a, a) == 0);
  CHECK(compare_expr(b, c) < 0);  // F before G
  CHECK(structural_equal(a, make_tensor("F", {up("m"), dn("n")})));
  CHECK_FALSE(structural_equal(a, b));
}

TEST_CASE("with_children re-runs the owning factory") {
  ExprPtr x = make_symbol("x");
  ExprPtr y = make_symbol("y");
  ExprPtr s = make_sum({x, y});
  ExprPtr collapsed = with_children(s, {x, make_int(0)});
  CHECK(collapsed == x);

  ExprPtr t = make_tensor("F", {dn("a"), dn("b")});
  ExprPtr d = make_derivative("partial", {dn("c")}, t);
  ExprPtr d2 = with_children(d, {make_tensor("F", {dn("a"), dn("c")})});
  CHECK(d2->name == "partial");
  CHECK(d2->indices.size() == 1);
  CHECK(d2->children[0]->indices[1].name == "c");
}

TEST_CASE("integral stores its measure coordinate on the node") {
  ExprPtr body = make_symbol("x");
  ExprPtr i = make_integral(body, "x");
  CHECK(i->kind == Kind::Integral);
  CHECK(i->name == "x");
  CHECK(i->children.size() == 1);
}

TEST_CASE("symbol containment search") {
  ExprPtr e = make_sum({make_function("sin", make_symbol("x")),
                        make_power(make_symbol("y"), make_int(2))});
  CHECK(contains_symbol(e, "x"));
  CHECK(contains_symbol(e, "y"));
  CHECK_FALSE(contains_symbol(e, "z"));
}
