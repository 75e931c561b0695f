#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bsrd/expression.hpp"

using namespace bsrd;

TEST_CASE("arithmetic with precedence and parentheses") {
  const Expression e = Expression::parse("1 + 2 * 3 - 4 / 2", {});
  CHECK(e.eval({}) == doctest::Approx(5.0));
  CHECK(Expression::parse("(1 + 2) * 3", {}).eval({}) == doctest::Approx(9.0));
  CHECK(Expression::parse("2 ^ 3 ^ 2", {}).eval({}) == doctest::Approx(512.0));  // right assoc
  CHECK(Expression::parse("-2^2", {}).eval({}) == doctest::Approx(-4.0));
}

TEST_CASE("variables and parameters") {
  const Expression e = Expression::parse("k1 * u1 * v1 ^ 2", {"u1", "v1"}, {{"k1", 3.0}});
  CHECK(e.eval({2.0, 5.0}) == doctest::Approx(150.0));
}

TEST_CASE("max0 clamps below zero") {
  const Expression e = Expression::parse("max0(c - v1)", {"v1"}, {{"c", 2.0}});
  CHECK(e.eval({1.5}) == doctest::Approx(0.5));
  CHECK(e.eval({3.0}) == 0.0);
}

TEST_CASE("parse errors carry position and suggestions") {
  CHECK_THROWS_AS(Expression::parse("1 +", {}), ExpressionError);
  CHECK_THROWS_AS(Expression::parse("foo(2)", {}), ExpressionError);
  CHECK_THROWS_AS(Expression::parse("unknown_var", {"u1"}), ExpressionError);
  CHECK_THROWS_AS(Expression::parse("(1 + 2", {}), ExpressionError);
  CHECK_THROWS_AS(Expression::parse("1 2", {}), ExpressionError);
}

TEST_CASE("signaling-style rational expressions are total on the orthant") {
  const Expression e =
      Expression::parse("k3 * v1 / (v1 + k4)", {"v1"}, {{"k3", 1.0}, {"k4", 1.0}});
  CHECK(e.eval({0.0}) == 0.0);
  CHECK(e.eval({1.0}) == doctest::Approx(0.5));
  CHECK(e.eval({1e9}) == doctest::Approx(1.0).epsilon(1e-8));
}
