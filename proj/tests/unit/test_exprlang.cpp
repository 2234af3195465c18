#include <cmath>
#include <limits>

#include "doctest.h"
#include "generators.hpp"
#include "metricflow/expr.hpp"
#include "oracles.hpp"

using namespace metricflow;

namespace {

const CoordinateChart one{1};
const CoordinateChart two{2};

double at(const Expr& e, std::vector<double> x, double t = 0.0) { return e.eval(x, t); }

oracle::ScalarFn as_function(const Expr& e, double t = 0.0) {
  return [e, t](const Vector& v) { return e.eval(std::span<const double>(v.data(), v.size()), t); };
}

}  // namespace

TEST_SUITE("exprlang") {
  TEST_CASE("chart names") {
    CHECK(two.names() == std::vector<std::string>{"q1", "q2", "p1", "p2"});
    CHECK(two.index_of("p1") == 2);
    CHECK_FALSE(two.index_of("t").has_value());
    CHECK_THROWS_AS(CoordinateChart(1, {"x", "t"}), std::invalid_argument);
    CHECK_THROWS_AS(CoordinateChart(1, {"x", "x"}), std::invalid_argument);
    CHECK_THROWS_AS(CoordinateChart(1, {"x"}), std::invalid_argument);
    CHECK_THROWS_AS(CoordinateChart(0), std::invalid_argument);
  }

  TEST_CASE("parse builds the tree under standard precedence") {
    const Expr e = parse("p1^2/2 + q1^2/2", one);
    REQUIRE(e.op() == Op::Add);
    const Expr& lhs = e.child(0);
    REQUIRE(lhs.op() == Op::Divide);
    REQUIRE(lhs.child(0).op() == Op::Power);
    CHECK(lhs.child(0).child(0).variable_name() == "p1");
    CHECK(lhs.child(0).child(1).constant_value() == 2.0);
    CHECK(lhs.child(1).constant_value() == 2.0);
    const Expr& rhs = e.child(1);
    REQUIRE(rhs.op() == Op::Divide);
    CHECK(rhs.child(0).child(0).variable_name() == "q1");
  }

  TEST_CASE("power is right associative and binds tighter than unary minus") {
    CHECK(at(parse("2^3^2", one), {0, 0}) == 512.0);
    CHECK(at(parse("-2^2", one), {0, 0}) == -4.0);
    CHECK(at(parse("2^-1", one), {0, 0}) == 0.5);
    CHECK(at(parse("8/4/2", one), {0, 0}) == 1.0);
    CHECK(at(parse("1-2-3", one), {0, 0}) == -4.0);
    CHECK(at(parse("--q1", one), {3, 0}) == 3.0);
    CHECK(at(parse("1.5e2 + .5 + 2.", one), {0, 0}) == 152.5);
  }

  TEST_CASE("syntax errors carry a byte offset") {
    try {
      (void)parse("sin(q1", one);
      FAIL("expected a parse error");
    } catch (const ParseError& err) {
      CHECK(err.offset() == 7);
    }
    CHECK_THROWS_AS(parse("", one), ParseError);
    CHECK_THROWS_AS(parse("q1 +", one), ParseError);
    CHECK_THROWS_AS(parse("q1 q1", one), ParseError);
    CHECK_THROWS_AS(parse("foo(q1)", one), ParseError);
    CHECK_THROWS_AS(parse("1e", one), ParseError);
  }

  TEST_CASE("unknown identifiers are named") {
    try {
      (void)parse("q3", one);
      FAIL("expected an unknown-identifier error");
    } catch (const UnknownIdentifierError& err) {
      CHECK(err.identifier() == "q3");
      CHECK(err.offset() == 1);
      CHECK(std::string(err.what()).find("q3") != std::string::npos);
    }
  }

  TEST_CASE("custom coordinate names and time") {
    const CoordinateChart chart(1, {"x", "v"});
    const Expr e = parse("x*v + t", chart);
    CHECK(at(e, {2, 3}, 0.5) == 6.5);
    CHECK_THROWS_AS(parse("q1", chart), UnknownIdentifierError);
  }

  TEST_CASE("eval") {
    CHECK(at(parse("p1^2/2", one), {0, 2}) == 2.0);
    CHECK(at(parse("exp(t)", one), {0, 0}, 0.0) == 1.0);
    CHECK(at(parse("sqrt(q1)*tanh(0)+cos(0)", one), {4, 0}) == 1.0);
  }

  TEST_CASE("domain errors are reported, not NaN") {
    try {
      (void)at(parse("1 + log(q1)", one), {-1, 0});
      FAIL("expected a domain error");
    } catch (const DomainError& err) {
      CHECK(err.node() == "log(q1)");
    }
    CHECK_THROWS_AS(at(parse("1/q1", one), {0, 0}), DomainError);
    CHECK_THROWS_AS(at(parse("sqrt(q1)", one), {-1, 0}), DomainError);
    CHECK_THROWS_AS(at(parse("q1^0.5", one), {-1, 0}), DomainError);
    CHECK_THROWS_AS(at(parse("exp(q1)", one), {1000, 0}), DomainError);
  }

  TEST_CASE("differentiate") {
    const Expr h = parse("p1^2/2 + q1^2/2", one);
    CHECK(differentiate(h, 1).to_string() == "p1");
    CHECK(differentiate(parse("p1", one), 0).to_string() == "0");
    CHECK(differentiate(parse("sin(q1*q2)", two), 0).to_string() == "cos(q1*q2)*q2");
    CHECK(differentiate(parse("t^2 + q1", one), kTimeVariable).to_string() == "2*t");
  }

  TEST_CASE("derivative of sin(q1*q2) matches finite differences") {
    const Expr e = parse("sin(q1*q2)", two);
    const Expr d = differentiate(e, 0);
    gen::Source src(11);
    for (int i = 0; i < 10; ++i) {
      const Vector x = src.point(4, 2.0);
      const double exact = d.eval(std::span<const double>(x.data(), 4), 0.0);
      const double fd = oracle::central_diff(as_function(e), x, 0);
      CHECK(std::abs(exact - fd) <= 1e-6 * std::max(1.0, std::abs(exact)));
    }
  }

  TEST_CASE("simplification is minimal") {
    const Expr q = Expr::variable(0, "q1");
    CHECK((q + 0.0).same_node(q));
    CHECK((q * 1.0).same_node(q));
    CHECK((q * 0.0).is_zero());
    CHECK(pow(q, Expr(1.0)).same_node(q));
    CHECK((Expr(2.0) * Expr(3.0)).constant_value() == 6.0);
    // No rewriting beyond constant folding and identities.
    CHECK((q - q).to_string() == "q1-q1");
  }

  TEST_CASE("structural queries") {
    const Expr e = parse("q1*p2 + sin(t)", two);
    CHECK(depends_on(e, 0));
    CHECK_FALSE(depends_on(e, 1));
    CHECK(depends_on(e, kTimeVariable));
    CHECK(max_variable_index(e) == 3);
    CHECK_FALSE(polynomial_degree(e).has_value());
    CHECK(polynomial_degree(parse("q1*p2^2 + 3", two)) == 3);
    CHECK(polynomial_degree(parse("(q1+1)/2", two)) == 1);
    CHECK(tree_size(parse("q1+q2", two)) == 3);
    CHECK(tree_size(parse("q1+q2+p1+p2", two), 2) == 3);
  }
}

TEST_SUITE("exprlang properties") {
  TEST_CASE("print then parse evaluates identically") {
    gen::Source src(2024);
    for (int trial = 0; trial < 40; ++trial) {
      const Expr e = src.smooth(two, 4, true);
      const Expr back = parse(e.to_string(), two);
      for (int i = 0; i < 100; ++i) {
        const auto x = src.coords(4);
        const double t = src.uniform(0, 1);
        const double a = e.eval(x, t);
        const double b = back.eval(x, t);
        INFO(e.to_string());
        REQUIRE(std::abs(a - b) < 1e-12 * std::max(1.0, std::abs(a)));
      }
    }
  }

  TEST_CASE("every function node differentiates like finite differences") {
    for (const auto* text : {"sin(q1)", "cos(q1)", "exp(q1)", "log(2+q1)", "sqrt(2+q1)", "tanh(q1)", "q1^3", "q1^q1",
                             "1/(2+q1)", "(2+q1)^0.5", "2^q1"}) {
      const Expr e = parse(text, one);
      const Expr d = differentiate(e, 0);
      gen::Source src(5);
      for (int i = 0; i < 20; ++i) {
        Vector x(2);
        x << src.uniform(0.1, 1.5), src.uniform(-1, 1);
        const double exact = d.eval(std::span<const double>(x.data(), 2), 0.0);
        const double fd = oracle::central_diff(as_function(e), x, 0);
        INFO(text);
        CHECK(std::abs(exact - fd) <= 1e-6 * std::max(1.0, std::abs(exact)));
      }
    }
  }

  TEST_CASE("random smooth trees differentiate like finite differences") {
    gen::Source src(77);
    for (int trial = 0; trial < 30; ++trial) {
      const Expr e = src.smooth(two, 3);
      const int var = src.integer(0, 3);
      const Expr d = differentiate(e, var);
      for (int i = 0; i < 5; ++i) {
        const Vector x = src.point(4);
        const double exact = d.eval(std::span<const double>(x.data(), 4), 0.0);
        const double fd = oracle::central_diff(as_function(e), x, var, 1e-5);
        INFO(e.to_string());
        CHECK(std::abs(exact - fd) <= 1e-6 * std::max(1.0, std::abs(exact)));
      }
    }
  }

  TEST_CASE("mixed partial derivatives commute") {
    gen::Source src(99);
    for (int trial = 0; trial < 30; ++trial) {
      const Expr e = src.smooth(two, 3, true);
      const int a = src.integer(-1, 3);
      const int b = src.integer(-1, 3);
      const Expr ab = differentiate(differentiate(e, a), b);
      const Expr ba = differentiate(differentiate(e, b), a);
      for (int i = 0; i < 5; ++i) {
        const auto x = src.coords(4);
        const double t = src.uniform(0, 1);
        const double u = ab.eval(x, t);
        const double v = ba.eval(x, t);
        INFO(e.to_string());
        CHECK(std::abs(u - v) <= 1e-9 * std::max(1.0, std::abs(u)));
      }
    }
  }

  TEST_CASE("evaluation is deterministic") {
    gen::Source src(3);
    const Expr e = src.smooth(two, 5);
    const auto x = src.coords(4);
    const double first = e.eval(x, 0.0);
    for (int i = 0; i < 10; ++i) CHECK(e.eval(x, 0.0) == first);
  }
}
