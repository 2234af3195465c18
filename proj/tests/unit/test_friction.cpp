#include <cmath>
#include <numbers>

#include "doctest.h"
#include "generators.hpp"
#include "metricflow/evolution.hpp"
#include "metricflow/friction.hpp"

using namespace metricflow;

namespace {

const CoordinateChart one{1};
const CoordinateChart two{2};
const double e = std::exp(1.0);

Matrix diag2(double a, double b) {
  Matrix k = Matrix::Zero(2, 2);
  k(0, 0) = a;
  k(1, 1) = b;
  return k;
}

FrictionSystem sys2(const std::string& h, const Matrix& k) { return FrictionSystem::constant(two, parse(h, two), k); }

// Random system H = T(p) + U(q) with diagonal friction. Every other draw has
// a coupled potential, which is only admissible with equal rates.
FrictionSystem random_system(gen::Source& src, int trial) {
  const bool coupled = trial % 2 == 1;
  const Expr a = src.polynomial_in(two, 0, 1, 2, 2);
  const Expr b = src.polynomial_in(two, 1, 1, 2, 2);
  Expr u = parse("q1^2 + q2^2", two) + Expr(0.1) * (a * a + b * b);
  if (coupled) u = u + Expr(src.uniform(-1, 1)) * parse("q1*q2", two);
  const Expr t = parse("(p1^2 + p2^2)/2", two) + Expr(0.1) * src.polynomial_in(two, 2, 1, 3, 2) +
                 Expr(0.1) * src.polynomial_in(two, 3, 1, 3, 2);
  const double k1 = src.uniform(0, 2);
  const double k2 = coupled ? k1 : src.uniform(0, 2);
  return FrictionSystem::constant(two, t + u, diag2(k1, k2));
}

}  // namespace

TEST_SUITE("friction") {
  TEST_CASE("growth matrix and block metric for constant diagonal friction") {
    const auto sys = sys2("(p1^2+p2^2)/2 + (q1^2+q2^2)/2", diag2(1, 2));
    const Matrix g = growth_matrix(sys, 0.5, 1.5);
    CHECK(g(0, 0) == doctest::Approx(e).epsilon(1e-14));
    CHECK(g(1, 1) == doctest::Approx(e * e).epsilon(1e-14));
    CHECK(g(0, 1) == 0.0);
    const Matrix w = analytic_metric(sys, 0.5).value(PhasePoint({0, 0, 0, 0}, 1.5));
    CHECK(w(0, 2) == doctest::Approx(2.718282).epsilon(1e-6));
    CHECK(w(1, 3) == doctest::Approx(7.389056).epsilon(1e-6));
    CHECK(w(2, 0) == doctest::Approx(-e).epsilon(1e-14));
    CHECK(max_abs(analytic_metric(sys, 0.5).value(PhasePoint({0, 0, 0, 0}, 0.5)) - canonical_metric(2)) == 0.0);
  }

  TEST_CASE("no friction gives the canonical metric at every time") {
    const auto sys = sys2("(p1^2+p2^2)/2 + q1*q2", Matrix::Zero(2, 2));
    for (double t : {-1.0, 0.0, 2.0, 10.0}) {
      CHECK(max_abs(analytic_metric(sys, 0.0).value(PhasePoint({0, 0, 0, 0}, t)) - canonical_metric(2)) == 0.0);
      CHECK(determinant_factor(sys, 0.0, t) == 1.0);
    }
  }

  TEST_CASE("time-dependent diagonal friction uses quadrature") {
    const auto sys = FrictionSystem::diagonal(one, parse("p1^2/2 + q1^2/2", one), {parse("cos(t)", one)});
    CHECK(sys.time_dependent());
    CHECK(growth_matrix(sys, 0.0, std::numbers::pi)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double t : {0.3, 1.0, 2.0, 4.5})
      CHECK(std::abs(growth_matrix(sys, 0.0, t)(0, 0) - std::exp(std::sin(t))) < 1e-12 * std::exp(std::sin(t)));
    CHECK(std::abs(growth_matrix(sys, 1.0, 2.0)(0, 0) - std::exp(std::sin(2.0) - std::sin(1.0))) < 1e-12);
    // The metric rate follows dG/dt = G K(t).
    const MetricJet jet = analytic_metric(sys, 0.0).jet(PhasePoint({0, 0}, 1.0));
    CHECK(jet.temporal(0, 1) == doctest::Approx(std::exp(std::sin(1.0)) * std::cos(1.0)).epsilon(1e-12));
    CHECK_THROWS(sys.dynamics());
  }

  TEST_CASE("constant rates given as expressions collapse to a constant matrix") {
    const auto sys = FrictionSystem::diagonal(two, parse("(p1^2+p2^2)/2", two), {Expr(1.0), Expr(2.0)});
    CHECK_FALSE(sys.time_dependent());
    CHECK(max_abs(sys.constant_friction() - diag2(1, 2)) == 0.0);
    CHECK(sys.is_diagonal());
  }

  TEST_CASE("determinant factor") {
    const auto sys = sys2("(p1^2+p2^2)/2 + (q1^2+q2^2)/2", diag2(1, 2));
    CHECK(determinant_factor(sys, 0.0, 1.0) == doctest::Approx(20.085537).epsilon(1e-7));
    CHECK(std::abs(determinant_factor(sys, 0.0, 1.0) - std::exp(3.0)) < 1e-12);
    const auto damped = FrictionSystem::constant(one, parse("p1^2/2 + q1^2/2", one), Matrix::Constant(1, 1, 1.0));
    const double f = determinant_factor(damped, 0.0, 2.0);
    CHECK(f == doctest::Approx(7.389056).epsilon(1e-7));
    const double det_m = tangent_map(damped.dynamics(), PhasePoint({0.3, 0.4}, 0.0), 2.0).determinant();
    CHECK(std::abs(f - 1.0 / det_m) < 1e-7);
  }

  TEST_CASE("determinant factor matches sqrt g and the compressibility") {
    const auto sys = sys2("(p1^2+p2^2)/2 + q1^4/4", (Matrix(2, 2) << 0.5, 0.2, -0.1, 1.0).finished());
    IntegratorOptions opts;
    opts.track_divergence = true;
    for (double t : {0.25, 1.0, 2.0}) {
      const double f = determinant_factor(sys, 0.0, t);
      const double sqrt_g = metric_determinant(analytic_metric(sys, 0.0), PhasePoint({0, 0, 0, 0}, t)).sqrt_g;
      CHECK(std::abs(f - sqrt_g) < 1e-10 * f);
      const FlowSegment seg = integrate_flow(sys.dynamics(), PhasePoint({0.1, 0.2, 0.3, 0.4}, 0.0), t, opts);
      CHECK(std::abs(f - std::exp(-seg.divergence_integral)) < 1e-8 * f);
    }
  }

  TEST_CASE("applicability") {
    CHECK(applicability_check(sys2("(p1^2+p2^2)/2 + q1^2 + q2^2", diag2(1, 2))).ok);
    CHECK(applicability_check(sys2("(p1^2+p2^2)/2 + q1*q2", diag2(1, 1))).ok);
    const Applicability bad = applicability_check(sys2("(p1^2+p2^2)/2 + q1*q2", diag2(1, 2)));
    REQUIRE_FALSE(bad.ok);
    REQUIRE(bad.issues.size() == 1);
    CHECK(bad.issues[0].i == 1);
    CHECK(bad.issues[0].j == 2);
    CHECK(bad.message().find("pair (1,2)") != std::string::npos);
    CHECK(bad.message().find("exp(1*t) - exp(2*t)") != std::string::npos);
    // Mixed kinetic terms count as well.
    CHECK_FALSE(applicability_check(sys2("p1*p2 + q1^2 + q2^2", diag2(1, 2))).ok);
    // Time-dependent rates that differ.
    const auto td = FrictionSystem::diagonal(two, parse("(p1^2+p2^2)/2 + q1*q2", two), {parse("1+t", two), Expr(1.0)});
    CHECK_FALSE(applicability_check(td).ok);
    const auto same = FrictionSystem::diagonal(two, parse("(p1^2+p2^2)/2 + q1*q2", two),
                                               {parse("cos(t)", two), parse("cos(t)", two)});
    CHECK(applicability_check(same).ok);
  }

  TEST_CASE("the predicted residual matches the invariance residual") {
    const auto sys = sys2("(p1^2+p2^2)/2 + 0.7*q1*q2", diag2(1, 2));
    const Matrix r =
        invariance_residual(sys.dynamics(), analytic_metric(sys, 0.0), PhasePoint({0.1, 0.2, 0.3, 0.4}, 1.0));
    CHECK(std::abs(r(1, 0)) == doctest::Approx(std::abs((e - e * e) * 0.7)).epsilon(1e-12));
  }

  TEST_CASE("non-diagonal friction is checked numerically") {
    const Matrix k = (Matrix(2, 2) << 1.0, 0.5, 0.5, 1.0).finished();
    CHECK(applicability_check(sys2("(p1^2+p2^2)/2 + (q1^2+q2^2)/2", k)).ok);
    CHECK_FALSE(applicability_check(sys2("(p1^2+p2^2)/2 + q1^2 + 3*q2^2", k)).ok);
  }

  TEST_CASE("input validation") {
    CHECK_THROWS_AS(sys2("p1*q1", diag2(1, 1)), std::invalid_argument);
    CHECK_THROWS_AS(sys2("p1^2 + t", diag2(1, 1)), std::invalid_argument);
    CHECK_THROWS_AS(sys2("p1^2", Matrix::Identity(3, 3)), std::invalid_argument);
    CHECK_THROWS_AS(FrictionSystem::diagonal(two, parse("p1^2", two), {parse("q1", two), Expr(1.0)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(FrictionSystem::diagonal(two, parse("p1^2", two), {Expr(1.0)}), std::invalid_argument);
    // Mixed terms that cancel symbolically are not structurally zero; sin(q1+p1) is rejected.
    CHECK_THROWS_AS(sys2("sin(q1+p1)", diag2(1, 1)), std::invalid_argument);
  }
}

TEST_SUITE("friction properties") {
  TEST_CASE("admissible systems have an invariant block metric") {
    gen::Source src(51);
    for (int trial = 0; trial < 10; ++trial) {
      const FrictionSystem sys = random_system(src, trial);
      REQUIRE(applicability_check(sys).ok);
      const MetricField m = analytic_metric(sys, 0.0);
      const VectorField f = sys.dynamics();
      for (int i = 0; i < 50; ++i) {
        const PhasePoint x(src.coords(4), src.uniform(0, 3));
        CHECK(max_abs(invariance_residual(f, m, x)) < 1e-8);
      }
    }
  }

  TEST_CASE("analytic metric agrees with the pullback") {
    gen::Source src(52);
    for (int trial = 0; trial < 6; ++trial) {
      const FrictionSystem sys = random_system(src, trial);
      const MetricField m = analytic_metric(sys, 0.0);
      for (int i = 0; i < 3; ++i) {
        const PhasePoint x(src.coords(4, 0.5), src.uniform(0, 1));
        const Matrix pb = pullback_metric(sys.dynamics(), MetricField::canonical(2), x, x.time);
        CHECK(max_abs(pb - m.value(x)) < 1e-7);
      }
    }
  }

  TEST_CASE("det G is exp of the integrated trace") {
    gen::Source src(53);
    for (int trial = 0; trial < 20; ++trial) {
      Matrix k(2, 2);
      k << src.uniform(-1, 2), src.uniform(-1, 1), src.uniform(-1, 1), src.uniform(-1, 2);
      const auto sys = sys2("(p1^2+p2^2)/2", k);
      const double t0 = src.uniform(-1, 1);
      const double t = src.uniform(-1, 3);
      const double expected = std::exp((t - t0) * k.trace());
      CHECK(std::abs(std::abs(growth_matrix(sys, t0, t).determinant()) - expected) < 1e-10 * expected);
    }
  }
}
