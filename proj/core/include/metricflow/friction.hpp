#pragma once

#include <memory>
#include <string>
#include <vector>

#include "metricflow/dynamics.hpp"
#include "metricflow/metric.hpp"

namespace metricflow {

/// H = T(p) + U(q) with linear friction dp^i/dt = ... - K_ij p^j. K is
/// either a constant n x n matrix or diagonal with entries K_j(t).
class FrictionSystem {
 public:
  /// Throws std::invalid_argument if H mixes q and p (d2H/dq dp not
  /// identically zero), depends on t, or K has the wrong shape.
  static FrictionSystem constant(const CoordinateChart& chart, const Expr& hamiltonian, const Matrix& friction);
  /// `rates[j]` may depend on t only.
  static FrictionSystem diagonal(const CoordinateChart& chart, const Expr& hamiltonian, std::vector<Expr> rates);

  [[nodiscard]] const CoordinateChart& chart() const noexcept { return chart_; }
  [[nodiscard]] int degrees_of_freedom() const noexcept { return chart_.degrees_of_freedom(); }
  [[nodiscard]] const Expr& hamiltonian() const noexcept { return hamiltonian_; }
  [[nodiscard]] bool time_dependent() const noexcept { return !rates_.empty(); }
  [[nodiscard]] bool is_diagonal() const;
  /// Constant K (throws for time-dependent systems).
  [[nodiscard]] const Matrix& constant_friction() const;
  [[nodiscard]] const std::vector<Expr>& diagonal_rates() const noexcept { return rates_; }
  [[nodiscard]] Matrix friction_at(double t) const;

  /// X = X1 + X2 for constant K (throws for time-dependent K).
  [[nodiscard]] VectorField dynamics() const;

 private:
  FrictionSystem(CoordinateChart chart, Expr hamiltonian)
      : chart_(std::move(chart)), hamiltonian_(std::move(hamiltonian)) {}
  void validate_hamiltonian() const;

  CoordinateChart chart_;
  Expr hamiltonian_;
  Matrix constant_;
  std::vector<Expr> rates_;
};

/// G(t) = exp((t - t0) K) for constant K, diag(exp int_{t0}^t K_j) otherwise,
/// with G(t0) = identity.
Matrix growth_matrix(const FrictionSystem& sys, double t0, double t);

/// BlockGenerator for the invariant block metric [[0, G(t)], [-G^T(t), 0]].
class FrictionGenerator final : public BlockGenerator {
 public:
  FrictionGenerator(FrictionSystem sys, double t0) : sys_(std::move(sys)), t0_(t0) {}
  [[nodiscard]] int degrees_of_freedom() const override { return sys_.degrees_of_freedom(); }
  [[nodiscard]] Matrix value(double t) const override { return growth_matrix(sys_, t0_, t); }
  [[nodiscard]] Matrix rate(double t) const override { return value(t) * sys_.friction_at(t); }

 private:
  FrictionSystem sys_;
  double t0_;
};

/// The invariant metric with G(t0) = identity; the metric time is the
/// evaluation point's time.
MetricField analytic_metric(const FrictionSystem& sys, double t0);

/// sqrt(det w(t)) = |det G(t)| = exp int_{t0}^t trace K.
double determinant_factor(const FrictionSystem& sys, double t0, double t);

struct ApplicabilityIssue {
  int i = 0;  // 1-based degrees of freedom with different damping
  int j = 0;
  std::string detail;
};

struct Applicability {
  bool ok = true;
  std::vector<ApplicabilityIssue> issues;
  [[nodiscard]] std::string message() const;
};

/// Whether the block metric is expected to be invariant. Diagonal K: ok if
/// all rates coincide, or if d2U/dq^i dq^j and d2T/dp^i dp^j vanish
/// identically for every pair with K_i != K_j. Non-diagonal constant K: ok
/// only if the invariance residual of the block metric vanishes (< 1e-8) at
/// sampled points.
Applicability applicability_check(const FrictionSystem& sys);

}  // namespace metricflow
