#pragma once

#include <string_view>
#include <vector>

#include "metricflow/dynamics.hpp"
#include "metricflow/metric.hpp"

namespace metricflow {

/// Phase-space function A(x, t) with symbolic gradient and Hessian.
class Observable {
 public:
  Observable(Expr expr, int dimension);
  static Observable parse(std::string_view text, const CoordinateChart& chart);

  [[nodiscard]] const Expr& expr() const noexcept { return expr_; }
  [[nodiscard]] int dimension() const noexcept { return static_cast<int>(gradient_.size()); }
  [[nodiscard]] const Expr& gradient(int k) const { return gradient_.at(static_cast<std::size_t>(k)); }

  [[nodiscard]] double eval(const PhasePoint& x) const { return expr_.eval(x); }
  [[nodiscard]] Vector eval_gradient(const PhasePoint& x) const;
  [[nodiscard]] Matrix eval_hessian(const PhasePoint& x) const;

  /// dA/dt along the flow of `field`: dA/dt + X^k dA/dx^k.
  [[nodiscard]] Observable time_derivative(const VectorField& field) const;

 private:
  Expr expr_;
  std::vector<Expr> gradient_;
  std::vector<Expr> hessian_;  // row-major, symmetric
};

/// Bracket tensor P = w^{-T}, so that {q^i, p^j} = delta_ij for the
/// canonical metric. Throws SingularMetricError when w is degenerate.
Matrix bracket_tensor(const Matrix& w);

/// {A, B} = P^{kl} d_k A d_l B.
double poisson_bracket(const Observable& a, const Observable& b, const MetricField& metric, const PhasePoint& x);
double poisson_bracket(const Observable& a, const Observable& b, const Matrix& w, const PhasePoint& x);

/// {A,{B,C}} + {B,{C,A}} + {C,{A,B}} at x, using analytic gradients of the
/// inner brackets (metric derivatives come from the metric jet).
double bracket_jacobi_residual(const Observable& a, const Observable& b, const Observable& c, const MetricField& metric,
                               const PhasePoint& x);

struct LeibnizDefect {
  /// grad A^T P (dw/dt - J) P grad B with J the Helmholtz residual: the
  /// defect predicted from the metric and the field.
  double closed_form = 0.0;
  /// grad A^T w1 grad B with w1^{kl} = P^{km} P^{ls} (d_s X_m - d_m X_s),
  /// X_m = w_mn X^n. Equals -closed_form for a static metric.
  double verbatim = 0.0;
  /// grad A^T (dP/dt) grad B.
  double metric_rate = 0.0;
  /// d/dt{A,B} - {dA/dt, B} - {A, dB/dt} measured along the trajectory
  /// through x with a five-point central difference.
  double numerical = 0.0;
};

struct LeibnizOptions {
  double step = 1e-3;
};

LeibnizDefect leibniz_defect(const Observable& a, const Observable& b, const VectorField& field,
                             const MetricField& metric, const PhasePoint& x, const LeibnizOptions& opts = {});

}  // namespace metricflow
