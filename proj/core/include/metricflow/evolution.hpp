#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "metricflow/dynamics.hpp"
#include "metricflow/helmholtz.hpp"
#include "metricflow/metric.hpp"

namespace metricflow {

/// Which part of a split field X = X1 + X2 drives the operator.
enum class FieldPart { All, Hamiltonian, Friction };

const VectorField& field_part(const VectorField& field, FieldPart part);

/// One application of the metric operator, symmetrized form:
/// (J w)_kl = 1/2 sum_{m,s} [(d^m_l d_k - d^m_k d_l) X^s - (d^s_l d_k - d^s_k d_l) X^m] w_ms,
/// with the derivatives acting on the products X w. `w` must be skew.
ExprMatrix apply_J(const VectorField& field, const ExprMatrix& w, FieldPart part = FieldPart::All);

/// The same operator written as d_k(w_lm X^m) - d_l(w_km X^m).
ExprMatrix apply_J_unsymmetrized(const VectorField& field, const ExprMatrix& w, FieldPart part = FieldPart::All);

/// For an affine field with constant Jacobian A the operator maps constant
/// skew matrices to constant skew matrices, (J W) = -(A^T W + W A). Returns
/// its matrix on the coordinates of skew_to_vector. Throws
/// std::invalid_argument for non-affine fields.
Matrix linear_operator_matrix(const VectorField& field, FieldPart part = FieldPart::All);

enum class SeriesMode { Auto, Linear, Generic };

struct SeriesOptions {
  int order = 20;
  double tolerance = 1e-14;  // stop once two consecutive terms fall below this norm
  SeriesMode mode = SeriesMode::Auto;
  std::size_t node_cap = 1'000'000;
};

/// Raised when symbolic powers of the operator outgrow SeriesOptions::node_cap.
class ExpressionSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SeriesResult {
  Matrix value;
  bool exact = false;  // summed as a matrix exponential
  int terms = 0;       // number of terms summed (generic path)
  double last_term_norm = 0.0;
  bool divergence_warning = false;
};

/// exp(t J) W0 for a constant skew W0. Affine fields (Auto or Linear mode)
/// use the exact matrix exponential on the skew space; otherwise the powers
/// J^n W0 are expanded symbolically once and shared by all evaluations.
class SeriesPropagator {
 public:
  SeriesPropagator(std::shared_ptr<const VectorField> field, const Matrix& w0, FieldPart part = FieldPart::All,
                   SeriesOptions opts = {});

  [[nodiscard]] SeriesResult evaluate(const PhasePoint& x, double t) const;
  [[nodiscard]] bool exact() const noexcept { return exact_; }
  /// Symbolic J^n W0 (generic path only).
  [[nodiscard]] const std::vector<ExprMatrix>& powers() const noexcept { return powers_; }
  [[nodiscard]] const Matrix& operator_matrix() const noexcept { return operator_; }

 private:
  std::shared_ptr<const VectorField> field_;
  Matrix w0_;
  SeriesOptions opts_;
  bool exact_ = false;
  Matrix operator_;
  std::vector<ExprMatrix> powers_;
};

/// Sum_{n=0}^{order} t^n/n! (J^n W0)(x), or the exact exponential for affine fields.
SeriesResult series_propagate(const VectorField& field, const Matrix& w0, double t, const PhasePoint& x,
                              SeriesOptions opts = {});

struct SplittingConfig {
  double t = 0.0;
  int steps = 1;
};

struct SplitStepDiagnostic {
  double last_term_norm = 0.0;  // largest last-term norm among the three sub-exponentials
  bool divergence_warning = false;
};

struct SplitResult {
  Matrix value;
  bool exact_substeps = false;
  std::vector<SplitStepDiagnostic> steps;
};

/// N Strang steps exp(dt/2 J2) exp(dt J1) exp(dt/2 J2), dt = t/N, with J1
/// driven by the Hamiltonian part and J2 by the friction part. Requires a
/// declared split.
SplitResult split_propagate(const VectorField& field, const Matrix& w0, const SplittingConfig& cfg, const PhasePoint& x,
                            SeriesOptions opts = {});

struct PullbackResult {
  Matrix value;
  PhasePoint origin;                 // x0, the backward image of x at time 0
  Matrix tangent;                    // dx0/dx
  double divergence_integral = 0.0;  // integral of kappa from t back to 0
};

/// M^T w(x0, 0) M with x0 the backward flow of x over time x.time and
/// M = dx0/dx.
PullbackResult pullback(const VectorField& field, const MetricField& initial, const PhasePoint& x,
                        const IntegratorOptions& opts = {});

/// Pullback of `initial` to time t at coordinates x.
Matrix pullback_metric(const VectorField& field, const MetricField& initial, const PhasePoint& x, double t,
                       const IntegratorOptions& opts = {});

/// d w_kl/dt - d_k(w_lm X^m) + d_l(w_km X^m) at (x, x.time).
Matrix invariance_residual(const VectorField& field, const MetricJet& jet, const PhasePoint& x);
Matrix invariance_residual(const VectorField& field, const MetricField& metric, const PhasePoint& x);

}  // namespace metricflow
