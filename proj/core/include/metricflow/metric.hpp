#pragma once

#include <memory>
#include <stdexcept>
#include <variant>
#include <vector>

#include "metricflow/dynamics.hpp"
#include "metricflow/expr.hpp"
#include "metricflow/linalg.hpp"
#include "metricflow/phase_point.hpp"

namespace metricflow {

/// Square matrix of expressions in (x, t).
class ExprMatrix {
 public:
  ExprMatrix() = default;
  explicit ExprMatrix(int dimension);
  static ExprMatrix from_constant(const Matrix& m);
  /// Keeps the strict upper triangle of `m`, zeroes the diagonal and sets the
  /// lower triangle to the negated upper one.
  static ExprMatrix skew_from_upper(const ExprMatrix& m);

  [[nodiscard]] int dimension() const noexcept { return dim_; }
  Expr& operator()(int k, int l) { return entries_.at(index(k, l)); }
  const Expr& operator()(int k, int l) const { return entries_.at(index(k, l)); }

  [[nodiscard]] Matrix eval(const PhasePoint& x) const;
  [[nodiscard]] ExprMatrix derivative(int variable) const;
  [[nodiscard]] bool all_constant() const;
  [[nodiscard]] bool all_zero() const;
  /// Total tree size over all entries, saturating at cap + 1.
  [[nodiscard]] std::size_t tree_size(std::size_t cap) const;

 private:
  [[nodiscard]] std::size_t index(int k, int l) const;
  int dim_ = 0;
  std::vector<Expr> entries_;
};

/// Time-dependent n x n matrix G(t) and its derivative dG/dt, used by the
/// block metric [[0, G], [-G^T, 0]]. Implemented by the friction module.
class BlockGenerator {
 public:
  virtual ~BlockGenerator() = default;
  [[nodiscard]] virtual int degrees_of_freedom() const = 0;
  [[nodiscard]] virtual Matrix value(double t) const = 0;
  [[nodiscard]] virtual Matrix rate(double t) const = 0;
};

/// Metric value with its first derivatives at one (x, t): spatial[k] holds
/// d omega / dx^k, temporal holds d omega / dt.
struct MetricJet {
  Matrix value;
  std::vector<Matrix> spatial;
  Matrix temporal;
};

enum class MetricKind { Constant, Expression, FrictionAnalytic, Transported };

/// Skew-symmetric metric field omega_kl(x, t).
///
/// Four representations: a constant matrix, a matrix of expressions, the
/// block form driven by a BlockGenerator, and a transported metric whose
/// values come from pulling an initial metric back along the flow of a
/// vector field. Evaluating a transported metric integrates the flow (and
/// its tangent map) once per call; its jet uses central differences over
/// replayed integration meshes.
class MetricField {
 public:
  static MetricField constant(const Matrix& w);
  static MetricField canonical(int n);
  /// Throws std::invalid_argument if `w` is not skew at sampled points.
  static MetricField expressions(const ExprMatrix& w);
  static MetricField friction_analytic(std::shared_ptr<const BlockGenerator> generator);
  /// The metric at time 0 is `initial`; at time t it is the pullback of
  /// `initial` along the backward flow of `field` over [0, t].
  static MetricField transported(const MetricField& initial, std::shared_ptr<const VectorField> field,
                                 IntegratorOptions opts = {});

  [[nodiscard]] MetricKind kind() const noexcept;
  [[nodiscard]] int dimension() const noexcept { return dim_; }
  [[nodiscard]] bool differentiable_symbolically() const noexcept { return kind() != MetricKind::Transported; }

  [[nodiscard]] Matrix value(const PhasePoint& x) const;
  [[nodiscard]] MetricJet jet(const PhasePoint& x) const;

  [[nodiscard]] const Matrix& constant_matrix() const;
  [[nodiscard]] const ExprMatrix& expression_matrix() const;
  [[nodiscard]] const BlockGenerator& generator() const;
  [[nodiscard]] const MetricField& initial() const;
  [[nodiscard]] const VectorField& transport_field() const;
  [[nodiscard]] const IntegratorOptions& transport_options() const;

  /// Finite-difference step used for transported metrics at coordinate value v.
  static double fd_step(double v) noexcept;

 private:
  struct ConstantRep {
    Matrix w;
  };
  struct ExpressionRep {
    ExprMatrix w;
    std::vector<ExprMatrix> spatial;
    ExprMatrix temporal;
  };
  struct FrictionRep {
    std::shared_ptr<const BlockGenerator> generator;
  };
  struct TransportedRep {
    std::shared_ptr<const MetricField> initial;
    std::shared_ptr<const VectorField> field;
    IntegratorOptions opts;
  };

  MetricField(int dim, std::variant<ConstantRep, ExpressionRep, FrictionRep, TransportedRep> rep)
      : dim_(dim), rep_(std::move(rep)) {}

  MetricJet transported_jet(const TransportedRep& rep, const PhasePoint& x) const;

  int dim_;
  std::variant<ConstantRep, ExpressionRep, FrictionRep, TransportedRep> rep_;
};

class SingularMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Threshold on |det omega| below which a metric is treated as degenerate.
inline constexpr double kDegeneracyThreshold = 1e-12;

/// omega_kl at x (x.time is the metric time).
Matrix metric_eval(const MetricField& metric, const PhasePoint& x);

/// max over (k, l, m) of |d_k w_lm + d_l w_mk + d_m w_kl|.
double jacobi_residual(const MetricJet& jet);
double jacobi_residual(const MetricField& metric, const PhasePoint& x);

struct DeterminantInfo {
  double g = 0.0;
  double sqrt_g = 0.0;
  bool degenerate = false;
};

DeterminantInfo metric_determinant(const Matrix& w);
DeterminantInfo metric_determinant(const MetricField& metric, const PhasePoint& x);

/// Matrix inverse of omega (skew). Throws SingularMetricError when degenerate.
Matrix inverse_metric(const Matrix& w);
Matrix inverse_metric(const MetricField& metric, const PhasePoint& x);

}  // namespace metricflow
