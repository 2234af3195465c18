#pragma once

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "metricflow/expr.hpp"
#include "metricflow/linalg.hpp"
#include "metricflow/phase_point.hpp"

namespace metricflow {

/// Autonomous vector field dx/dt = X(x) on a 2n-dimensional chart, with
/// symbolic Jacobian and divergence. Optionally carries a split X = X1 + X2
/// into a Hamiltonian part and a friction part.
class VectorField {
 public:
  /// Throws std::invalid_argument when a component mentions `t` or a
  /// coordinate outside the chart.
  static VectorField from_components(const CoordinateChart& chart, std::vector<Expr> components);

  /// X1^k = P_kl dH/dx^l with P = metric^{-T} (Hamilton's equations for the
  /// canonical metric) and X2 = (0, -K p). `friction` is n x n, `metric`
  /// 2n x 2n, constant and nondegenerate. The result carries the split.
  static VectorField from_hamiltonian(const CoordinateChart& chart, const Expr& hamiltonian, const Matrix& friction,
                                      const Matrix& metric);
  static VectorField from_hamiltonian(const CoordinateChart& chart, const Expr& hamiltonian, const Matrix& friction);

  /// X = X1 + X2 with the split recorded.
  static VectorField from_split(const VectorField& hamiltonian_part, const VectorField& friction_part);

  [[nodiscard]] const CoordinateChart& chart() const noexcept { return chart_; }
  [[nodiscard]] int dimension() const noexcept { return chart_.dimension(); }
  [[nodiscard]] const std::vector<Expr>& components() const noexcept { return components_; }
  [[nodiscard]] const Expr& component(int k) const { return components_.at(static_cast<std::size_t>(k)); }
  /// dX^i / dx^j.
  [[nodiscard]] const Expr& jacobian(int i, int j) const;
  [[nodiscard]] const Expr& divergence() const noexcept { return divergence_; }

  [[nodiscard]] bool has_split() const noexcept { return static_cast<bool>(hamiltonian_part_); }
  [[nodiscard]] const VectorField& hamiltonian_part() const;
  [[nodiscard]] const VectorField& friction_part() const;

  /// Every component is a polynomial of degree <= 1 (affine field).
  [[nodiscard]] bool is_linear() const noexcept { return linear_; }

  [[nodiscard]] Vector eval(std::span<const double> x) const;
  [[nodiscard]] Matrix eval_jacobian(std::span<const double> x) const;
  [[nodiscard]] double eval_divergence(std::span<const double> x) const { return divergence_.eval(x, 0.0); }

 private:
  VectorField(CoordinateChart chart, std::vector<Expr> components);

  CoordinateChart chart_;
  std::vector<Expr> components_;
  std::vector<Expr> jacobian_;  // row-major, (i, j) -> dX^i/dx^j
  Expr divergence_;
  bool linear_ = false;
  std::shared_ptr<const VectorField> hamiltonian_part_;
  std::shared_ptr<const VectorField> friction_part_;
};

/// Componentwise evaluation of X at x.
Vector eval_field(const VectorField& field, const PhasePoint& x);

/// Phase-space compressibility: the divergence sum_k dX^k/dx^k at x.
double compressibility(const VectorField& field, const PhasePoint& x);

struct IntegratorOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  long max_steps = 1'000'000;
  /// Times (between start and end, inclusive) at which to record the state
  /// by dense interpolation.
  std::vector<double> sample_times;
  /// Take uniform steps of at most this size without error control.
  std::optional<double> fixed_step;
  /// Replay an explicit sequence of step lengths without error control. The
  /// last step is stretched or shrunk to land on the end time.
  std::vector<double> mesh;
  /// Also integrate the compressibility along the trajectory.
  bool track_divergence = false;
};

struct FlowSample {
  double time = 0.0;
  std::vector<double> coords;
};

struct FlowStats {
  long steps = 0;
  long rejected = 0;
  double max_error_estimate = 0.0;  // largest accepted scaled error norm
};

/// Numerically integrated trajectory segment. `tangent` is the Jacobian
/// dx(t1)/dx(t0) when requested (identity at t1 == t0). `mesh` holds the
/// accepted step lengths, usable as IntegratorOptions::mesh.
struct FlowSegment {
  PhasePoint start;
  PhasePoint end;
  std::vector<FlowSample> samples;
  std::optional<Matrix> tangent;
  double divergence_integral = 0.0;  // integral of the compressibility over [t0, t1]
  std::vector<double> mesh;
  FlowStats stats;
};

/// Integration failed (step-size underflow, step budget exhausted, domain
/// error in the field). Carries the last successfully reached state.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& message, PhasePoint last_good);
  [[nodiscard]] const PhasePoint& last_good() const noexcept { return last_good_; }

 private:
  PhasePoint last_good_;
};

/// Dormand-Prince 5(4) integration from x0 (at x0.time) to t1. t1 < x0.time
/// integrates the negated field forward. Samples are interpolated with cubic
/// Hermite polynomials.
FlowSegment integrate_flow(const VectorField& field, const PhasePoint& x0, double t1,
                           const IntegratorOptions& opts = {});

/// As integrate_flow, also integrating the variational equation
/// dM/dt = DX(x) M, M(t0) = I.
FlowSegment integrate_with_tangent(const VectorField& field, const PhasePoint& x0, double t1,
                                   const IntegratorOptions& opts = {});

/// dx(t1)/dx(t0).
Matrix tangent_map(const VectorField& field, const PhasePoint& x0, double t1, const IntegratorOptions& opts = {});

}  // namespace metricflow
