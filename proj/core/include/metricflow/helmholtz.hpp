#pragma once

#include <optional>
#include <string>
#include <vector>

#include "metricflow/dynamics.hpp"
#include "metricflow/metric.hpp"

namespace metricflow {

/// J_kl = d_k(w_lm X^m) - d_l(w_km X^m) at (x, x.time). Zero everywhere iff
/// the 1-form w(X) is closed, i.e. X is Hamiltonian for w.
Matrix helmholtz_residual(const VectorField& field, const MetricJet& jet, const PhasePoint& x);
Matrix helmholtz_residual(const VectorField& field, const MetricField& metric, const PhasePoint& x);

/// Residual blocks for dq/dt = G(q, p), dp/dt = F(q, p):
///   R1_ij = dG^i/dp^j - dG^j/dp^i
///   R2_ij = dG^j/dq^i + dF^i/dp^j
///   R3_ij = dF^i/dq^j - dF^j/dq^i
/// For the canonical metric J(q,q) = -R3, J(q,p) = -R2 and J(p,p) = R1.
struct CanonicalBlocks {
  Matrix r1;
  Matrix r2;
  Matrix r3;
  [[nodiscard]] double max_abs() const;
};

CanonicalBlocks canonical_helmholtz(const std::vector<Expr>& g, const std::vector<Expr>& f, const PhasePoint& x);
CanonicalBlocks canonical_helmholtz(const VectorField& field, const PhasePoint& x);

enum class Verdict { Hamiltonian, NonHamiltonian };

const char* verdict_name(Verdict v) noexcept;

struct PointResidual {
  PhasePoint point;
  Matrix residual;
  double max_abs = 0.0;
  std::optional<CanonicalBlocks> canonical;
  bool degenerate = false;
};

struct HelmholtzReport {
  std::vector<PointResidual> points;
  double max_abs = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::Hamiltonian;
  std::vector<std::string> warnings;
};

/// Residuals at every sample point; Hamiltonian iff the largest entry is
/// below `tolerance`. Canonical blocks are attached when the metric is the
/// constant canonical one.
HelmholtzReport classify(const VectorField& field, const MetricField& metric, const std::vector<PhasePoint>& samples,
                         double tolerance = 1e-8);

}  // namespace metricflow
