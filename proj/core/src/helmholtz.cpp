#include "metricflow/helmholtz.hpp"

#include <algorithm>
#include <stdexcept>

#include "metricflow/parallel.hpp"

namespace metricflow {

Matrix helmholtz_residual(const VectorField& field, const MetricJet& jet, const PhasePoint& x) {
  const int d = field.dimension();
  if (x.dimension() != d || jet.value.rows() != d)
    throw std::invalid_argument("helmholtz_residual: dimension mismatch");
  const Vector xv = field.eval(x.coords);
  const Matrix a = field.eval_jacobian(x.coords);  // a(m, k) = d_k X^m

  // y(l, k) = d_k (w_lm X^m)
  Matrix y(d, d);
  for (int k = 0; k < d; ++k) {
    const Matrix& dw = jet.spatial[static_cast<std::size_t>(k)];
    y.col(k) = dw * xv + jet.value * a.col(k);
  }
  // J_kl = y(l, k) - y(k, l)
  return y.transpose() - y;
}

Matrix helmholtz_residual(const VectorField& field, const MetricField& metric, const PhasePoint& x) {
  return helmholtz_residual(field, metric.jet(x), x);
}

double CanonicalBlocks::max_abs() const {
  return std::max({metricflow::max_abs(r1), metricflow::max_abs(r2), metricflow::max_abs(r3)});
}

CanonicalBlocks canonical_helmholtz(const std::vector<Expr>& g, const std::vector<Expr>& f, const PhasePoint& x) {
  const int n = static_cast<int>(g.size());
  if (static_cast<int>(f.size()) != n || x.dimension() != 2 * n)
    throw std::invalid_argument("canonical_helmholtz: expected n components each and a 2n point");
  auto d = [&](const Expr& e, int var) { return differentiate(e, var).eval(x); };
  auto q = [](int i) { return i; };
  auto p = [n](int i) { return n + i; };
  CanonicalBlocks out{Matrix(n, n), Matrix(n, n), Matrix(n, n)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      out.r1(i, j) = d(g[ui], p(j)) - d(g[uj], p(i));
      out.r2(i, j) = d(g[uj], q(i)) + d(f[ui], p(j));
      out.r3(i, j) = d(f[ui], q(j)) - d(f[uj], q(i));
    }
  return out;
}

CanonicalBlocks canonical_helmholtz(const VectorField& field, const PhasePoint& x) {
  const auto& c = field.components();
  const auto n = c.size() / 2;
  return canonical_helmholtz(std::vector<Expr>(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(n)),
                             std::vector<Expr>(c.begin() + static_cast<std::ptrdiff_t>(n), c.end()), x);
}

const char* verdict_name(Verdict v) noexcept { return v == Verdict::Hamiltonian ? "hamiltonian" : "non-hamiltonian"; }

HelmholtzReport classify(const VectorField& field, const MetricField& metric, const std::vector<PhasePoint>& samples,
                         double tolerance) {
  if (samples.empty()) throw std::invalid_argument("classify: need at least one sample point");
  if (metric.dimension() != field.dimension()) throw std::invalid_argument("classify: metric dimension mismatch");
  const bool canonical = metric.kind() == MetricKind::Constant &&
                         metric.constant_matrix() == canonical_metric(field.chart().degrees_of_freedom());

  HelmholtzReport report;
  report.tolerance = tolerance;
  report.points.resize(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    PointResidual& r = report.points[i];
    r.point = samples[i];
    const MetricJet jet = metric.jet(r.point);
    r.residual = helmholtz_residual(field, jet, r.point);
    r.max_abs = max_abs(r.residual);
    r.degenerate = metric_determinant(jet.value).degenerate;
    if (canonical) r.canonical = canonical_helmholtz(field, r.point);
  });

  for (std::size_t i = 0; i < report.points.size(); ++i) {
    report.max_abs = std::max(report.max_abs, report.points[i].max_abs);
    if (report.points[i].degenerate) report.warnings.push_back("metric is degenerate at sample " + std::to_string(i));
  }
  report.verdict = report.max_abs < tolerance ? Verdict::Hamiltonian : Verdict::NonHamiltonian;
  return report;
}

}  // namespace metricflow
