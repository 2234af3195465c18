#include "metricflow/brackets.hpp"

#include <stdexcept>

#include "metricflow/helmholtz.hpp"

namespace metricflow {

Observable::Observable(Expr expr, int dimension) : expr_(std::move(expr)) {
  if (dimension <= 0) throw std::invalid_argument("observable: dimension must be positive");
  if (max_variable_index(expr_) >= dimension)
    throw std::invalid_argument("observable references a coordinate outside the chart");
  const auto d = static_cast<std::size_t>(dimension);
  gradient_.reserve(d);
  for (int k = 0; k < dimension; ++k) gradient_.push_back(differentiate(expr_, k));
  hessian_.resize(d * d);
  for (int k = 0; k < dimension; ++k)
    for (int l = k; l < dimension; ++l) {
      Expr h = differentiate(gradient_[static_cast<std::size_t>(k)], l);
      hessian_[static_cast<std::size_t>(k) * d + static_cast<std::size_t>(l)] = h;
      hessian_[static_cast<std::size_t>(l) * d + static_cast<std::size_t>(k)] = h;
    }
}

Observable Observable::parse(std::string_view text, const CoordinateChart& chart) {
  return Observable(metricflow::parse(text, chart), chart.dimension());
}

Vector Observable::eval_gradient(const PhasePoint& x) const {
  Vector g(dimension());
  for (int k = 0; k < dimension(); ++k) g(k) = gradient_[static_cast<std::size_t>(k)].eval(x);
  return g;
}

Matrix Observable::eval_hessian(const PhasePoint& x) const {
  const int d = dimension();
  Matrix h(d, d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) h(k, l) = hessian_[static_cast<std::size_t>(k * d + l)].eval(x);
  return h;
}

Observable Observable::time_derivative(const VectorField& field) const {
  if (field.dimension() != dimension()) throw std::invalid_argument("observable: field dimension mismatch");
  Expr rate = differentiate(expr_, kTimeVariable);
  for (int k = 0; k < dimension(); ++k) rate = rate + field.component(k) * gradient_[static_cast<std::size_t>(k)];
  return Observable(rate, dimension());
}

Matrix bracket_tensor(const Matrix& w) {
  if (metric_determinant(w).degenerate) throw SingularMetricError("bracket: metric is degenerate");
  return skew_part(w.fullPivLu().inverse().transpose());
}

double poisson_bracket(const Observable& a, const Observable& b, const Matrix& w, const PhasePoint& x) {
  return a.eval_gradient(x).dot(bracket_tensor(w) * b.eval_gradient(x));
}

double poisson_bracket(const Observable& a, const Observable& b, const MetricField& metric, const PhasePoint& x) {
  return poisson_bracket(a, b, metric.value(x), x);
}

double bracket_jacobi_residual(const Observable& a, const Observable& b, const Observable& c, const MetricField& metric,
                               const PhasePoint& x) {
  const MetricJet jet = metric.jet(x);
  const Matrix p = bracket_tensor(jet.value);
  const int d = static_cast<int>(p.rows());
  std::vector<Matrix> dp(static_cast<std::size_t>(d));
  for (int m = 0; m < d; ++m) dp[static_cast<std::size_t>(m)] = p * jet.spatial[static_cast<std::size_t>(m)] * p;

  struct Local {
    Vector grad;
    Matrix hess;
  };
  const Local la{a.eval_gradient(x), a.eval_hessian(x)};
  const Local lb{b.eval_gradient(x), b.eval_hessian(x)};
  const Local lc{c.eval_gradient(x), c.eval_hessian(x)};

  // grad {U, V} = H_U P grad V + H_V P^T grad U + e_m (grad U^T dP/dx^m grad V)
  auto inner_gradient = [&](const Local& u, const Local& v) {
    Vector g = u.hess * (p * v.grad) + v.hess * (p.transpose() * u.grad);
    for (int m = 0; m < d; ++m) g(m) += u.grad.dot(dp[static_cast<std::size_t>(m)] * v.grad);
    return g;
  };
  auto outer = [&](const Local& u, const Vector& inner) { return u.grad.dot(p * inner); };

  return outer(la, inner_gradient(lb, lc)) + outer(lb, inner_gradient(lc, la)) + outer(lc, inner_gradient(la, lb));
}

LeibnizDefect leibniz_defect(const Observable& a, const Observable& b, const VectorField& field,
                             const MetricField& metric, const PhasePoint& x, const LeibnizOptions& opts) {
  if (field.dimension() != metric.dimension() || a.dimension() != field.dimension() ||
      b.dimension() != field.dimension())
    throw std::invalid_argument("leibniz_defect: dimension mismatch");
  LeibnizDefect out;

  const MetricJet jet = metric.jet(x);
  const Matrix p = bracket_tensor(jet.value);
  const Matrix j = helmholtz_residual(field, jet, x);
  const Vector ga = a.eval_gradient(x);
  const Vector gb = b.eval_gradient(x);
  out.verbatim = ga.dot(p * j * p * gb);
  out.metric_rate = ga.dot(p * jet.temporal * p * gb);
  out.closed_form = out.metric_rate - out.verbatim;

  // {A,B} along the trajectory through (x, t); each shifted state is one
  // fixed Dormand-Prince step from x.
  const double h = opts.step;
  auto bracket_at = [&](double s) {
    IntegratorOptions io;
    io.fixed_step = std::abs(s);
    const FlowSegment seg = integrate_flow(field, x, x.time + s, io);
    return poisson_bracket(a, b, metric, PhasePoint(seg.end.coords, x.time + s));
  };
  const double rate = (bracket_at(-2 * h) - 8 * bracket_at(-h) + 8 * bracket_at(h) - bracket_at(2 * h)) / (12 * h);
  const Observable a_dot = a.time_derivative(field);
  const Observable b_dot = b.time_derivative(field);
  out.numerical = rate - a_dot.eval_gradient(x).dot(p * gb) - ga.dot(p * b_dot.eval_gradient(x));
  return out;
}

}  // namespace metricflow
