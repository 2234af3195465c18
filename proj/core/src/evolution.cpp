#include "metricflow/evolution.hpp"

#include <cmath>
#include <string>

namespace metricflow {

const VectorField& field_part(const VectorField& field, FieldPart part) {
  switch (part) {
    case FieldPart::Hamiltonian:
      return field.hamiltonian_part();
    case FieldPart::Friction:
      return field.friction_part();
    default:
      return field;
  }
}

ExprMatrix apply_J(const VectorField& field, const ExprMatrix& w, FieldPart part) {
  const VectorField& x = field_part(field, part);
  const int d = x.dimension();
  if (w.dimension() != d) throw std::invalid_argument("apply_J: metric dimension mismatch");
  ExprMatrix out(d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) {
      if (k == l) continue;
      Expr first;
      Expr second;
      for (int s = 0; s < d; ++s) {
        first = first + differentiate(x.component(s) * w(l, s), k) - differentiate(x.component(s) * w(k, s), l);
        second = second - differentiate(x.component(s) * w(s, l), k) + differentiate(x.component(s) * w(s, k), l);
      }
      out(k, l) = Expr::constant(0.5) * (first + second);
    }
  return out;
}

namespace {

// X_l = w_lm X^m
std::vector<Expr> contract(const VectorField& x, const ExprMatrix& w) {
  const int d = x.dimension();
  std::vector<Expr> out(static_cast<std::size_t>(d));
  for (int l = 0; l < d; ++l)
    for (int m = 0; m < d; ++m)
      out[static_cast<std::size_t>(l)] = out[static_cast<std::size_t>(l)] + w(l, m) * x.component(m);
  return out;
}

// Upper triangle of d_k(w_lm X^m) - d_l(w_km X^m), completed by skew symmetry.
ExprMatrix apply_unsymmetrized_skew(const VectorField& x, const ExprMatrix& w) {
  const int d = x.dimension();
  const std::vector<Expr> contracted = contract(x, w);
  ExprMatrix out(d);
  for (int k = 0; k < d; ++k)
    for (int l = k + 1; l < d; ++l)
      out(k, l) = differentiate(contracted[static_cast<std::size_t>(l)], k) -
                  differentiate(contracted[static_cast<std::size_t>(k)], l);
  return ExprMatrix::skew_from_upper(out);
}

}  // namespace

ExprMatrix apply_J_unsymmetrized(const VectorField& field, const ExprMatrix& w, FieldPart part) {
  const VectorField& x = field_part(field, part);
  const int d = x.dimension();
  if (w.dimension() != d) throw std::invalid_argument("apply_J: metric dimension mismatch");
  const std::vector<Expr> contracted = contract(x, w);
  ExprMatrix out(d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      out(k, l) = differentiate(contracted[static_cast<std::size_t>(l)], k) -
                  differentiate(contracted[static_cast<std::size_t>(k)], l);
  return out;
}

Matrix linear_operator_matrix(const VectorField& field, FieldPart part) {
  const VectorField& x = field_part(field, part);
  if (!x.is_linear()) throw std::invalid_argument("linear_operator_matrix: field is not affine");
  const int d = x.dimension();
  const std::vector<double> origin(static_cast<std::size_t>(d), 0.0);
  const Matrix a = x.eval_jacobian(origin);
  const int s = skew_dimension(d);
  Matrix op(s, s);
  for (int i = 0; i < s; ++i) {
    const Matrix w = skew_from_vector(Vector::Unit(s, i), d);
    op.col(i) = skew_to_vector(-(a.transpose() * w + w * a));
  }
  return op;
}

// Series propagation

namespace {

void check_w0(const Matrix& w0, int d) {
  if (w0.rows() != d || w0.cols() != d) throw std::invalid_argument("series: initial metric has the wrong size");
  if (skew_defect(w0) > 1e-12 * std::max(1.0, max_abs(w0)))
    throw std::invalid_argument("series: initial metric is not skew-symmetric");
}

bool use_exact(const VectorField& x, SeriesMode mode) {
  if (mode == SeriesMode::Linear && !x.is_linear())
    throw std::invalid_argument("series: linear mode requested for a non-affine field");
  return mode != SeriesMode::Generic && x.is_linear();
}

struct Powers {
  std::vector<ExprMatrix> terms;  // J^n W, n = 0..; stops early when a power vanishes identically
  bool exhausted = false;         // the power after the last stored one is zero
};

Powers symbolic_powers(const VectorField& x, const ExprMatrix& w, int order, std::size_t cap) {
  Powers p;
  p.terms.push_back(w);
  std::size_t nodes = w.tree_size(cap);
  for (int n = 1; n <= order; ++n) {
    ExprMatrix next = apply_unsymmetrized_skew(x, p.terms.back());
    if (next.all_zero()) {
      p.exhausted = true;
      break;
    }
    nodes += next.tree_size(cap);
    if (nodes > cap)
      throw ExpressionSizeError("series: symbolic powers exceed " + std::to_string(cap) +
                                " expression nodes at order " + std::to_string(n));
    p.terms.push_back(std::move(next));
  }
  return p;
}

}  // namespace

SeriesPropagator::SeriesPropagator(std::shared_ptr<const VectorField> field, const Matrix& w0, FieldPart part,
                                   SeriesOptions opts)
    : field_(std::move(field)), w0_(w0), opts_(opts) {
  if (!field_) throw std::invalid_argument("series: null vector field");
  if (opts_.order < 1) throw std::invalid_argument("series: order must be at least 1");
  const VectorField& x = field_part(*field_, part);
  check_w0(w0_, x.dimension());
  exact_ = use_exact(x, opts_.mode);
  if (exact_) {
    operator_ = linear_operator_matrix(x);
  } else {
    powers_ = symbolic_powers(x, ExprMatrix::from_constant(skew_part(w0_)), opts_.order, opts_.node_cap).terms;
  }
}

SeriesResult SeriesPropagator::evaluate(const PhasePoint& x, double t) const {
  SeriesResult r;
  const int d = static_cast<int>(w0_.rows());
  if (x.dimension() != d) throw std::invalid_argument("series: point dimension mismatch");
  if (t == 0.0) {
    r.value = w0_;
    r.exact = exact_;
    r.terms = 1;
    return r;
  }
  if (exact_) {
    r.exact = true;
    r.value = skew_from_vector(expm(t * operator_) * skew_to_vector(w0_), d);
    return r;
  }
  Matrix sum = Matrix::Zero(d, d);
  double coef = 1.0;
  int small_in_a_row = 0;
  for (std::size_t n = 0; n < powers_.size(); ++n) {
    const Matrix term = coef * powers_[n].eval(x);
    sum += term;
    r.terms = static_cast<int>(n) + 1;
    r.last_term_norm = term.norm();
    coef *= t / static_cast<double>(n + 1);
    if (n > 0 && r.last_term_norm < opts_.tolerance) {
      if (++small_in_a_row == 2) break;
    } else {
      small_in_a_row = 0;
    }
  }
  // Truncation was forced only if every available term was used and the
  // next power is not identically zero.
  const bool truncated = r.terms == opts_.order + 1;
  r.divergence_warning = truncated && r.last_term_norm > sum.norm();
  r.value = sum;
  return r;
}

SeriesResult series_propagate(const VectorField& field, const Matrix& w0, double t, const PhasePoint& x,
                              SeriesOptions opts) {
  SeriesPropagator prop(std::make_shared<const VectorField>(field), w0, FieldPart::All, opts);
  return prop.evaluate(x, t);
}

// Strang splitting

namespace {

// sum_{n} tau^n/n! J^n w, symbolically; returns the last-term norm at x.
ExprMatrix symbolic_exponential(const VectorField& x, const ExprMatrix& w, double tau, const SeriesOptions& opts,
                                const PhasePoint& at, double& last_norm) {
  const Powers p = symbolic_powers(x, w, opts.order, opts.node_cap);
  const int d = w.dimension();
  ExprMatrix out(d);
  double coef = 1.0;
  for (std::size_t n = 0; n < p.terms.size(); ++n) {
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) out(k, l) = out(k, l) + Expr::constant(coef) * p.terms[n](k, l);
    if (n + 1 == p.terms.size()) last_norm = p.exhausted ? 0.0 : std::abs(coef) * p.terms[n].eval(at).norm();
    coef *= tau / static_cast<double>(n + 1);
  }
  if (out.tree_size(opts.node_cap) > opts.node_cap)
    throw ExpressionSizeError("splitting: propagated metric exceeds " + std::to_string(opts.node_cap) +
                              " expression nodes");
  return out;
}

}  // namespace

SplitResult split_propagate(const VectorField& field, const Matrix& w0, const SplittingConfig& cfg, const PhasePoint& x,
                            SeriesOptions opts) {
  if (cfg.steps < 1) throw std::invalid_argument("splitting: steps must be at least 1");
  if (!field.has_split()) throw std::invalid_argument("splitting: the vector field has no declared split");
  const int d = field.dimension();
  check_w0(w0, d);
  if (x.dimension() != d) throw std::invalid_argument("splitting: point dimension mismatch");

  const VectorField& x1 = field.hamiltonian_part();
  const VectorField& x2 = field.friction_part();
  const double dt = cfg.t / cfg.steps;
  SplitResult r;
  r.steps.resize(static_cast<std::size_t>(cfg.steps));

  if (use_exact(x1, opts.mode) && use_exact(x2, opts.mode)) {
    r.exact_substeps = true;
    const Matrix half = expm(0.5 * dt * linear_operator_matrix(x2));
    const Matrix step = half * expm(dt * linear_operator_matrix(x1)) * half;
    Vector v = skew_to_vector(w0);
    for (int i = 0; i < cfg.steps; ++i) v = step * v;
    r.value = skew_from_vector(v, d);
    return r;
  }

  ExprMatrix w = ExprMatrix::from_constant(skew_part(w0));
  for (auto& diag : r.steps) {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    w = symbolic_exponential(x2, w, 0.5 * dt, opts, x, a);
    w = symbolic_exponential(x1, w, dt, opts, x, b);
    w = symbolic_exponential(x2, w, 0.5 * dt, opts, x, c);
    diag.last_term_norm = std::max({a, b, c});
    diag.divergence_warning = diag.last_term_norm > w.eval(x).norm();
  }
  r.value = w.eval(x);
  return r;
}

// Pullback transport

PullbackResult pullback(const VectorField& field, const MetricField& initial, const PhasePoint& x,
                        const IntegratorOptions& opts) {
  if (initial.dimension() != field.dimension() || x.dimension() != field.dimension())
    throw std::invalid_argument("pullback: dimension mismatch");
  IntegratorOptions o = opts;
  o.track_divergence = true;
  o.sample_times.clear();
  FlowSegment seg = integrate_with_tangent(field, x, 0.0, o);
  PullbackResult r;
  r.tangent = *seg.tangent;
  r.origin = PhasePoint(seg.end.coords, 0.0);
  const Matrix w0 = initial.value(r.origin);
  r.value = skew_part(r.tangent.transpose() * w0 * r.tangent);
  r.divergence_integral = seg.divergence_integral;
  return r;
}

Matrix pullback_metric(const VectorField& field, const MetricField& initial, const PhasePoint& x, double t,
                       const IntegratorOptions& opts) {
  return pullback(field, initial, PhasePoint(x.coords, t), opts).value;
}

Matrix invariance_residual(const VectorField& field, const MetricJet& jet, const PhasePoint& x) {
  return jet.temporal - helmholtz_residual(field, jet, x);
}

Matrix invariance_residual(const VectorField& field, const MetricField& metric, const PhasePoint& x) {
  return invariance_residual(field, metric.jet(x), x);
}

}  // namespace metricflow
