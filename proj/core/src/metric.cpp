#include "metricflow/metric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "metricflow/sampling.hpp"

namespace metricflow {

// ExprMatrix

ExprMatrix::ExprMatrix(int dimension) : dim_(dimension) {
  if (dimension < 0) throw std::invalid_argument("ExprMatrix: negative dimension");
  entries_.resize(static_cast<std::size_t>(dimension) * static_cast<std::size_t>(dimension));
}

ExprMatrix ExprMatrix::from_constant(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("ExprMatrix: matrix must be square");
  ExprMatrix out(static_cast<int>(m.rows()));
  for (int k = 0; k < out.dim_; ++k)
    for (int l = 0; l < out.dim_; ++l) out(k, l) = Expr::constant(m(k, l));
  return out;
}

ExprMatrix ExprMatrix::skew_from_upper(const ExprMatrix& m) {
  ExprMatrix out(m.dim_);
  for (int k = 0; k < m.dim_; ++k)
    for (int l = k + 1; l < m.dim_; ++l) {
      out(k, l) = m(k, l);
      out(l, k) = -m(k, l);
    }
  return out;
}

std::size_t ExprMatrix::index(int k, int l) const {
  if (k < 0 || l < 0 || k >= dim_ || l >= dim_) throw std::out_of_range("ExprMatrix index");
  return static_cast<std::size_t>(k) * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(l);
}

Matrix ExprMatrix::eval(const PhasePoint& x) const {
  Matrix out(dim_, dim_);
  for (int k = 0; k < dim_; ++k)
    for (int l = 0; l < dim_; ++l) out(k, l) = (*this)(k, l).eval(x);
  return out;
}

ExprMatrix ExprMatrix::derivative(int variable) const {
  ExprMatrix out(dim_);
  for (std::size_t i = 0; i < entries_.size(); ++i) out.entries_[i] = differentiate(entries_[i], variable);
  return out;
}

bool ExprMatrix::all_constant() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const Expr& e) { return e.op() == Op::Constant; });
}

bool ExprMatrix::all_zero() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const Expr& e) { return e.is_zero(); });
}

std::size_t ExprMatrix::tree_size(std::size_t cap) const {
  std::size_t total = 0;
  for (const Expr& e : entries_) {
    total += metricflow::tree_size(e, cap);
    if (total > cap) return cap + 1;
  }
  return total;
}

// MetricField

namespace {

void check_square_skew(const Matrix& w, const char* what) {
  if (w.rows() != w.cols() || w.rows() % 2 != 0 || w.rows() == 0)
    throw std::invalid_argument(std::string(what) + ": metric must be 2n x 2n");
  const double scale = std::max(1.0, max_abs(w));
  if (skew_defect(w) > 1e-12 * scale) throw std::invalid_argument(std::string(what) + ": metric is not skew-symmetric");
}

}  // namespace

MetricField MetricField::constant(const Matrix& w) {
  check_square_skew(w, "constant metric");
  return MetricField(static_cast<int>(w.rows()), ConstantRep{skew_part(w)});
}

MetricField MetricField::canonical(int n) { return constant(canonical_metric(n)); }

MetricField MetricField::expressions(const ExprMatrix& w) {
  const int d = w.dimension();
  if (d == 0 || d % 2 != 0) throw std::invalid_argument("expression metric: metric must be 2n x 2n");
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      if (max_variable_index(w(k, l)) >= d)
        throw std::invalid_argument("expression metric: entry (" + std::to_string(k + 1) + "," + std::to_string(l + 1) +
                                    ") references a coordinate outside the chart");

  SampleSpec spec;
  spec.count = 24;
  spec.seed = 0x5eed;
  spec.time_max = 1.0;
  for (const PhasePoint& x : sample_points(d, spec)) {
    Matrix value;
    try {
      value = w.eval(x);
    } catch (const DomainError&) {
      continue;
    }
    const double scale = std::max(1.0, max_abs(value));
    if (skew_defect(value) > 1e-10 * scale)
      throw std::invalid_argument("expression metric: entries are not skew-symmetric");
  }

  ExpressionRep rep;
  rep.w = ExprMatrix::skew_from_upper(w);
  rep.spatial.reserve(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) rep.spatial.push_back(rep.w.derivative(k));
  rep.temporal = rep.w.derivative(kTimeVariable);
  return MetricField(d, std::move(rep));
}

MetricField MetricField::friction_analytic(std::shared_ptr<const BlockGenerator> generator) {
  if (!generator) throw std::invalid_argument("friction metric: null generator");
  const int n = generator->degrees_of_freedom();
  if (n <= 0) throw std::invalid_argument("friction metric: need at least one degree of freedom");
  return MetricField(2 * n, FrictionRep{std::move(generator)});
}

MetricField MetricField::transported(const MetricField& initial, std::shared_ptr<const VectorField> field,
                                     IntegratorOptions opts) {
  if (!field) throw std::invalid_argument("transported metric: null vector field");
  if (field->dimension() != initial.dimension())
    throw std::invalid_argument("transported metric: field and metric dimensions differ");
  opts.sample_times.clear();
  opts.track_divergence = false;
  return MetricField(initial.dimension(),
                     TransportedRep{std::make_shared<const MetricField>(initial), std::move(field), std::move(opts)});
}

MetricKind MetricField::kind() const noexcept {
  switch (rep_.index()) {
    case 0:
      return MetricKind::Constant;
    case 1:
      return MetricKind::Expression;
    case 2:
      return MetricKind::FrictionAnalytic;
    default:
      return MetricKind::Transported;
  }
}

const Matrix& MetricField::constant_matrix() const {
  if (const auto* rep = std::get_if<ConstantRep>(&rep_)) return rep->w;
  throw std::logic_error("metric is not constant");
}

const ExprMatrix& MetricField::expression_matrix() const {
  if (const auto* rep = std::get_if<ExpressionRep>(&rep_)) return rep->w;
  throw std::logic_error("metric is not given by expressions");
}

const BlockGenerator& MetricField::generator() const {
  if (const auto* rep = std::get_if<FrictionRep>(&rep_)) return *rep->generator;
  throw std::logic_error("metric is not friction-analytic");
}

const MetricField& MetricField::initial() const {
  if (const auto* rep = std::get_if<TransportedRep>(&rep_)) return *rep->initial;
  throw std::logic_error("metric is not transported");
}

const VectorField& MetricField::transport_field() const {
  if (const auto* rep = std::get_if<TransportedRep>(&rep_)) return *rep->field;
  throw std::logic_error("metric is not transported");
}

const IntegratorOptions& MetricField::transport_options() const {
  if (const auto* rep = std::get_if<TransportedRep>(&rep_)) return rep->opts;
  throw std::logic_error("metric is not transported");
}

double MetricField::fd_step(double v) noexcept { return 1e-5 * std::max(1.0, std::abs(v)); }

namespace {

struct Pullback {
  Matrix value;
  std::vector<double> mesh;
};

// Pulls the initial metric back from time `from` at x to time 0, composing
// with an extra tangent `pre` (the map from the caller's point to x).
Pullback pullback(const MetricField& initial, const VectorField& field, const std::vector<double>& x, double from,
                  const IntegratorOptions& opts, const Matrix* pre = nullptr) {
  FlowSegment seg = integrate_with_tangent(field, PhasePoint(x, from), 0.0, opts);
  Matrix m = *seg.tangent;
  if (pre) m = m * *pre;
  const Matrix w0 = initial.value(PhasePoint(seg.end.coords, 0.0));
  return {skew_part(m.transpose() * w0 * m), std::move(seg.mesh)};
}

}  // namespace

Matrix MetricField::value(const PhasePoint& x) const {
  if (x.dimension() != dim_) throw std::invalid_argument("metric: point dimension mismatch");
  return std::visit(
      [&](const auto& rep) -> Matrix {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, ConstantRep>) {
          return rep.w;
        } else if constexpr (std::is_same_v<T, ExpressionRep>) {
          return rep.w.eval(x);
        } else if constexpr (std::is_same_v<T, FrictionRep>) {
          return block_metric(rep.generator->value(x.time));
        } else {
          return pullback(*rep.initial, *rep.field, x.coords, x.time, rep.opts).value;
        }
      },
      rep_);
}

MetricJet MetricField::transported_jet(const TransportedRep& rep, const PhasePoint& x) const {
  const int d = dim_;
  MetricJet jet;
  Pullback base = pullback(*rep.initial, *rep.field, x.coords, x.time, rep.opts);
  jet.value = base.value;

  IntegratorOptions replay = rep.opts;
  replay.fixed_step.reset();
  replay.mesh = base.mesh;

  jet.spatial.resize(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    const double h = fd_step(x.coords[static_cast<std::size_t>(k)]);
    std::vector<double> plus = x.coords;
    std::vector<double> minus = x.coords;
    plus[static_cast<std::size_t>(k)] += h;
    minus[static_cast<std::size_t>(k)] -= h;
    const Matrix wp = pullback(*rep.initial, *rep.field, plus, x.time, replay).value;
    const Matrix wm = pullback(*rep.initial, *rep.field, minus, x.time, replay).value;
    jet.spatial[static_cast<std::size_t>(k)] = (wp - wm) / (2.0 * h);
  }

  // omega(x, t +- h): one extra step of length h taken before replaying the
  // base mesh, so both sides share the same discretisation of [0, t].
  const double h = fd_step(x.time);
  IntegratorOptions single = rep.opts;
  single.mesh.clear();
  single.fixed_step = h;
  auto shifted = [&](double sign) {
    FlowSegment pre = integrate_with_tangent(*rep.field, PhasePoint(x.coords, x.time + sign * h), x.time, single);
    return pullback(*rep.initial, *rep.field, pre.end.coords, x.time, replay, &*pre.tangent).value;
  };
  jet.temporal = (shifted(1.0) - shifted(-1.0)) / (2.0 * h);
  return jet;
}

MetricJet MetricField::jet(const PhasePoint& x) const {
  if (x.dimension() != dim_) throw std::invalid_argument("metric: point dimension mismatch");
  const int d = dim_;
  return std::visit(
      [&](const auto& rep) -> MetricJet {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, ConstantRep>) {
          return {rep.w, std::vector<Matrix>(static_cast<std::size_t>(d), Matrix::Zero(d, d)), Matrix::Zero(d, d)};
        } else if constexpr (std::is_same_v<T, ExpressionRep>) {
          MetricJet jet;
          jet.value = rep.w.eval(x);
          for (const ExprMatrix& dk : rep.spatial) jet.spatial.push_back(dk.eval(x));
          jet.temporal = rep.temporal.eval(x);
          return jet;
        } else if constexpr (std::is_same_v<T, FrictionRep>) {
          return {block_metric(rep.generator->value(x.time)),
                  std::vector<Matrix>(static_cast<std::size_t>(d), Matrix::Zero(d, d)),
                  block_metric(rep.generator->rate(x.time))};
        } else {
          return transported_jet(rep, x);
        }
      },
      rep_);
}

// Free functions

Matrix metric_eval(const MetricField& metric, const PhasePoint& x) { return metric.value(x); }

double jacobi_residual(const MetricJet& jet) {
  const int d = static_cast<int>(jet.value.rows());
  double worst = 0.0;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      for (int m = 0; m < d; ++m) {
        const double r = jet.spatial[static_cast<std::size_t>(k)](l, m) +
                         jet.spatial[static_cast<std::size_t>(l)](m, k) +
                         jet.spatial[static_cast<std::size_t>(m)](k, l);
        worst = std::max(worst, std::abs(r));
      }
  return worst;
}

double jacobi_residual(const MetricField& metric, const PhasePoint& x) { return jacobi_residual(metric.jet(x)); }

DeterminantInfo metric_determinant(const Matrix& w) {
  DeterminantInfo info;
  info.g = w.determinant();
  info.sqrt_g = std::sqrt(std::abs(info.g));
  info.degenerate = std::abs(info.g) < kDegeneracyThreshold;
  return info;
}

DeterminantInfo metric_determinant(const MetricField& metric, const PhasePoint& x) {
  return metric_determinant(metric.value(x));
}

Matrix inverse_metric(const Matrix& w) {
  if (metric_determinant(w).degenerate) throw SingularMetricError("metric is degenerate (|det| below threshold)");
  return skew_part(w.fullPivLu().inverse());
}

Matrix inverse_metric(const MetricField& metric, const PhasePoint& x) { return inverse_metric(metric.value(x)); }

}  // namespace metricflow
