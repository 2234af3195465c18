#include "metricflow/dynamics.hpp"

#include <string>

namespace metricflow {

VectorField::VectorField(CoordinateChart chart, std::vector<Expr> components)
    : chart_(std::move(chart)), components_(std::move(components)) {
  const int d = chart_.dimension();
  if (static_cast<int>(components_.size()) != d)
    throw std::invalid_argument("vector field: expected " + std::to_string(d) + " components, got " +
                                std::to_string(components_.size()));
  linear_ = true;
  for (int i = 0; i < d; ++i) {
    const Expr& c = components_[static_cast<std::size_t>(i)];
    if (depends_on(c, kTimeVariable))
      throw std::invalid_argument("vector field: component " + std::to_string(i + 1) +
                                  " depends on t; only autonomous fields are supported");
    if (max_variable_index(c) >= d)
      throw std::invalid_argument("vector field: component " + std::to_string(i + 1) +
                                  " references a coordinate outside the chart");
    auto degree = polynomial_degree(c);
    if (!degree || *degree > 1) linear_ = false;
  }
  jacobian_.reserve(static_cast<std::size_t>(d * d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) jacobian_.push_back(differentiate(components_[static_cast<std::size_t>(i)], j));
  for (int k = 0; k < d; ++k) divergence_ = divergence_ + jacobian(k, k);
}

VectorField VectorField::from_components(const CoordinateChart& chart, std::vector<Expr> components) {
  return VectorField(chart, std::move(components));
}

VectorField VectorField::from_hamiltonian(const CoordinateChart& chart, const Expr& hamiltonian, const Matrix& friction,
                                          const Matrix& metric) {
  const int n = chart.degrees_of_freedom();
  const int d = chart.dimension();
  if (friction.rows() != n || friction.cols() != n)
    throw std::invalid_argument("vector field: friction matrix must be n x n");
  if (metric.rows() != d || metric.cols() != d) throw std::invalid_argument("vector field: metric must be 2n x 2n");
  if (depends_on(hamiltonian, kTimeVariable))
    throw std::invalid_argument("vector field: the Hamiltonian must not depend on t");

  auto lu = metric.fullPivLu();
  if (!lu.isInvertible()) throw std::invalid_argument("vector field: metric is singular");
  const Matrix poisson = lu.inverse().transpose();

  std::vector<Expr> gradient;
  gradient.reserve(static_cast<std::size_t>(d));
  for (int l = 0; l < d; ++l) gradient.push_back(differentiate(hamiltonian, l));

  std::vector<Expr> conservative(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    Expr sum;
    for (int l = 0; l < d; ++l)
      if (poisson(k, l) != 0.0) sum = sum + Expr::constant(poisson(k, l)) * gradient[static_cast<std::size_t>(l)];
    conservative[static_cast<std::size_t>(k)] = sum;
  }

  std::vector<Expr> damping(static_cast<std::size_t>(d));
  for (int i = 0; i < n; ++i) {
    Expr sum;
    for (int j = 0; j < n; ++j)
      if (friction(i, j) != 0.0) sum = sum - Expr::constant(friction(i, j)) * Expr::variable(n + j, chart.name(n + j));
    damping[static_cast<std::size_t>(n + i)] = sum;
  }

  return from_split(VectorField(chart, std::move(conservative)), VectorField(chart, std::move(damping)));
}

VectorField VectorField::from_hamiltonian(const CoordinateChart& chart, const Expr& hamiltonian,
                                          const Matrix& friction) {
  return from_hamiltonian(chart, hamiltonian, friction, canonical_metric(chart.degrees_of_freedom()));
}

VectorField VectorField::from_split(const VectorField& hamiltonian_part, const VectorField& friction_part) {
  if (!(hamiltonian_part.chart() == friction_part.chart()))
    throw std::invalid_argument("vector field: split parts use different charts");
  std::vector<Expr> sum;
  sum.reserve(hamiltonian_part.components().size());
  for (std::size_t k = 0; k < hamiltonian_part.components().size(); ++k)
    sum.push_back(hamiltonian_part.components()[k] + friction_part.components()[k]);
  VectorField field(hamiltonian_part.chart(), std::move(sum));
  field.hamiltonian_part_ = std::make_shared<const VectorField>(hamiltonian_part);
  field.friction_part_ = std::make_shared<const VectorField>(friction_part);
  return field;
}

const Expr& VectorField::jacobian(int i, int j) const {
  const int d = dimension();
  if (i < 0 || j < 0 || i >= d || j >= d) throw std::out_of_range("VectorField::jacobian");
  return jacobian_[static_cast<std::size_t>(i * d + j)];
}

const VectorField& VectorField::hamiltonian_part() const {
  if (!hamiltonian_part_) throw std::logic_error("vector field has no declared split");
  return *hamiltonian_part_;
}

const VectorField& VectorField::friction_part() const {
  if (!friction_part_) throw std::logic_error("vector field has no declared split");
  return *friction_part_;
}

Vector VectorField::eval(std::span<const double> x) const {
  Vector out(dimension());
  for (int k = 0; k < dimension(); ++k) out(k) = components_[static_cast<std::size_t>(k)].eval(x, 0.0);
  return out;
}

Matrix VectorField::eval_jacobian(std::span<const double> x) const {
  const int d = dimension();
  Matrix out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(i, j) = jacobian_[static_cast<std::size_t>(i * d + j)].eval(x, 0.0);
  return out;
}

Vector eval_field(const VectorField& field, const PhasePoint& x) {
  if (x.dimension() != field.dimension()) throw std::invalid_argument("eval_field: point dimension mismatch");
  return field.eval(x.coords);
}

double compressibility(const VectorField& field, const PhasePoint& x) {
  if (x.dimension() != field.dimension()) throw std::invalid_argument("compressibility: point dimension mismatch");
  return field.eval_divergence(x.coords);
}

}  // namespace metricflow
