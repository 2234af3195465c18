#include "metricflow/friction.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "metricflow/evolution.hpp"
#include "metricflow/sampling.hpp"

namespace metricflow {

namespace {

constexpr double kQuadratureTolerance = 1e-12;

double eval_rate(const Expr& rate, double t) { return rate.eval(std::span<const double>{}, t); }

double integrate_rate(const Expr& rate, double t0, double t) {
  if (t == t0) return 0.0;
  const double lo = std::min(t0, t);
  const double hi = std::max(t0, t);
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double s) { return eval_rate(rate, s); }, lo, hi, 15, kQuadratureTolerance, &error);
  if (!std::isfinite(value) || error > 1e-10 * std::max(1.0, std::abs(value)))
    throw std::runtime_error("friction: quadrature of " + rate.to_string() + " did not converge");
  return t >= t0 ? value : -value;
}

}  // namespace

void FrictionSystem::validate_hamiltonian() const {
  const int n = degrees_of_freedom();
  if (depends_on(hamiltonian_, kTimeVariable)) throw std::invalid_argument("friction: H must not depend on t");
  if (max_variable_index(hamiltonian_) >= 2 * n)
    throw std::invalid_argument("friction: H references a coordinate outside the chart");
  for (int i = 0; i < n; ++i) {
    const Expr dq = differentiate(hamiltonian_, i);
    for (int j = 0; j < n; ++j)
      if (!differentiate(dq, n + j).is_zero())
        throw std::invalid_argument("friction: H must have the form T(p) + U(q); d2H/d" + chart_.name(i) + "d" +
                                    chart_.name(n + j) + " is not identically zero");
  }
}

FrictionSystem FrictionSystem::constant(const CoordinateChart& chart, const Expr& hamiltonian, const Matrix& friction) {
  const int n = chart.degrees_of_freedom();
  if (friction.rows() != n || friction.cols() != n) throw std::invalid_argument("friction: K must be n x n");
  if (!friction.allFinite()) throw std::invalid_argument("friction: K has non-finite entries");
  FrictionSystem sys(chart, hamiltonian);
  sys.validate_hamiltonian();
  sys.constant_ = friction;
  return sys;
}

FrictionSystem FrictionSystem::diagonal(const CoordinateChart& chart, const Expr& hamiltonian,
                                        std::vector<Expr> rates) {
  const int n = chart.degrees_of_freedom();
  if (static_cast<int>(rates.size()) != n) throw std::invalid_argument("friction: expected n diagonal rates");
  for (const Expr& r : rates)
    if (max_variable_index(r) >= 0)
      throw std::invalid_argument("friction: diagonal rates may depend on t only, got " + r.to_string());
  FrictionSystem sys(chart, hamiltonian);
  sys.validate_hamiltonian();
  const bool constant =
      std::none_of(rates.begin(), rates.end(), [](const Expr& r) { return depends_on(r, kTimeVariable); });
  if (constant) {
    sys.constant_ = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j) sys.constant_(j, j) = eval_rate(rates[static_cast<std::size_t>(j)], 0.0);
  } else {
    sys.rates_ = std::move(rates);
  }
  return sys;
}

bool FrictionSystem::is_diagonal() const {
  if (time_dependent()) return true;
  return constant_.isDiagonal(0.0);
}

const Matrix& FrictionSystem::constant_friction() const {
  if (time_dependent()) throw std::logic_error("friction: K is time-dependent");
  return constant_;
}

Matrix FrictionSystem::friction_at(double t) const {
  if (!time_dependent()) return constant_;
  const int n = degrees_of_freedom();
  Matrix k = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) k(j, j) = eval_rate(rates_[static_cast<std::size_t>(j)], t);
  return k;
}

VectorField FrictionSystem::dynamics() const {
  return VectorField::from_hamiltonian(chart_, hamiltonian_, constant_friction());
}

Matrix growth_matrix(const FrictionSystem& sys, double t0, double t) {
  if (!sys.time_dependent()) return expm((t - t0) * sys.constant_friction());
  const int n = sys.degrees_of_freedom();
  Matrix g = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    g(j, j) = std::exp(integrate_rate(sys.diagonal_rates()[static_cast<std::size_t>(j)], t0, t));
  return g;
}

MetricField analytic_metric(const FrictionSystem& sys, double t0) {
  return MetricField::friction_analytic(std::make_shared<const FrictionGenerator>(sys, t0));
}

double determinant_factor(const FrictionSystem& sys, double t0, double t) {
  if (!sys.time_dependent()) return std::exp((t - t0) * sys.constant_friction().trace());
  double total = 0.0;
  for (const Expr& r : sys.diagonal_rates()) total += integrate_rate(r, t0, t);
  return std::exp(total);
}

std::string Applicability::message() const {
  if (ok) return "ok";
  std::ostringstream os;
  for (std::size_t k = 0; k < issues.size(); ++k) {
    if (k) os << "; ";
    os << issues[k].detail;
  }
  return os.str();
}

namespace {

bool rates_differ(const FrictionSystem& sys, int i, int j) {
  if (!sys.time_dependent()) {
    const Matrix& k = sys.constant_friction();
    return std::abs(k(i, i) - k(j, j)) > 1e-12 * std::max({1.0, std::abs(k(i, i)), std::abs(k(j, j))});
  }
  const Expr& a = sys.diagonal_rates()[static_cast<std::size_t>(i)];
  const Expr& b = sys.diagonal_rates()[static_cast<std::size_t>(j)];
  for (double t : {0.0, 0.37, 1.1, 2.3, 3.7, -0.8, 5.9}) {
    double ka = 0.0;
    double kb = 0.0;
    try {
      ka = eval_rate(a, t);
      kb = eval_rate(b, t);
    } catch (const DomainError&) {
      continue;
    }
    if (std::abs(ka - kb) > 1e-12 * std::max({1.0, std::abs(ka), std::abs(kb)})) return true;
  }
  return false;
}

std::string rate_label(const FrictionSystem& sys, int i) {
  if (!sys.time_dependent()) {
    std::ostringstream os;
    os << sys.constant_friction()(i, i) << "*t";
    return os.str();
  }
  return "int K_" + std::to_string(i + 1);
}

Applicability diagonal_check(const FrictionSystem& sys) {
  Applicability out;
  const int n = sys.degrees_of_freedom();
  const Expr& h = sys.hamiltonian();
  const CoordinateChart& chart = sys.chart();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (!rates_differ(sys, i, j)) continue;
      const Expr u = differentiate(differentiate(h, i), j);
      const Expr t = differentiate(differentiate(h, n + i), n + j);
      if (u.is_zero() && t.is_zero()) continue;
      std::ostringstream os;
      os << "pair (" << i + 1 << "," << j + 1 << "): K_" << i + 1 << " != K_" << j + 1;
      if (!u.is_zero())
        os << ", d2U/d" << chart.name(i) << "d" << chart.name(j) << " = " << u.to_string()
           << ", predicted residual (exp(" << rate_label(sys, i) << ") - exp(" << rate_label(sys, j) << "))*("
           << u.to_string() << ")";
      if (!t.is_zero()) os << ", d2T/d" << chart.name(n + i) << "d" << chart.name(n + j) << " = " << t.to_string();
      out.ok = false;
      out.issues.push_back({i + 1, j + 1, os.str()});
    }
  return out;
}

Applicability sampled_check(const FrictionSystem& sys) {
  Applicability out;
  const VectorField field = sys.dynamics();
  const MetricField metric = analytic_metric(sys, 0.0);
  SampleSpec spec;
  spec.count = 20;
  spec.seed = 0xf71c;
  spec.time_max = 1.0;
  double worst = 0.0;
  for (const PhasePoint& x : sample_points(field.dimension(), spec))
    worst = std::max(worst, max_abs(invariance_residual(field, metric, x)));
  if (worst >= 1e-8) {
    std::ostringstream os;
    os << "non-diagonal K: invariance residual of the block metric reaches " << worst << " at sampled points";
    out.ok = false;
    out.issues.push_back({0, 0, os.str()});
  }
  return out;
}

}  // namespace

Applicability applicability_check(const FrictionSystem& sys) {
  if (sys.is_diagonal()) return diagonal_check(sys);
  return sampled_check(sys);
}

}  // namespace metricflow
