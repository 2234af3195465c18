#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "metricflow/dynamics.hpp"

namespace metricflow {

IntegrationError::IntegrationError(const std::string& message, PhasePoint last_good)
    : std::runtime_error(message), last_good_(std::move(last_good)) {}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b*, the embedded error weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

using Rhs = std::function<void(const Vector&, Vector&)>;

// Integrates y' = f(y) over tau in [0, span]. `on_step` receives each
// accepted step (tau0, y0, f0, tau1, y1, f1) for dense output.
struct Stepper {
  const Rhs& f;
  const IntegratorOptions& opts;
  std::function<PhasePoint(double tau, const Vector&)> describe;

  using StepCallback = std::function<void(double, const Vector&, const Vector&, double, const Vector&, const Vector&)>;

  double error_norm(const Vector& err, const Vector& y0, const Vector& y1) const {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
      const double scale = opts.abs_tol + opts.rel_tol * std::max(std::abs(y0(i)), std::abs(y1(i)));
      const double r = err(i) / scale;
      sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(err.size()));
  }

  double initial_step(const Vector& y0, const Vector& f0, double span) const {
    Vector scale(y0.size());
    for (Eigen::Index i = 0; i < y0.size(); ++i) scale(i) = opts.abs_tol + opts.rel_tol * std::abs(y0(i));
    const double d0 = (y0.array() / scale.array()).matrix().norm() / std::sqrt(static_cast<double>(y0.size()));
    const double d1 = (f0.array() / scale.array()).matrix().norm() / std::sqrt(static_cast<double>(y0.size()));
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    Vector y1 = y0 + h0 * f0;
    Vector f1(y0.size());
    f(y1, f1);
    const double d2 =
        ((f1 - f0).array() / scale.array()).matrix().norm() / std::sqrt(static_cast<double>(y0.size())) / h0;
    double h1;
    if (std::max(d1, d2) <= 1e-15)
      h1 = std::max(1e-6, h0 * 1e-3);
    else
      h1 = std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    return std::min({100.0 * h0, h1, span});
  }

  // One DP5 step of size h from (y, k1); writes y_new, k7 (= f(y_new)) and err.
  void step(const Vector& y, const Vector& k1, double h, Vector& y_new, Vector& k7, Vector& err) const {
    const auto n = y.size();
    Vector k2(n), k3(n), k4(n), k5(n), k6(n);
    f(y + h * (a21 * k1), k2);
    f(y + h * (a31 * k1 + a32 * k2), k3);
    f(y + h * (a41 * k1 + a42 * k2 + a43 * k3), k4);
    f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5);
    f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
    y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    k7.resize(n);
    f(y_new, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  }

  Vector run(const Vector& y0, double span, FlowStats& stats, std::vector<double>& mesh,
             const StepCallback& on_step) const {
    Vector y = y0;
    Vector k1(y.size());
    f(y, k1);
    if (span == 0.0) return y;

    double tau = 0.0;
    Vector y_new, k7, err;

    auto take = [&](double h) {
      step(y, k1, h, y_new, k7, err);
      on_step(tau, y, k1, tau + h, y_new, k7);
      tau += h;
      y = y_new;
      k1 = k7;
      mesh.push_back(h);
      ++stats.steps;
    };

    if (!opts.mesh.empty()) {
      double covered = 0.0;
      for (std::size_t i = 0; i + 1 < opts.mesh.size(); ++i) covered += opts.mesh[i];
      const double last = span - covered;
      if (!(last > 0.0) || std::abs(last - opts.mesh.back()) > 1e-6 * std::max(1.0, span))
        throw std::invalid_argument("integrator: replay mesh does not cover the requested interval");
      for (std::size_t i = 0; i + 1 < opts.mesh.size(); ++i) take(opts.mesh[i]);
      take(last);
      return y;
    }

    if (opts.fixed_step) {
      if (!(*opts.fixed_step > 0.0)) throw std::invalid_argument("integrator: fixed step must be positive");
      const long count = std::max(1L, static_cast<long>(std::ceil(span / *opts.fixed_step - 1e-12)));
      const double h = span / static_cast<double>(count);
      for (long i = 0; i < count; ++i) {
        if (i + 1 == count)
          take(span - tau);
        else
          take(h);
      }
      return y;
    }

    double h = initial_step(y, k1, span);
    constexpr double safety = 0.9, min_factor = 0.2, max_factor = 5.0;
    while (tau < span) {
      if (stats.steps + stats.rejected >= opts.max_steps)
        throw IntegrationError("integrator: step budget exhausted", describe(tau, y));
      const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(tau));
      if (h < min_step)
        throw IntegrationError("integrator: step size underflow (stiff or singular field)", describe(tau, y));
      bool last = false;
      if (tau + h >= span || span - (tau + h) < min_step) {
        h = span - tau;
        last = true;
      }
      step(y, k1, h, y_new, k7, err);
      const double norm = error_norm(err, y, y_new);
      if (!std::isfinite(norm)) {
        ++stats.rejected;
        h *= min_factor;
        continue;
      }
      if (norm <= 1.0) {
        on_step(tau, y, k1, last ? span : tau + h, y_new, k7);
        tau = last ? span : tau + h;
        y = y_new;
        k1 = k7;
        mesh.push_back(h);
        ++stats.steps;
        stats.max_error_estimate = std::max(stats.max_error_estimate, norm);
        const double factor = norm == 0.0 ? max_factor : std::min(max_factor, safety * std::pow(norm, -0.2));
        h *= factor;
      } else {
        ++stats.rejected;
        h *= std::max(min_factor, safety * std::pow(norm, -0.2));
      }
    }
    return y;
  }
};

Vector hermite(double tau0, const Vector& y0, const Vector& f0, double tau1, const Vector& y1, const Vector& f1,
               double tau) {
  const double h = tau1 - tau0;
  if (h == 0.0) return y0;
  const double s = (tau - tau0) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1;
}

FlowSegment integrate(const VectorField& field, const PhasePoint& x0, double t1, const IntegratorOptions& opts,
                      bool with_tangent) {
  const int d = field.dimension();
  if (x0.dimension() != d) throw std::invalid_argument("integrate_flow: point dimension mismatch");
  if (!std::isfinite(t1)) throw std::invalid_argument("integrate_flow: non-finite end time");

  const double t0 = x0.time;
  const double direction = t1 >= t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const bool track = opts.track_divergence;
  const int size = d + (with_tangent ? d * d : 0) + (track ? 1 : 0);
  const int div_slot = d + (with_tangent ? d * d : 0);

  Vector y0 = Vector::Zero(size);
  for (int i = 0; i < d; ++i) y0(i) = x0.coords[static_cast<std::size_t>(i)];
  if (with_tangent)
    for (int i = 0; i < d; ++i) y0(d + i * d + i) = 1.0;

  std::vector<double> scratch(static_cast<std::size_t>(d));
  Rhs rhs = [&](const Vector& y, Vector& out) {
    out.resize(size);
    for (int i = 0; i < d; ++i) scratch[static_cast<std::size_t>(i)] = y(i);
    const Vector x_dot = field.eval(scratch);
    out.head(d) = direction * x_dot;
    if (with_tangent) {
      const Matrix jac = field.eval_jacobian(scratch);
      Eigen::Map<const Matrix> m(y.data() + d, d, d);
      Eigen::Map<Matrix> m_dot(out.data() + d, d, d);
      m_dot = direction * (jac * m);
    }
    if (track) out(div_slot) = direction * field.eval_divergence(scratch);
  };

  auto to_point = [&](double tau, const Vector& y) {
    std::vector<double> x(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = y(i);
    return PhasePoint(std::move(x), t0 + direction * tau);
  };

  FlowSegment seg;
  seg.start = x0;

  std::vector<std::pair<double, std::size_t>> pending;  // (tau, index into requested samples)
  for (std::size_t i = 0; i < opts.sample_times.size(); ++i) {
    const double ts = opts.sample_times[i];
    const double tau = direction * (ts - t0);
    if (tau < -1e-12 * std::max(1.0, span) || tau > span * (1 + 1e-12) + 1e-15)
      throw std::invalid_argument("integrate_flow: sample time outside the integration interval");
    pending.emplace_back(std::clamp(tau, 0.0, span), i);
  }
  std::sort(pending.begin(), pending.end());
  seg.samples.resize(opts.sample_times.size());
  std::size_t next_sample = 0;

  auto record = [&](std::size_t slot, const Vector& y) {
    seg.samples[slot].time = opts.sample_times[slot];
    seg.samples[slot].coords.assign(y.data(), y.data() + d);
  };

  while (next_sample < pending.size() && pending[next_sample].first == 0.0) record(pending[next_sample++].second, y0);

  Stepper stepper{rhs, opts, to_point};
  Vector y_end;
  try {
    y_end = stepper.run(
        y0, span, seg.stats, seg.mesh,
        [&](double tau0, const Vector& ya, const Vector& fa, double tau1, const Vector& yb, const Vector& fb) {
          while (next_sample < pending.size() && pending[next_sample].first <= tau1) {
            record(pending[next_sample].second, hermite(tau0, ya, fa, tau1, yb, fb, pending[next_sample].first));
            ++next_sample;
          }
        });
  } catch (const DomainError& e) {
    throw IntegrationError(std::string("integrator: ") + e.what(), x0);
  }
  while (next_sample < pending.size()) record(pending[next_sample++].second, y_end);

  seg.end = to_point(span, y_end);
  seg.end.time = t1;
  if (span == 0.0) seg.end = x0;
  if (with_tangent) seg.tangent = Eigen::Map<const Matrix>(y_end.data() + d, d, d);
  if (track) seg.divergence_integral = y_end(div_slot);
  return seg;
}

}  // namespace

FlowSegment integrate_flow(const VectorField& field, const PhasePoint& x0, double t1, const IntegratorOptions& opts) {
  return integrate(field, x0, t1, opts, false);
}

FlowSegment integrate_with_tangent(const VectorField& field, const PhasePoint& x0, double t1,
                                   const IntegratorOptions& opts) {
  return integrate(field, x0, t1, opts, true);
}

Matrix tangent_map(const VectorField& field, const PhasePoint& x0, double t1, const IntegratorOptions& opts) {
  return *integrate_with_tangent(field, x0, t1, opts).tangent;
}

}  // namespace metricflow
