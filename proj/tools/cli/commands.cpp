#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <ios>
#include <limits>
#include <sstream>

#include "metricflow/brackets.hpp"
#include "metricflow/evolution.hpp"
#include "metricflow/helmholtz.hpp"
#include "metricflow/parallel.hpp"

namespace metricflow::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Central differences of w(x, t) in every coordinate and in t.
MetricJet fd_jet(const std::function<Matrix(const std::vector<double>&, double)>& w, const std::vector<double>& x,
                 double t) {
  MetricJet jet;
  jet.value = w(x, t);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double h = MetricField::fd_step(x[k]);
    std::vector<double> plus = x;
    std::vector<double> minus = x;
    plus[k] += h;
    minus[k] -= h;
    jet.spatial.push_back((w(plus, t) - w(minus, t)) / (2 * h));
  }
  const double h = MetricField::fd_step(t);
  jet.temporal = (w(x, t + h) - w(x, t - h)) / (2 * h);
  return jet;
}

MetricJet zero_spatial_jet(Matrix value, Matrix temporal) {
  const auto d = value.rows();
  MetricJet jet{std::move(value), std::vector<Matrix>(static_cast<std::size_t>(d), Matrix::Zero(d, d)),
                std::move(temporal)};
  return jet;
}

}  // namespace

// classify

CommandResult cmd_classify(const SystemConfig& cfg, const CommandOptions& opts) {
  const VectorField& field = cfg.require_field();
  SampleSpec spec = cfg.samples;
  if (opts.seed) spec.seed = *opts.seed;
  const double tol = opts.tolerance.value_or(cfg.tolerance);
  const HelmholtzReport report = classify(field, cfg.metric(), sample_points(cfg.dimension(), spec), tol);

  json points = json::array();
  for (const PointResidual& p : report.points) {
    json entry = {{"point", p.point.coords},
                  {"time", p.point.time},
                  {"max_abs", p.max_abs},
                  {"residual", matrix_json(p.residual)}};
    if (p.canonical)
      entry["canonical_blocks"] = {{"r1", matrix_json(p.canonical->r1)},
                                   {"r2", matrix_json(p.canonical->r2)},
                                   {"r3", matrix_json(p.canonical->r3)}};
    if (p.degenerate) entry["degenerate"] = true;
    points.push_back(std::move(entry));
  }
  const json doc = {{"command", "classify"},       {"verdict", verdict_name(report.verdict)},
                    {"max_abs", report.max_abs},   {"tolerance", report.tolerance},
                    {"points", std::move(points)}, {"warnings", report.warnings}};
  return {report.verdict == Verdict::Hamiltonian ? kExitOk : kExitNonHamiltonian, dump(doc)};
}

// evolve-metric

namespace {

struct EvolveRow {
  double t = 0.0;
  std::string method;
  Matrix w;
  double sqrt_g = kNaN;
  double jacobi = kNaN;
  double invariance = kNaN;
  std::string warning;
};

class Evolver {
 public:
  explicit Evolver(const SystemConfig& cfg) : cfg_(cfg), x_(cfg.evolve_point) {
    w0_ = cfg.initial_matrix();
    if (cfg.field && w0_) {
      try {
        series_.emplace(cfg.field, *w0_, FieldPart::All, cfg.series);
      } catch (const ExpressionSizeError& e) {
        series_problem_ = e.what();
      }
    }
    if (cfg.friction) {
      analytic_ = analytic_metric(*cfg.friction, cfg.t0);
      const Applicability check = applicability_check(*cfg.friction);
      if (!check.ok) applicability_ = "applicability: " + check.message();
    }
    if (cfg.field) {
      try {
        transported_ = MetricField::transported(cfg.initial_field(), cfg.field, cfg.integrator);
      } catch (const ConfigError& e) {
        transport_problem_ = e.what();
      }
    }
  }

  EvolveRow row(double t, const std::string& method) const {
    try {
      return compute_row(t, method);
    } catch (const ExpressionSizeError& e) {
      // The symbolic routes can outgrow the node cap on nonlinear fields; the
      // other routes still report.
      EvolveRow r;
      r.t = t;
      r.method = method;
      r.w = Matrix::Constant(cfg_.dimension(), cfg_.dimension(), kNaN);
      r.warning = e.what();
      return r;
    }
  }

 private:
  EvolveRow compute_row(double t, const std::string& method) const {
    EvolveRow r;
    r.t = t;
    r.method = method;
    const double tau = t - cfg_.t0;
    std::optional<MetricJet> jet;
    const VectorField* field = cfg_.field.get();
    std::optional<VectorField> frozen;

    if (method == "analytic") {
      if (!analytic_) {
        r.warning = "analytic route needs a Hamiltonian T(p) + U(q) with linear friction";
      } else {
        jet = analytic_->jet(PhasePoint(x_, t));
        r.warning = applicability_;
        if (!field) {
          frozen = VectorField::from_hamiltonian(cfg_.chart, *cfg_.hamiltonian, cfg_.friction->friction_at(t));
          field = &*frozen;
        }
      }
    } else if (!field) {
      r.warning = method + " route needs autonomous dynamics";
    } else if (method == "series") {
      if (!series_) {
        r.warning = w0_ ? series_problem_ : "series route needs a constant initial metric";
      } else {
        const SeriesResult s = series_->evaluate(PhasePoint(x_, 0.0), tau);
        if (s.exact) {
          jet = zero_spatial_jet(
              s.value, skew_from_vector(series_->operator_matrix() * skew_to_vector(s.value), cfg_.dimension()));
        } else {
          jet = fd_jet([&](const std::vector<double>& x,
                           double s_t) { return series_->evaluate(PhasePoint(x, 0.0), s_t).value; },
                       x_, tau);
          jet->value = s.value;
        }
        if (s.divergence_warning) r.warning = "series: last term exceeds the partial sum";
      }
    } else if (method == "split") {
      if (!w0_) {
        r.warning = "split route needs a constant initial metric";
      } else {
        auto split = [&](const std::vector<double>& x, double s_t) {
          return split_propagate(*field, *w0_, {s_t, cfg_.split_steps}, PhasePoint(x, 0.0), cfg_.series);
        };
        const SplitResult base = split(x_, tau);
        if (base.exact_substeps) {
          // Many Strang steps accumulate rounding, so a wider five-point
          // stencil is used for the time derivative.
          const double h = 1e-3 * std::max(1.0, std::abs(tau));
          auto at = [&](double s_t) { return split(x_, s_t).value; };
          jet = zero_spatial_jet(base.value,
                                 (at(tau - 2 * h) - 8 * at(tau - h) + 8 * at(tau + h) - at(tau + 2 * h)) / (12 * h));
        } else {
          jet = fd_jet([&](const std::vector<double>& x, double s_t) { return split(x, s_t).value; }, x_, tau);
          jet->value = base.value;
        }
        for (const SplitStepDiagnostic& s : base.steps)
          if (s.divergence_warning) r.warning = "split: a sub-exponential series did not settle";
      }
    } else if (method == "pullback") {
      if (!transported_) {
        r.warning = transport_problem_;
      } else {
        jet = transported_->jet(PhasePoint(x_, tau));
      }
    }

    const int d = cfg_.dimension();
    if (!jet) {
      r.w = Matrix::Constant(d, d, kNaN);
      return r;
    }
    r.w = jet->value;
    r.sqrt_g = metric_determinant(jet->value).sqrt_g;
    r.jacobi = jacobi_residual(*jet);
    if (field) r.invariance = max_abs(invariance_residual(*field, *jet, PhasePoint(x_, t)));
    return r;
  }

  const SystemConfig& cfg_;
  std::vector<double> x_;
  std::optional<Matrix> w0_;
  std::optional<SeriesPropagator> series_;
  std::optional<MetricField> analytic_;
  std::optional<MetricField> transported_;
  std::string applicability_;
  std::string transport_problem_;
  std::string series_problem_;
};

}  // namespace

CommandResult cmd_evolve_metric(const SystemConfig& cfg, const CommandOptions&) {
  const Evolver evolver(cfg);
  const std::size_t methods = cfg.methods.size();
  std::vector<EvolveRow> rows(cfg.times.size() * methods);
  parallel_for(rows.size(),
               [&](std::size_t i) { rows[i] = evolver.row(cfg.times[i / methods], cfg.methods[i % methods]); });

  const int d = cfg.dimension();
  std::ostringstream os;
  os << "t,method";
  for (int k = 0; k < d; ++k)
    for (int l = k + 1; l < d; ++l) os << ",w_" << k + 1 << "_" << l + 1;
  os << ",sqrt_g,jacobi_residual,invariance_residual,warning\n";
  for (const EvolveRow& r : rows) {
    os << format_number(r.t) << "," << r.method;
    for (int k = 0; k < d; ++k)
      for (int l = k + 1; l < d; ++l) os << "," << format_number(r.w(k, l));
    os << "," << format_number(r.sqrt_g) << "," << format_number(r.jacobi) << "," << format_number(r.invariance) << ","
       << csv_field(r.warning) << "\n";
  }
  return {kExitOk, os.str()};
}

// audit

CommandResult cmd_audit(const SystemConfig& cfg, const CommandOptions& opts) {
  const VectorField& field = cfg.require_field();
  const MetricField metric = cfg.metric();
  AuditTolerances tol = cfg.audit;
  if (opts.tolerance) tol.invariance = tol.jacobi = *opts.tolerance;

  SampleSpec spec = cfg.samples;
  if (opts.seed) spec.seed = *opts.seed;
  spec.time_min = cfg.t0;
  if (spec.time_max <= cfg.t0) spec.time_max = cfg.t0 + 1.0;
  const std::vector<PhasePoint> points = sample_points(cfg.dimension(), spec);

  struct PointAudit {
    double invariance = 0.0;
    double jacobi = 0.0;
    double determinant = 0.0;
    bool degenerate = false;
  };
  std::vector<PointAudit> results(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    const PhasePoint& x = points[i];
    const MetricJet jet = metric.jet(x);
    PointAudit& a = results[i];
    a.invariance = max_abs(invariance_residual(field, jet, x));
    a.jacobi = jacobi_residual(jet);
    // ln sqrt g(x, t) - ln sqrt g(x0, t0) + int_{t0}^{t} kappa along the
    // trajectory from x0 to x.
    IntegratorOptions io = cfg.integrator;
    io.track_divergence = true;
    const FlowSegment seg = integrate_flow(field, x, cfg.t0, io);
    const DeterminantInfo now = metric_determinant(jet.value);
    const DeterminantInfo then = metric_determinant(metric, PhasePoint(seg.end.coords, cfg.t0));
    a.degenerate = now.degenerate || then.degenerate;
    a.determinant = std::abs(std::log(now.sqrt_g) - std::log(then.sqrt_g) - seg.divergence_integral);
  });

  PointAudit worst;
  json warnings = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    worst.invariance = std::max(worst.invariance, results[i].invariance);
    worst.jacobi = std::max(worst.jacobi, results[i].jacobi);
    worst.determinant = std::max(worst.determinant, results[i].determinant);
    if (results[i].degenerate) warnings.push_back("metric is degenerate at sample " + std::to_string(i));
  }
  if (cfg.metric_choice == MetricChoice::FrictionAnalytic) {
    const Applicability check = applicability_check(*cfg.friction);
    if (!check.ok) warnings.push_back("applicability: " + check.message());
  }

  json failures = json::array();
  if (!(worst.invariance < tol.invariance)) failures.push_back("invariance");
  if (!(worst.jacobi < tol.jacobi)) failures.push_back("jacobi");
  if (!(worst.determinant < tol.determinant)) failures.push_back("determinant");
  const bool pass = failures.empty();
  const json doc = {
      {"command", "audit"},
      {"pass", pass},
      {"samples", points.size()},
      {"max_invariance_residual", worst.invariance},
      {"max_jacobi_residual", worst.jacobi},
      {"max_determinant_discrepancy", worst.determinant},
      {"tolerances", {{"invariance", tol.invariance}, {"jacobi", tol.jacobi}, {"determinant", tol.determinant}}},
      {"failures", std::move(failures)},
      {"warnings", std::move(warnings)}};
  return {pass ? kExitOk : kExitAuditFailed, dump(doc)};
}

// bracket

CommandResult cmd_bracket(const SystemConfig& cfg, const CommandOptions& opts) {
  const auto a_text = opts.a ? opts.a : cfg.observable_a;
  const auto b_text = opts.b ? opts.b : cfg.observable_b;
  const auto c_text = opts.c ? opts.c : cfg.observable_c;
  if (!a_text || !b_text) throw UsageError("bracket needs observables A and B (--a/--b or 'bracket')");

  auto observable = [&](const std::string& text, const char* key) {
    try {
      return Observable::parse(text, cfg.chart);
    } catch (const ParseError& e) {
      throw ConfigError(e.what(), std::string("/bracket/") + key, e.offset());
    }
  };
  const Observable a = observable(*a_text, "a");
  const Observable b = observable(*b_text, "b");
  const std::optional<Observable> c = c_text ? std::optional<Observable>(observable(*c_text, "c")) : std::nullopt;
  const MetricField metric = cfg.metric();

  std::vector<json> entries(cfg.queries.size());
  parallel_for(cfg.queries.size(), [&](std::size_t i) {
    const PhasePoint x(cfg.queries[i].point, cfg.queries[i].time);
    json e = {{"point", x.coords}, {"time", x.time}};
    try {
      e["value"] = poisson_bracket(a, b, metric, x);
      if (c) e["jacobi_residual"] = bracket_jacobi_residual(a, b, *c, metric, x);
      if (cfg.field) {
        const LeibnizDefect l = leibniz_defect(a, b, *cfg.field, metric, x);
        e["leibniz"] = {{"closed_form", l.closed_form},
                        {"verbatim", l.verbatim},
                        {"metric_rate", l.metric_rate},
                        {"numerical", l.numerical}};
      }
    } catch (const SingularMetricError& err) {
      e["error"] = err.what();
    }
    entries[i] = std::move(e);
  });

  json doc = {{"command", "bracket"}, {"a", *a_text}, {"b", *b_text}};
  if (c_text) doc["c"] = *c_text;
  doc["queries"] = entries;
  return {kExitOk, dump(doc)};
}

// dispatch

namespace {

CommandResult error_result(int code, const std::string& kind, const std::string& message, const std::string& key = {},
                           std::optional<std::size_t> offset = {}) {
  json err = {{"kind", kind}, {"message", message}};
  if (!key.empty()) err["key"] = key;
  if (offset) err["offset"] = *offset;
  return {code, dump(json{{"error", err}})};
}

}  // namespace

CommandResult run_command(const std::string& command, const std::string& config_path, const CommandOptions& opts) {
  try {
    const SystemConfig cfg = load_config(config_path);
    if (command == "classify") return cmd_classify(cfg, opts);
    if (command == "evolve-metric") return cmd_evolve_metric(cfg, opts);
    if (command == "audit") return cmd_audit(cfg, opts);
    if (command == "bracket") return cmd_bracket(cfg, opts);
    return error_result(kExitUsage, "usage", "unknown command '" + command + "'");
  } catch (const UsageError& e) {
    return error_result(kExitUsage, "usage", e.what());
  } catch (const std::ios_base::failure& e) {
    return error_result(kExitNoInput, "input", e.what());
  } catch (const ConfigError& e) {
    return error_result(kExitDataError, "config", e.what(), e.key(), e.offset());
  } catch (const ParseError& e) {
    return error_result(kExitDataError, "parse", e.what(), {}, e.offset());
  } catch (const std::invalid_argument& e) {
    return error_result(kExitDataError, "data", e.what());
  } catch (const IntegrationError& e) {
    return error_result(kExitInternal, "integration", e.what());
  } catch (const std::exception& e) {
    return error_result(kExitInternal, "numerical", e.what());
  }
}

}  // namespace metricflow::cli
