#pragma once

#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "metricflow/dynamics.hpp"
#include "metricflow/evolution.hpp"
#include "metricflow/friction.hpp"
#include "metricflow/metric.hpp"
#include "metricflow/sampling.hpp"

namespace metricflow::cli {

/// Invalid configuration content. `key` is a JSON pointer to the offending
/// value; `offset` is the 1-based byte offset inside an expression string
/// or, for JSON syntax errors, inside the file.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string key = {}, std::optional<std::size_t> offset = {})
      : std::runtime_error(message), key_(std::move(key)), offset_(offset) {}
  [[nodiscard]] const std::string& key() const noexcept { return key_; }
  [[nodiscard]] std::optional<std::size_t> offset() const noexcept { return offset_; }

 private:
  std::string key_;
  std::optional<std::size_t> offset_;
};

enum class MetricChoice { Canonical, FrictionAnalytic, Transported, Expressions };

struct AuditTolerances {
  double invariance = 1e-8;
  double jacobi = 1e-8;
  double determinant = 1e-6;
};

struct Query {
  std::vector<double> point;
  double time = 0.0;
};

struct SystemConfig {
  CoordinateChart chart{1};
  std::optional<Expr> hamiltonian;
  std::optional<FrictionSystem> friction;
  /// Null when the friction is time-dependent (no autonomous field exists).
  std::shared_ptr<const VectorField> field;

  MetricChoice metric_choice = MetricChoice::Canonical;
  std::optional<ExprMatrix> metric_expressions;
  double t0 = 0.0;

  IntegratorOptions integrator;
  SeriesOptions series;
  int split_steps = 1000;
  SampleSpec samples;
  double tolerance = 1e-8;
  AuditTolerances audit;

  std::vector<Query> queries;
  std::vector<double> times{0.0, 0.25, 0.5, 1.0};
  std::vector<double> evolve_point;
  std::vector<std::string> methods{"series", "split", "pullback", "analytic"};

  std::optional<std::string> observable_a;
  std::optional<std::string> observable_b;
  std::optional<std::string> observable_c;

  [[nodiscard]] int dimension() const { return chart.dimension(); }
  [[nodiscard]] const VectorField& require_field() const;
  /// The metric used by classify, audit and bracket.
  [[nodiscard]] MetricField metric() const;
  /// Constant initial metric at t0 for the series and splitting routes,
  /// empty when the configured metric is not constant at t0.
  [[nodiscard]] std::optional<Matrix> initial_matrix() const;
  /// The metric at t0 as a field (pullback initial data).
  [[nodiscard]] MetricField initial_field() const;
};

SystemConfig parse_config(const nlohmann::json& doc);
/// Reads and parses a config file. Throws std::ios_base::failure when the
/// file cannot be opened and ConfigError for invalid content.
SystemConfig load_config(const std::string& path);

}  // namespace metricflow::cli
