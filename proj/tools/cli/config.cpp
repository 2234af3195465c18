#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace metricflow::cli {

namespace {

using nlohmann::json;

const std::set<std::string> kTopLevelKeys = {
    "n",         "coordinates", "hamiltonian", "friction", "components", "metric", "t0",    "integrator", "series",
    "splitting", "samples",     "tolerance",   "audit",    "queries",    "times",  "point", "methods",    "bracket"};

std::string child(const std::string& key, const std::string& name) { return key + "/" + name; }
std::string child(const std::string& key, std::size_t i) { return key + "/" + std::to_string(i); }

double number_at(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("expected a number", key);
  return v.get<double>();
}

double positive_at(const json& v, const std::string& key) {
  const double x = number_at(v, key);
  if (!(x > 0.0)) throw ConfigError("expected a positive number", key);
  return x;
}

long integer_at(const json& v, const std::string& key, long min) {
  if (!v.is_number_integer()) throw ConfigError("expected an integer", key);
  const long x = v.get<long>();
  if (x < min) throw ConfigError("expected an integer >= " + std::to_string(min), key);
  return x;
}

const std::string& string_at(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("expected a string", key);
  return v.get_ref<const std::string&>();
}

const json& array_at(const json& v, const std::string& key, std::optional<std::size_t> size = {}) {
  if (!v.is_array()) throw ConfigError("expected an array", key);
  if (size && v.size() != *size) throw ConfigError("expected " + std::to_string(*size) + " entries", key);
  return v;
}

const json& object_at(const json& v, const std::string& key, const std::set<std::string>& allowed) {
  if (!v.is_object()) throw ConfigError("expected an object", key);
  for (const auto& [name, value] : v.items())
    if (!allowed.count(name)) throw ConfigError("unknown key '" + name + "'", child(key, name));
  return v;
}

std::vector<double> vector_at(const json& v, const std::string& key, std::size_t size) {
  array_at(v, key, size);
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number_at(v[i], child(key, i)));
  return out;
}

Expr expression_at(const json& v, const std::string& key, const CoordinateChart& chart) {
  if (v.is_number()) return Expr::constant(v.get<double>());
  try {
    return parse(string_at(v, key), chart);
  } catch (const ParseError& e) {
    throw ConfigError(e.what(), key, e.offset());
  }
}

Matrix friction_matrix(const json& v, const std::string& key, int n) {
  array_at(v, key, static_cast<std::size_t>(n));
  Matrix k(n, n);
  for (int i = 0; i < n; ++i) {
    const std::string row = child(key, static_cast<std::size_t>(i));
    const std::vector<double> values = vector_at(v[static_cast<std::size_t>(i)], row, static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) k(i, j) = values[static_cast<std::size_t>(j)];
  }
  return k;
}

void parse_dynamics(const json& doc, SystemConfig& cfg) {
  const int n = cfg.chart.degrees_of_freedom();
  const bool has_h = doc.contains("hamiltonian");
  const bool has_c = doc.contains("components");
  if (has_h == has_c) throw ConfigError("specify exactly one of 'hamiltonian' and 'components'", "");
  if (has_c && doc.contains("friction")) throw ConfigError("'friction' requires 'hamiltonian'", "/friction");

  if (has_c) {
    const json& comps = array_at(doc["components"], "/components", static_cast<std::size_t>(cfg.dimension()));
    std::vector<Expr> exprs;
    for (std::size_t i = 0; i < comps.size(); ++i)
      exprs.push_back(expression_at(comps[i], child("/components", i), cfg.chart));
    try {
      cfg.field = std::make_shared<const VectorField>(VectorField::from_components(cfg.chart, std::move(exprs)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), "/components");
    }
    return;
  }

  cfg.hamiltonian = expression_at(doc["hamiltonian"], "/hamiltonian", cfg.chart);
  Matrix k = Matrix::Zero(n, n);
  std::vector<Expr> rates;
  bool time_dependent = false;
  if (doc.contains("friction")) {
    const json& f = doc["friction"];
    if (f.is_object()) {
      object_at(f, "/friction", {"diagonal"});
      if (!f.contains("diagonal")) throw ConfigError("expected 'diagonal'", "/friction");
      const json& diag = array_at(f["diagonal"], "/friction/diagonal", static_cast<std::size_t>(n));
      for (std::size_t j = 0; j < diag.size(); ++j) {
        const std::string key = child("/friction/diagonal", j);
        rates.push_back(expression_at(diag[j], key, cfg.chart));
        if (max_variable_index(rates.back()) >= 0) throw ConfigError("friction rates may depend on t only", key);
        if (depends_on(rates.back(), kTimeVariable)) time_dependent = true;
      }
      if (!time_dependent)
        for (int j = 0; j < n; ++j) k(j, j) = rates[static_cast<std::size_t>(j)].eval(std::span<const double>{}, 0.0);
    } else {
      k = friction_matrix(f, "/friction", n);
    }
  }

  try {
    cfg.friction = time_dependent ? FrictionSystem::diagonal(cfg.chart, *cfg.hamiltonian, rates)
                                  : FrictionSystem::constant(cfg.chart, *cfg.hamiltonian, k);
  } catch (const std::invalid_argument& e) {
    // H is not of the form T(p) + U(q): still valid dynamics, but without a
    // closed-form invariant metric.
    if (time_dependent) throw ConfigError(e.what(), "/hamiltonian");
    cfg.friction.reset();
  }

  if (!time_dependent) {
    try {
      cfg.field = std::make_shared<const VectorField>(VectorField::from_hamiltonian(cfg.chart, *cfg.hamiltonian, k));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), "/hamiltonian");
    }
  }
}

void parse_metric(const json& doc, SystemConfig& cfg) {
  if (!doc.contains("metric")) return;
  const json& m = doc["metric"];
  if (m.is_string()) {
    const std::string& name = m.get_ref<const std::string&>();
    if (name == "canonical") {
      cfg.metric_choice = MetricChoice::Canonical;
    } else if (name == "friction-analytic") {
      if (!cfg.friction)
        throw ConfigError("'friction-analytic' needs a Hamiltonian of the form T(p) + U(q) with linear friction",
                          "/metric");
      cfg.metric_choice = MetricChoice::FrictionAnalytic;
    } else if (name == "transported") {
      if (!cfg.field) throw ConfigError("'transported' needs autonomous dynamics", "/metric");
      cfg.metric_choice = MetricChoice::Transported;
    } else {
      throw ConfigError("unknown metric '" + name + "'", "/metric");
    }
    return;
  }
  const auto d = static_cast<std::size_t>(cfg.dimension());
  array_at(m, "/metric", d);
  ExprMatrix w(cfg.dimension());
  for (std::size_t k = 0; k < d; ++k) {
    const std::string row = child("/metric", k);
    array_at(m[k], row, d);
    for (std::size_t l = 0; l < d; ++l)
      w(static_cast<int>(k), static_cast<int>(l)) = expression_at(m[k][l], child(row, l), cfg.chart);
  }
  try {
    (void)MetricField::expressions(w);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), "/metric");
  }
  cfg.metric_choice = MetricChoice::Expressions;
  cfg.metric_expressions = w;
}

void parse_options(const json& doc, SystemConfig& cfg) {
  if (doc.contains("t0")) cfg.t0 = number_at(doc["t0"], "/t0");
  if (cfg.metric_choice == MetricChoice::Transported && cfg.t0 != 0.0)
    throw ConfigError("transported metrics start at t = 0; t0 must be 0", "/t0");

  if (doc.contains("integrator")) {
    const json& o = object_at(doc["integrator"], "/integrator", {"abs_tol", "rel_tol", "max_steps"});
    if (o.contains("abs_tol")) cfg.integrator.abs_tol = positive_at(o["abs_tol"], "/integrator/abs_tol");
    if (o.contains("rel_tol")) cfg.integrator.rel_tol = positive_at(o["rel_tol"], "/integrator/rel_tol");
    if (o.contains("max_steps")) cfg.integrator.max_steps = integer_at(o["max_steps"], "/integrator/max_steps", 1);
  }
  if (doc.contains("series")) {
    const json& o = object_at(doc["series"], "/series", {"order", "mode"});
    if (o.contains("order")) cfg.series.order = static_cast<int>(integer_at(o["order"], "/series/order", 1));
    if (o.contains("mode")) {
      const std::string& mode = string_at(o["mode"], "/series/mode");
      if (mode == "auto")
        cfg.series.mode = SeriesMode::Auto;
      else if (mode == "linear")
        cfg.series.mode = SeriesMode::Linear;
      else if (mode == "generic")
        cfg.series.mode = SeriesMode::Generic;
      else
        throw ConfigError("expected auto, linear or generic", "/series/mode");
    }
  }
  if (doc.contains("splitting")) {
    const json& o = object_at(doc["splitting"], "/splitting", {"steps"});
    if (o.contains("steps")) cfg.split_steps = static_cast<int>(integer_at(o["steps"], "/splitting/steps", 1));
  }
  if (doc.contains("samples")) {
    const json& o = object_at(doc["samples"], "/samples", {"count", "seed", "box", "time_max"});
    if (o.contains("count")) cfg.samples.count = static_cast<int>(integer_at(o["count"], "/samples/count", 0));
    if (o.contains("seed")) cfg.samples.seed = static_cast<std::uint64_t>(integer_at(o["seed"], "/samples/seed", 0));
    if (o.contains("box")) cfg.samples.box = positive_at(o["box"], "/samples/box");
    if (o.contains("time_max")) cfg.samples.time_max = number_at(o["time_max"], "/samples/time_max");
  }
  cfg.samples.time_min = cfg.t0;
  if (cfg.samples.time_max < cfg.t0) cfg.samples.time_max = cfg.t0;
  if (doc.contains("tolerance")) cfg.tolerance = positive_at(doc["tolerance"], "/tolerance");
  if (doc.contains("audit")) {
    const json& o = object_at(doc["audit"], "/audit", {"invariance", "jacobi", "determinant"});
    if (o.contains("invariance")) cfg.audit.invariance = positive_at(o["invariance"], "/audit/invariance");
    if (o.contains("jacobi")) cfg.audit.jacobi = positive_at(o["jacobi"], "/audit/jacobi");
    if (o.contains("determinant")) cfg.audit.determinant = positive_at(o["determinant"], "/audit/determinant");
  }

  const auto d = static_cast<std::size_t>(cfg.dimension());
  if (doc.contains("queries")) {
    const json& qs = array_at(doc["queries"], "/queries");
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const std::string key = child("/queries", i);
      const json& q = object_at(qs[i], key, {"point", "time"});
      if (!q.contains("point")) throw ConfigError("expected 'point'", key);
      Query query{vector_at(q["point"], child(key, "point"), d), cfg.t0};
      if (q.contains("time")) query.time = number_at(q["time"], child(key, "time"));
      cfg.queries.push_back(std::move(query));
    }
  }
  if (cfg.queries.empty()) cfg.queries.push_back({std::vector<double>(d, 0.0), cfg.t0});

  if (doc.contains("times")) {
    const json& ts = array_at(doc["times"], "/times");
    cfg.times.clear();
    for (std::size_t i = 0; i < ts.size(); ++i) cfg.times.push_back(number_at(ts[i], child("/times", i)));
  }
  cfg.evolve_point = doc.contains("point") ? vector_at(doc["point"], "/point", d) : std::vector<double>(d, 0.0);
  if (doc.contains("methods")) {
    const json& ms = array_at(doc["methods"], "/methods");
    cfg.methods.clear();
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const std::string& m = string_at(ms[i], child("/methods", i));
      if (m != "series" && m != "split" && m != "pullback" && m != "analytic")
        throw ConfigError("expected series, split, pullback or analytic", child("/methods", i));
      cfg.methods.push_back(m);
    }
  }

  if (doc.contains("bracket")) {
    const json& o = object_at(doc["bracket"], "/bracket", {"a", "b", "c"});
    for (const char* name : {"a", "b", "c"}) {
      if (!o.contains(name)) continue;
      const std::string key = child("/bracket", name);
      const std::string& text = string_at(o[name], key);
      (void)expression_at(o[name], key, cfg.chart);
      if (name[0] == 'a')
        cfg.observable_a = text;
      else if (name[0] == 'b')
        cfg.observable_b = text;
      else
        cfg.observable_c = text;
    }
  }
}

}  // namespace

const VectorField& SystemConfig::require_field() const {
  if (!field)
    throw ConfigError(
        "this command needs autonomous dynamics; time-dependent friction is supported only by "
        "the analytic route of evolve-metric");
  return *field;
}

MetricField SystemConfig::metric() const {
  switch (metric_choice) {
    case MetricChoice::FrictionAnalytic:
      return analytic_metric(*friction, t0);
    case MetricChoice::Transported:
      return MetricField::transported(MetricField::canonical(chart.degrees_of_freedom()), field, integrator);
    case MetricChoice::Expressions:
      return MetricField::expressions(*metric_expressions);
    default:
      return MetricField::canonical(chart.degrees_of_freedom());
  }
}

std::optional<Matrix> SystemConfig::initial_matrix() const {
  if (metric_choice != MetricChoice::Expressions) return canonical_metric(chart.degrees_of_freedom());
  const ExprMatrix& w = *metric_expressions;
  for (int k = 0; k < w.dimension(); ++k)
    for (int l = 0; l < w.dimension(); ++l)
      if (max_variable_index(w(k, l)) >= 0) return std::nullopt;
  return w.eval(PhasePoint(std::vector<double>(static_cast<std::size_t>(dimension()), 0.0), t0));
}

MetricField SystemConfig::initial_field() const {
  if (metric_choice != MetricChoice::Expressions) return MetricField::canonical(chart.degrees_of_freedom());
  if (auto w = initial_matrix()) return MetricField::constant(*w);
  const ExprMatrix& w = *metric_expressions;
  for (int k = 0; k < w.dimension(); ++k)
    for (int l = 0; l < w.dimension(); ++l)
      if (depends_on(w(k, l), kTimeVariable))
        throw ConfigError("the pullback route needs an initial metric that does not depend on t", "/metric");
  return MetricField::expressions(w);
}

SystemConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object", "");
  for (const auto& [name, value] : doc.items())
    if (!kTopLevelKeys.count(name)) throw ConfigError("unknown key '" + name + "'", "/" + name);
  if (!doc.contains("n")) throw ConfigError("missing 'n'", "/n");

  SystemConfig cfg;
  const int n = static_cast<int>(integer_at(doc["n"], "/n", 1));
  if (doc.contains("coordinates")) {
    const json& names = array_at(doc["coordinates"], "/coordinates", static_cast<std::size_t>(2 * n));
    std::vector<std::string> list;
    for (std::size_t i = 0; i < names.size(); ++i) list.push_back(string_at(names[i], child("/coordinates", i)));
    try {
      cfg.chart = CoordinateChart(n, std::move(list));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), "/coordinates");
    }
  } else {
    cfg.chart = CoordinateChart(n);
  }
  parse_dynamics(doc, cfg);
  parse_metric(doc, cfg);
  parse_options(doc, cfg);
  return cfg;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(e.what(), "", e.byte);
  }
  return parse_config(doc);
}

}  // namespace metricflow::cli
