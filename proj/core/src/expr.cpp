#include "metricflow/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

namespace metricflow {

// ---------------------------------------------------------------------------
// CoordinateChart

namespace {

std::vector<std::string> default_names(int n) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(2 * n));
  for (int i = 1; i <= n; ++i) names.push_back("q" + std::to_string(i));
  for (int i = 1; i <= n; ++i) names.push_back("p" + std::to_string(i));
  return names;
}

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(s.front())) return false;
  return std::all_of(s.begin(), s.end(), [&](char c) { return alpha(c) || digit(c); });
}

}  // namespace

CoordinateChart::CoordinateChart(int n) : CoordinateChart(n, default_names(n > 0 ? n : 0)) {}

CoordinateChart::CoordinateChart(int n, std::vector<std::string> names) : n_(n), names_(std::move(names)) {
  if (n_ <= 0) throw std::invalid_argument("chart: degrees of freedom must be positive");
  if (names_.size() != static_cast<std::size_t>(2 * n_))
    throw std::invalid_argument("chart: expected " + std::to_string(2 * n_) + " coordinate names, got " +
                                std::to_string(names_.size()));
  std::set<std::string> seen;
  for (const auto& name : names_) {
    if (!valid_identifier(name)) throw std::invalid_argument("chart: invalid coordinate name '" + name + "'");
    if (name == "t") throw std::invalid_argument("chart: 't' is reserved for time");
    if (function_from_name(name)) throw std::invalid_argument("chart: '" + name + "' is a function name");
    if (!seen.insert(name).second) throw std::invalid_argument("chart: duplicate coordinate name '" + name + "'");
  }
}

std::optional<int> CoordinateChart::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Functions and errors

std::string_view function_name(Function f) noexcept {
  switch (f) {
    case Function::Sin:
      return "sin";
    case Function::Cos:
      return "cos";
    case Function::Exp:
      return "exp";
    case Function::Log:
      return "log";
    case Function::Sqrt:
      return "sqrt";
    case Function::Tanh:
      return "tanh";
  }
  return "?";
}

std::optional<Function> function_from_name(std::string_view name) noexcept {
  static constexpr std::array<Function, 6> all = {Function::Sin, Function::Cos,  Function::Exp,
                                                  Function::Log, Function::Sqrt, Function::Tanh};
  for (Function f : all)
    if (function_name(f) == name) return f;
  return std::nullopt;
}

ParseError::ParseError(const std::string& message, std::size_t offset)
    : std::runtime_error(message + " at offset " + std::to_string(offset)), offset_(offset) {}

UnknownIdentifierError::UnknownIdentifierError(std::string identifier, std::size_t offset)
    : ParseError("unknown identifier '" + identifier + "'", offset), identifier_(std::move(identifier)) {}

DomainError::DomainError(const std::string& message, std::string node)
    : std::runtime_error(message + " in '" + node + "'"), node_(std::move(node)) {}

// ---------------------------------------------------------------------------
// Nodes

struct Expr::Node {
  Op op;
  double value = 0.0;
  int index = 0;
  std::string name;
  Function function = Function::Sin;
  std::vector<Expr> children;  // empty for leaves
};

namespace {

const std::shared_ptr<const Expr::Node>& zero_node() {
  static const auto node = [] {
    auto n = std::make_shared<Expr::Node>();
    n->op = Op::Constant;
    n->value = 0.0;
    return std::shared_ptr<const Expr::Node>(n);
  }();
  return node;
}

}  // namespace

Expr::Expr() : node_(zero_node()) {}

Expr::Expr(double value) : Expr(constant(value)) {}

Expr Expr::constant(double value) {
  if (value == 0.0) return Expr(zero_node());  // also folds -0.0
  auto n = std::make_shared<Node>();
  n->op = Op::Constant;
  n->value = value;
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::variable(int index, std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::Variable;
  n->index = index;
  n->name = std::move(name);
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::time() { return variable(kTimeVariable, "t"); }

Expr Expr::raw_unary(Op op, Expr operand) {
  if (op != Op::Negate) throw std::invalid_argument("raw_unary: only negation is unary");
  auto n = std::make_shared<Node>();
  n->op = op;
  n->children.push_back(std::move(operand));
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::raw_binary(Op op, Expr lhs, Expr rhs) {
  switch (op) {
    case Op::Add:
    case Op::Subtract:
    case Op::Multiply:
    case Op::Divide:
    case Op::Power:
      break;
    default:
      throw std::invalid_argument("raw_binary: not a binary operator");
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->children.reserve(2);
  n->children.push_back(std::move(lhs));
  n->children.push_back(std::move(rhs));
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::raw_call(Function f, Expr arg) {
  auto n = std::make_shared<Node>();
  n->op = Op::Call;
  n->function = f;
  n->children.push_back(std::move(arg));
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Op Expr::op() const noexcept { return node_->op; }

double Expr::constant_value() const {
  if (node_->op != Op::Constant) throw std::logic_error("constant_value on a non-constant node");
  return node_->value;
}

int Expr::variable_index() const {
  if (node_->op != Op::Variable) throw std::logic_error("variable_index on a non-variable node");
  return node_->index;
}

const std::string& Expr::variable_name() const {
  if (node_->op != Op::Variable) throw std::logic_error("variable_name on a non-variable node");
  return node_->name;
}

Function Expr::function() const {
  if (node_->op != Op::Call) throw std::logic_error("function on a non-call node");
  return node_->function;
}

std::size_t Expr::arity() const noexcept { return node_->children.size(); }

const Expr& Expr::child(std::size_t i) const {
  if (i >= node_->children.size()) throw std::out_of_range("Expr::child");
  return node_->children[i];
}

bool Expr::is_constant(double v) const noexcept { return node_->op == Op::Constant && node_->value == v; }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double apply_function(Function f, double a) {
  switch (f) {
    case Function::Sin:
      return std::sin(a);
    case Function::Cos:
      return std::cos(a);
    case Function::Exp:
      return std::exp(a);
    case Function::Log:
      return std::log(a);
    case Function::Sqrt:
      return std::sqrt(a);
    case Function::Tanh:
      return std::tanh(a);
  }
  return std::nan("");
}

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

double eval_node(const Expr& e, std::span<const double> x, double t) {
  switch (e.op()) {
    case Op::Constant:
      return e.constant_value();
    case Op::Variable: {
      const int i = e.variable_index();
      if (i == kTimeVariable) return t;
      if (i < 0 || static_cast<std::size_t>(i) >= x.size())
        throw DomainError("coordinate not supplied by point", e.to_string());
      return x[static_cast<std::size_t>(i)];
    }
    case Op::Negate:
      return -eval_node(e.child(0), x, t);
    case Op::Add:
      return eval_node(e.child(0), x, t) + eval_node(e.child(1), x, t);
    case Op::Subtract:
      return eval_node(e.child(0), x, t) - eval_node(e.child(1), x, t);
    case Op::Multiply:
      return eval_node(e.child(0), x, t) * eval_node(e.child(1), x, t);
    case Op::Divide: {
      const double num = eval_node(e.child(0), x, t);
      const double den = eval_node(e.child(1), x, t);
      if (den == 0.0) throw DomainError("division by zero", e.to_string());
      return num / den;
    }
    case Op::Power: {
      const double base = eval_node(e.child(0), x, t);
      const double expo = eval_node(e.child(1), x, t);
      if (base < 0.0 && !is_integer(expo))
        throw DomainError("negative base raised to a non-integer power", e.to_string());
      if (base == 0.0 && expo < 0.0) throw DomainError("zero raised to a negative power", e.to_string());
      const double r = std::pow(base, expo);
      if (!std::isfinite(r)) throw DomainError("power overflow", e.to_string());
      return r;
    }
    case Op::Call: {
      const double a = eval_node(e.child(0), x, t);
      switch (e.function()) {
        case Function::Log:
          if (!(a > 0.0)) throw DomainError("log of a non-positive number", e.to_string());
          break;
        case Function::Sqrt:
          if (a < 0.0) throw DomainError("sqrt of a negative number", e.to_string());
          break;
        default:
          break;
      }
      const double r = apply_function(e.function(), a);
      if (!std::isfinite(r)) throw DomainError("non-finite result", e.to_string());
      return r;
    }
  }
  return std::nan("");
}

}  // namespace

double Expr::eval(std::span<const double> coords, double t) const {
  const double r = eval_node(*this, coords, t);
  if (std::isnan(r)) throw DomainError("NaN result", to_string());
  return r;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char tmp[32];
    std::snprintf(tmp, sizeof tmp, "%.*g", prec, v);
    if (std::strtod(tmp, nullptr) == v) return tmp;
  }
  return buf;
}

// Binding strength used to decide where parentheses are needed.
int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Subtract:
      return 1;
    case Op::Multiply:
    case Op::Divide:
      return 2;
    case Op::Negate:
      return 3;
    case Op::Power:
      return 4;
    case Op::Constant:
      return e.constant_value() < 0.0 ? 3 : 5;
    default:
      return 5;
  }
}

void print(const Expr& e, std::string& out);

void print_child(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

void print(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::Constant:
      out += format_number(e.constant_value());
      return;
    case Op::Variable:
      out += e.variable_name();
      return;
    case Op::Negate:
      out += '-';
      print_child(e.child(0), 3, out);
      return;
    case Op::Add:
    case Op::Subtract:
      print_child(e.child(0), 1, out);
      out += e.op() == Op::Add ? '+' : '-';
      print_child(e.child(1), 2, out);
      return;
    case Op::Multiply:
    case Op::Divide:
      print_child(e.child(0), 2, out);
      out += e.op() == Op::Multiply ? '*' : '/';
      print_child(e.child(1), 3, out);
      return;
    case Op::Power:
      print_child(e.child(0), 5, out);
      out += '^';
      print_child(e.child(1), 3, out);
      return;
    case Op::Call:
      out += function_name(e.function());
      out += '(';
      print(e.child(0), out);
      out += ')';
      return;
  }
}

}  // namespace

std::string Expr::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

// ---------------------------------------------------------------------------
// Simplifying builders

namespace {

// -c, -u and (-c)*u with c > 0.
bool is_negative_term(const Expr& e) {
  if (e.is_constant()) return e.constant_value() < 0.0;
  if (e.op() == Op::Negate) return true;
  return e.op() == Op::Multiply && e.child(0).is_constant() && e.child(0).constant_value() < 0.0;
}

}  // namespace

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.constant_value());
  if (a.op() == Op::Negate) return a.child(0);
  if (a.op() == Op::Multiply && a.child(0).is_constant()) {
    const double c = -a.child(0).constant_value();
    return c == 1.0 ? a.child(1) : Expr::raw_binary(Op::Multiply, Expr::constant(c), a.child(1));
  }
  return Expr::raw_unary(Op::Negate, a);
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() + b.constant_value());
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (is_negative_term(b)) return a - (-b);
  return Expr::raw_binary(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() - b.constant_value());
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  if (is_negative_term(b)) return a + (-b);
  return Expr::raw_binary(Op::Subtract, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() * b.constant_value());
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (b.is_constant() && !a.is_constant()) return b * a;
  if (a.is_constant(-1.0)) return -b;
  if (a.is_constant()) {
    if (b.op() == Op::Multiply && b.child(0).is_constant())
      return Expr::constant(a.constant_value() * b.child(0).constant_value()) * b.child(1);
    if (b.op() == Op::Negate) return Expr::constant(-a.constant_value()) * b.child(0);
  }
  return Expr::raw_binary(Op::Multiply, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_constant() && b.constant_value() != 0.0) {
    const double d = b.constant_value();
    if (a.is_constant()) return Expr::constant(a.constant_value() / d);
    if (d == 1.0) return a;
    if (a.op() == Op::Multiply && a.child(0).is_constant())
      return Expr::constant(a.child(0).constant_value() / d) * a.child(1);
  }
  if (a.is_zero() && !b.is_zero()) return Expr();
  return Expr::raw_binary(Op::Divide, a, b);
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_constant(1.0)) return base;
  if (exponent.is_zero()) return Expr::constant(1.0);
  if (base.is_constant() && exponent.is_constant()) {
    const double b = base.constant_value();
    const double x = exponent.constant_value();
    const bool ok = !(b < 0.0 && !is_integer(x)) && !(b == 0.0 && x < 0.0);
    if (ok) {
      const double r = std::pow(b, x);
      if (std::isfinite(r)) return Expr::constant(r);
    }
  }
  return Expr::raw_binary(Op::Power, base, exponent);
}

Expr call(Function f, const Expr& arg) {
  if (arg.is_constant()) {
    const double a = arg.constant_value();
    const bool ok = (f != Function::Log || a > 0.0) && (f != Function::Sqrt || a >= 0.0);
    if (ok) {
      const double r = apply_function(f, a);
      if (std::isfinite(r)) return Expr::constant(r);
    }
  }
  return Expr::raw_call(f, arg);
}

// ---------------------------------------------------------------------------
// Differentiation

Expr differentiate(const Expr& e, int index) {
  switch (e.op()) {
    case Op::Constant:
      return Expr();
    case Op::Variable:
      return e.variable_index() == index ? Expr::constant(1.0) : Expr();
    case Op::Negate:
      return -differentiate(e.child(0), index);
    case Op::Add:
      return differentiate(e.child(0), index) + differentiate(e.child(1), index);
    case Op::Subtract:
      return differentiate(e.child(0), index) - differentiate(e.child(1), index);
    case Op::Multiply: {
      const Expr& u = e.child(0);
      const Expr& v = e.child(1);
      return differentiate(u, index) * v + u * differentiate(v, index);
    }
    case Op::Divide: {
      const Expr& u = e.child(0);
      const Expr& v = e.child(1);
      const Expr du = differentiate(u, index);
      const Expr dv = differentiate(v, index);
      if (dv.is_zero()) return du / v;
      return (du * v - u * dv) / pow(v, Expr::constant(2.0));
    }
    case Op::Power: {
      const Expr& u = e.child(0);
      const Expr& v = e.child(1);
      const Expr du = differentiate(u, index);
      if (!depends_on(v, index)) {
        if (v.is_constant()) return v * pow(u, Expr::constant(v.constant_value() - 1.0)) * du;
        return v * pow(u, v - Expr::constant(1.0)) * du;
      }
      const Expr dv = differentiate(v, index);
      return e * (dv * call(Function::Log, u) + v * du / u);
    }
    case Op::Call: {
      const Expr& u = e.child(0);
      const Expr du = differentiate(u, index);
      if (du.is_zero()) return Expr();
      switch (e.function()) {
        case Function::Sin:
          return call(Function::Cos, u) * du;
        case Function::Cos:
          return -call(Function::Sin, u) * du;
        case Function::Exp:
          return e * du;
        case Function::Log:
          return du / u;
        case Function::Sqrt:
          return du / (Expr::constant(2.0) * e);
        case Function::Tanh:
          return (Expr::constant(1.0) - pow(e, Expr::constant(2.0))) * du;
      }
    }
  }
  return Expr();
}

bool depends_on(const Expr& e, int index) {
  if (e.op() == Op::Variable) return e.variable_index() == index;
  for (std::size_t i = 0; i < e.arity(); ++i)
    if (depends_on(e.child(i), index)) return true;
  return false;
}

int max_variable_index(const Expr& e) {
  if (e.op() == Op::Variable) return e.variable_index();
  int m = -1;
  for (std::size_t i = 0; i < e.arity(); ++i) m = std::max(m, max_variable_index(e.child(i)));
  return m;
}

std::optional<int> polynomial_degree(const Expr& e) {
  switch (e.op()) {
    case Op::Constant:
      return 0;
    case Op::Variable:
      if (e.variable_index() == kTimeVariable) return std::nullopt;
      return 1;
    case Op::Negate:
      return polynomial_degree(e.child(0));
    case Op::Add:
    case Op::Subtract: {
      auto a = polynomial_degree(e.child(0));
      auto b = polynomial_degree(e.child(1));
      if (!a || !b) return std::nullopt;
      return std::max(*a, *b);
    }
    case Op::Multiply: {
      auto a = polynomial_degree(e.child(0));
      auto b = polynomial_degree(e.child(1));
      if (!a || !b) return std::nullopt;
      return *a + *b;
    }
    case Op::Divide: {
      auto a = polynomial_degree(e.child(0));
      auto b = polynomial_degree(e.child(1));
      if (!a || !b || *b != 0) return std::nullopt;
      return *a;
    }
    case Op::Power: {
      auto a = polynomial_degree(e.child(0));
      auto b = polynomial_degree(e.child(1));
      if (!a || !b || *b != 0) return std::nullopt;
      if (*a == 0) return 0;
      const Expr& x = e.child(1);
      if (!x.is_constant()) return std::nullopt;
      const double k = x.constant_value();
      if (!is_integer(k) || k < 0.0 || k > 64.0) return std::nullopt;
      return *a * static_cast<int>(k);
    }
    case Op::Call: {
      auto a = polynomial_degree(e.child(0));
      if (a && *a == 0) return 0;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::size_t tree_size(const Expr& e, std::size_t cap) {
  std::size_t count = 0;
  std::vector<const Expr*> stack{&e};
  while (!stack.empty()) {
    const Expr* cur = stack.back();
    stack.pop_back();
    if (++count > cap) return cap == static_cast<std::size_t>(-1) ? cap : cap + 1;
    for (std::size_t i = 0; i < cur->arity(); ++i) stack.push_back(&cur->child(i));
  }
  return count;
}

}  // namespace metricflow
