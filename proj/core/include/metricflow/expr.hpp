#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "metricflow/phase_point.hpp"

namespace metricflow {

/// Ordered coordinate names of a 2n-dimensional phase space. The name `t` is
/// reserved for time and can never be a coordinate.
class CoordinateChart {
 public:
  /// Default names q1..qn, p1..pn.
  explicit CoordinateChart(int n);
  CoordinateChart(int n, std::vector<std::string> names);

  [[nodiscard]] int degrees_of_freedom() const noexcept { return n_; }
  [[nodiscard]] int dimension() const noexcept { return 2 * n_; }
  [[nodiscard]] const std::string& name(int index) const { return names_.at(static_cast<std::size_t>(index)); }
  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
  [[nodiscard]] std::optional<int> index_of(std::string_view name) const;

  friend bool operator==(const CoordinateChart&, const CoordinateChart&) = default;

 private:
  int n_;
  std::vector<std::string> names_;
};

/// Variable index used for the time variable `t`.
inline constexpr int kTimeVariable = -1;

enum class Op { Constant, Variable, Negate, Add, Subtract, Multiply, Divide, Power, Call };
enum class Function { Sin, Cos, Exp, Log, Sqrt, Tanh };

[[nodiscard]] std::string_view function_name(Function f) noexcept;
[[nodiscard]] std::optional<Function> function_from_name(std::string_view name) noexcept;

/// Raised by parse() for malformed text. `offset()` is the 1-based byte
/// position at which the problem was detected.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t offset);
  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifierError : public ParseError {
 public:
  UnknownIdentifierError(std::string identifier, std::size_t offset);
  [[nodiscard]] const std::string& identifier() const noexcept { return identifier_; }

 private:
  std::string identifier_;
};

/// Evaluation hit a point outside the domain of some node (log of a
/// non-positive number, division by zero, ...). `node()` is the printed
/// offending subexpression.
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& message, std::string node);
  [[nodiscard]] const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

/// Immutable scalar expression over phase coordinates and time.
///
/// Expr is a cheap handle onto a shared, immutable tree and can be copied and
/// evaluated concurrently. The arithmetic operators and the free functions
/// below build new trees and apply only constant folding plus the identities
/// x+0, x-0, x*1, x*0, x/1, x^1 and x^0. Trees produced by parse() are kept
/// exactly as written.
class Expr {
 public:
  Expr();              // the constant 0
  Expr(double value);  // NOLINT(google-explicit-constructor)

  static Expr constant(double value);
  static Expr variable(int index, std::string name);
  static Expr time();

  /// Unsimplified node construction.
  static Expr raw_unary(Op op, Expr operand);
  static Expr raw_binary(Op op, Expr lhs, Expr rhs);
  static Expr raw_call(Function f, Expr arg);

  [[nodiscard]] Op op() const noexcept;
  [[nodiscard]] double constant_value() const;
  [[nodiscard]] int variable_index() const;
  [[nodiscard]] const std::string& variable_name() const;
  [[nodiscard]] Function function() const;
  [[nodiscard]] std::size_t arity() const noexcept;
  [[nodiscard]] const Expr& child(std::size_t i) const;

  [[nodiscard]] bool is_constant() const noexcept { return op() == Op::Constant; }
  [[nodiscard]] bool is_constant(double v) const noexcept;
  [[nodiscard]] bool is_zero() const noexcept { return is_constant(0.0); }

  [[nodiscard]] double eval(std::span<const double> coords, double t) const;
  [[nodiscard]] double eval(const PhasePoint& x) const { return eval(x.coords, x.time); }

  [[nodiscard]] std::string to_string() const;

  /// Same node object (not structural equality).
  [[nodiscard]] bool same_node(const Expr& other) const noexcept { return node_ == other.node_; }

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator-(const Expr& a);
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr pow(const Expr& base, const Expr& exponent);
Expr call(Function f, const Expr& arg);

/// Parses `text` under the chart. Grammar:
///   expr := term (("+"|"-") term)* ; term := factor (("*"|"/") factor)* ;
///   factor := "-" factor | power ; power := atom ("^" factor)? ;
///   atom := number | ident | ident "(" expr ")" | "(" expr ")"
Expr parse(std::string_view text, const CoordinateChart& chart);

/// Exact symbolic derivative with respect to coordinate `index`, or time when
/// `index == kTimeVariable`.
Expr differentiate(const Expr& e, int index);

/// True when `e` mentions variable `index`.
bool depends_on(const Expr& e, int index);

/// Largest coordinate index referenced, or -1 when none.
int max_variable_index(const Expr& e);

/// Polynomial degree in the coordinates; std::nullopt when the expression is
/// not a polynomial (or depends on time).
std::optional<int> polynomial_degree(const Expr& e);

/// Number of nodes in the tree, counting shared subtrees once per use. Stops
/// counting once `cap` is exceeded and returns cap + 1.
std::size_t tree_size(const Expr& e, std::size_t cap = static_cast<std::size_t>(-1));

}  // namespace metricflow
