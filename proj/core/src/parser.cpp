#include <cctype>
#include <cstdlib>
#include <string>

#include "metricflow/expr.hpp"

namespace metricflow {

namespace {

// Recursive-descent parser over the expression grammar. Offsets reported in
// errors are 1-based byte positions.
class Parser {
 public:
  Parser(std::string_view text, const CoordinateChart& chart) : text_(text), chart_(chart) {}

  Expr run() {
    skip_space();
    if (at_end()) fail("empty expression");
    Expr e = expr();
    skip_space();
    if (!at_end()) fail(std::string("unexpected '") + peek() + "'");
    return e;
  }

 private:
  std::string_view text_;
  const CoordinateChart& chart_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_ + 1); }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (at_end()) fail(std::string("expected '") + c + "' before end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::raw_binary(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = Expr::raw_binary(Op::Subtract, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::raw_binary(Op::Multiply, lhs, factor());
      } else if (accept('/')) {
        lhs = Expr::raw_binary(Op::Divide, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  Expr factor() {
    if (accept('-')) return Expr::raw_unary(Op::Negate, factor());
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (accept('^')) return Expr::raw_binary(Op::Power, base, factor());
    return base;
  }

  Expr atom() {
    skip_space();
    if (at_end()) fail("unexpected end of input");
    const char c = peek();
    if (c == '(') {
      ++pos_;
      Expr inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected '") + c + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (peek() == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) {
      pos_ = start;
      fail("malformed number");
    }
    if (peek() == 'e' || peek() == 'E') {
      const std::size_t mark = pos_;
      ++pos_;
      if (peek() == '+' || peek() == '-') ++pos_;
      if (digits() == 0) {
        pos_ = mark;
        fail("malformed exponent");
      }
    }
    const std::string literal(text_.substr(start, pos_ - start));
    return Expr::constant(std::strtod(literal.c_str(), nullptr));
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    const std::size_t after_name = pos_;
    skip_space();
    if (peek() == '(') {
      auto f = function_from_name(name);
      if (!f) throw UnknownIdentifierError(name, start + 1);
      ++pos_;
      Expr arg = expr();
      expect(')');
      return Expr::raw_call(*f, arg);
    }
    pos_ = after_name;
    if (name == "t") return Expr::time();
    if (auto index = chart_.index_of(name)) return Expr::variable(*index, name);
    throw UnknownIdentifierError(name, start + 1);
  }
};

}  // namespace

Expr parse(std::string_view text, const CoordinateChart& chart) { return Parser(text, chart).run(); }

}  // namespace metricflow
