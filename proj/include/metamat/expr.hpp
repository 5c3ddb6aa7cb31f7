#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "metamat/geometry.hpp"

namespace metamat {

// Declared regularity of a coefficient; only used to pick the expected
// convergence rate in diagnostics.
struct Smoothness {
  enum class Kind { TwiceDifferentiable, Lipschitz, Modulus };

  Kind kind = Kind::TwiceDifferentiable;
  double lipschitz_constant = 0.0;
  std::string modulus;

  static Smoothness twice_differentiable() { return {}; }
  static Smoothness lipschitz(double L) { return {Kind::Lipschitz, L, {}}; }
  static Smoothness modulus_of_continuity(std::string description) {
    return {Kind::Modulus, 0.0, std::move(description)};
  }

  std::string describe() const;
};

// Parses "twice-differentiable", "lipschitz[:L]" or "modulus:<text>".
Smoothness parse_smoothness(std::string_view text);

namespace detail {
struct Node;
}

/// Parsed formula over x1, x2, x3.
///
/// Grammar (lowest to highest precedence):
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := ('-' | '+') unary | power
///   power   := primary ('^' unary)?          right-associative
///   primary := number | 'pi' | var | func '(' sum ')' | '(' sum ')'
///   func    := sin | cos | exp | sqrt | abs
///
/// So -x^2 is -(x^2) and 2^-1 is 0.5.  Immutable and cheap to copy.
class Expression {
 public:
  double evaluate(const Point& x) const;
  // Fully parenthesised text that parses back to an identical tree.
  std::string to_string() const;

 private:
  friend Expression parse_expression(std::string_view source);
  explicit Expression(std::shared_ptr<const detail::Node> root) : root_(std::move(root)) {}

  std::shared_ptr<const detail::Node> root_;
};

/// Throws ParseError (with byte offset and expected tokens) or
/// UnknownIdentifier.
Expression parse_expression(std::string_view source);

/// Real scalar field on the closed unit cube.
struct CoefficientField {
  std::string source;
  std::function<double(const Point&)> eval;
  Smoothness smoothness;

  double operator()(const Point& x) const { return eval(x); }
};

CoefficientField parse(std::string_view source, Smoothness smoothness = {});

CoefficientField constant_field(double value);

/// Preset coefficients ex1..ex4.  b and P only matter for ex2, whose Gaussian
/// width is sqrt(3) / (2 b P).  Throws InvalidParameter for unknown names.
CoefficientField preset(std::string_view name, int b = 5, int P = 11);

}  // namespace metamat
