#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace akm {

/// Immutable scalar expression in a single named variable.
///
/// Grammar (whitespace is ignored between tokens):
///
///     expr   := term (("+" | "-") term)*
///     term   := factor (("*" | "/") factor)*
///     factor := "-" factor | power
///     power  := atom ("^" factor)?
///     atom   := NUMBER | VAR | FUNC "(" expr ")" | "(" expr ")"
///     FUNC   := exp | log | sqrt | sin | cos
///
/// `^` is right-associative and binds tighter than unary minus, so `-2^2` is
/// -4 and `2^-1` is 0.5. Copies share the underlying tree.
class Expr {
 public:
  struct Node;

  /// Parses `src` with `variable` as the only admissible identifier besides the
  /// function names. Throws ParseError.
  static Expr parse(std::string_view src, std::string_view variable);

  /// Constant expression (printed with 17 significant digits).
  static Expr constant(double value, std::string_view variable);

  /// Evaluates at `x`. Throws DomainError for division by zero, logarithm of a
  /// non-positive number, square root of a negative number, non-integer power
  /// of a negative base, or any non-finite intermediate.
  double eval(double x) const;
  double operator()(double x) const { return eval(x); }

  /// Fully parenthesised text that parses back to an equivalent tree.
  std::string print() const;

  /// The text originally passed to parse().
  const std::string& source() const noexcept { return source_; }
  const std::string& variable() const noexcept { return variable_; }

  /// True when the expression does not reference its variable.
  bool is_constant() const;

 private:
  Expr(std::shared_ptr<const Node> root, std::string source, std::string variable)
      : root_(std::move(root)), source_(std::move(source)), variable_(std::move(variable)) {}

  std::shared_ptr<const Node> root_;
  std::string source_;
  std::string variable_;
};

}  // namespace akm
