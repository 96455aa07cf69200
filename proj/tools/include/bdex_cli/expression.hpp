#pragma once

#include <array>
#include <memory>
#include <string>

namespace bdex::cli {

/// Closed-form scalar expression in u1, u2, u3.
///
/// Grammar: numbers, `pi`, variables `u1` `u2` `u3`, binary `+ - * / ^`,
/// unary minus, parentheses and the functions `sin`, `cos`, `exp`, `sqrt`.
/// `^` is right associative and binds tighter than unary minus.
class Expression {
 public:
  Expression() = default;
  /// Throws ConfigError with the offending column on malformed input.
  static Expression parse(const std::string& text);
  static Expression constant(double value);

  double operator()(const std::array<double, 3>& u) const;
  /// Whether the expression reads u_{index+1}.
  bool uses(int index) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace bdex::cli
