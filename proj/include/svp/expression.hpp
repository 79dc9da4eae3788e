#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace svp {

class ExpressionError : public std::runtime_error {
 public:
  ExpressionError(const std::string& message, std::size_t offset)
      : std::runtime_error(message + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Arithmetic over numbers, pi, coordinates x1..x9, + - * / ^, unary minus
/// and sin cos exp cosh sinh abs. ^ binds tighter than unary minus and is
/// right associative.
class Expression {
 public:
  struct Node;

  static Expression parse(std::string_view text);

  double evaluate(std::span<const double> x = {}) const;
  /// Fully parenthesized form; reparsing it gives an identical tree.
  std::string to_string() const;
  /// Highest coordinate index referenced (0 if none).
  int max_coordinate() const;
  bool operator==(const Expression& other) const;

 private:
  explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const Node> root_;
};

/// Parses and evaluates a constant expression such as "1/64".
double evaluate_constant(std::string_view text);

}  // namespace svp
