#include "svp/expression.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

namespace svp {

struct Expression::Node {
  enum class Kind { number, pi, coordinate, negate, add, sub, mul, div, pow, call } kind;
  double value = 0.0;
  int index = 0;  // coordinate index or function id
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

constexpr std::array<std::string_view, 6> kFunctions = {"sin", "cos", "exp", "cosh", "sinh", "abs"};

NodePtr make(Node::Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse_all() {
    skip();
    if (pos_ == text_.size()) throw ExpressionError("empty expression", pos_);
    NodePtr n = sum();
    skip();
    if (pos_ != text_.size()) throw ExpressionError("unexpected character", pos_);
    return n;
  }

 private:
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr n = product();
    for (;;) {
      if (accept('+')) n = make(Node::Kind::add, n, product());
      else if (accept('-')) n = make(Node::Kind::sub, n, product());
      else return n;
    }
  }

  NodePtr product() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) n = make(Node::Kind::mul, n, unary());
      else if (accept('/')) n = make(Node::Kind::div, n, unary());
      else return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Kind::negate, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Node::Kind::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= text_.size()) throw ExpressionError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = sum();
      if (!accept(')')) throw ExpressionError("expected ')'", pos_);
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ExpressionError("unexpected character", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    double value = 0.0;
    auto [end, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc()) throw ExpressionError("malformed number", start);
    pos_ = static_cast<std::size_t>(end - text_.data());
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::number;
    n->value = value;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "pi") return make(Node::Kind::pi);
    if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '9') {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::coordinate;
      n->index = name[1] - '0';
      return n;
    }
    for (std::size_t f = 0; f < kFunctions.size(); ++f) {
      if (name == kFunctions[f]) {
        if (!accept('(')) throw ExpressionError("expected '(' after function name", pos_);
        NodePtr arg = sum();
        if (!accept(')')) throw ExpressionError("expected ')'", pos_);
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::call;
        n->index = static_cast<int>(f);
        n->lhs = std::move(arg);
        return n;
      }
    }
    throw ExpressionError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, std::span<const double> x) {
  switch (n.kind) {
    case Node::Kind::number: return n.value;
    case Node::Kind::pi: return std::numbers::pi;
    case Node::Kind::coordinate: {
      const auto i = static_cast<std::size_t>(n.index - 1);
      return i < x.size() ? x[i] : 0.0;
    }
    case Node::Kind::negate: return -eval(*n.lhs, x);
    case Node::Kind::add: return eval(*n.lhs, x) + eval(*n.rhs, x);
    case Node::Kind::sub: return eval(*n.lhs, x) - eval(*n.rhs, x);
    case Node::Kind::mul: return eval(*n.lhs, x) * eval(*n.rhs, x);
    case Node::Kind::div: return eval(*n.lhs, x) / eval(*n.rhs, x);
    case Node::Kind::pow: return std::pow(eval(*n.lhs, x), eval(*n.rhs, x));
    case Node::Kind::call: {
      const double a = eval(*n.lhs, x);
      switch (n.index) {
        case 0: return std::sin(a);
        case 1: return std::cos(a);
        case 2: return std::exp(a);
        case 3: return std::cosh(a);
        case 4: return std::sinh(a);
        default: return std::abs(a);
      }
    }
  }
  return 0.0;
}

std::string format_number(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::string print(const Node& n) {
  switch (n.kind) {
    case Node::Kind::number: return format_number(n.value);
    case Node::Kind::pi: return "pi";
    case Node::Kind::coordinate: return "x" + std::to_string(n.index);
    case Node::Kind::negate: return "(-" + print(*n.lhs) + ")";
    case Node::Kind::add: return "(" + print(*n.lhs) + "+" + print(*n.rhs) + ")";
    case Node::Kind::sub: return "(" + print(*n.lhs) + "-" + print(*n.rhs) + ")";
    case Node::Kind::mul: return "(" + print(*n.lhs) + "*" + print(*n.rhs) + ")";
    case Node::Kind::div: return "(" + print(*n.lhs) + "/" + print(*n.rhs) + ")";
    case Node::Kind::pow: return "(" + print(*n.lhs) + "^" + print(*n.rhs) + ")";
    case Node::Kind::call:
      return std::string(kFunctions[static_cast<std::size_t>(n.index)]) + "(" + print(*n.lhs) + ")";
  }
  return {};
}

bool same(const Node* a, const Node* b) {
  if (a == nullptr || b == nullptr) return a == b;
  if (a->kind != b->kind || a->index != b->index) return false;
  if (a->kind == Node::Kind::number && a->value != b->value) return false;
  return same(a->lhs.get(), b->lhs.get()) && same(a->rhs.get(), b->rhs.get());
}

int max_coord(const Node* n) {
  if (n == nullptr) return 0;
  const int own = n->kind == Node::Kind::coordinate ? n->index : 0;
  return std::max({own, max_coord(n->lhs.get()), max_coord(n->rhs.get())});
}

}  // namespace

Expression Expression::parse(std::string_view text) { return Expression(Parser(text).parse_all()); }

double Expression::evaluate(std::span<const double> x) const { return eval(*root_, x); }

std::string Expression::to_string() const { return print(*root_); }

int Expression::max_coordinate() const { return max_coord(root_.get()); }

bool Expression::operator==(const Expression& other) const { return same(root_.get(), other.root_.get()); }

double evaluate_constant(std::string_view text) {
  const Expression e = Expression::parse(text);
  if (e.max_coordinate() != 0) throw ExpressionError("coordinates not allowed in a constant", 0);
  return e.evaluate();
}

}  // namespace svp
