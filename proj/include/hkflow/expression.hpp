#ifndef HKFLOW_EXPRESSION_HPP
#define HKFLOW_EXPRESSION_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>

#include "common.hpp"

namespace hkflow {

class ExpressionError : public Error {
public:
  using Error::Error;
};

/// Arithmetic expression over x1..xn with + - * / ^, parentheses, sin cos exp log sqrt abs
/// min max and the constants pi, e.  Parsed once, evaluated many times.
class Expression {
public:
  explicit Expression(std::string text) : text_(std::move(text))
  {
    pos_ = 0;
    root_ = parse_sum();
    skip_space();
    if (pos_ != text_.size())
      fail("unexpected '" + std::string(1, text_[pos_]) + "'");
  }

  const std::string& text() const { return text_; }

  /// Largest variable index used, 0 if the expression is constant.
  int max_variable() const { return max_var_; }

  double operator()(const Point& x) const
  {
    if (max_var_ > x.size())
      throw ExpressionError("expression uses x" + std::to_string(max_var_) + " but the point has dimension " +
                            std::to_string(x.size()));
    return eval(*root_, x);
  }

  ScalarFunction function() const
  {
    return [self = std::make_shared<Expression>(*this)](const Point& x) { return (*self)(x); };
  }

private:
  enum class Op { num, var, neg, add, sub, mul, div, pow, sin, cos, exp, log, sqrt, abs, min, max };

  struct Node {
    Op op;
    double value = 0.0;
    int var = 0;
    std::shared_ptr<const Node> a, b;
  };
  using NodePtr = std::shared_ptr<const Node>;

  std::string text_;
  std::size_t pos_ = 0;
  int max_var_ = 0;
  NodePtr root_;

  [[noreturn]] void fail(const std::string& what) const
  {
    throw ExpressionError("parse error at column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_space()
  {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool accept(char c)
  {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c)
  {
    if (!accept(c))
      fail(pos_ < text_.size() ? "expected '" + std::string(1, c) + "'" : "unexpected end of expression");
  }

  static NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr)
  {
    return std::make_shared<const Node>(Node{op, 0.0, 0, std::move(a), std::move(b)});
  }

  NodePtr parse_sum()
  {
    NodePtr lhs = parse_product();
    while (true) {
      if (accept('+'))
        lhs = make(Op::add, lhs, parse_product());
      else if (accept('-'))
        lhs = make(Op::sub, lhs, parse_product());
      else
        return lhs;
    }
  }

  NodePtr parse_product()
  {
    NodePtr lhs = parse_unary();
    while (true) {
      if (accept('*'))
        lhs = make(Op::mul, lhs, parse_unary());
      else if (accept('/'))
        lhs = make(Op::div, lhs, parse_unary());
      else
        return lhs;
    }
  }

  NodePtr parse_unary()
  {
    if (accept('-'))
      return make(Op::neg, parse_unary());
    if (accept('+'))
      return parse_unary();
    return parse_power();
  }

  // Right associative; the exponent may carry its own sign.
  NodePtr parse_power()
  {
    NodePtr base = parse_primary();
    if (accept('^'))
      return make(Op::pow, base, parse_unary());
    return base;
  }

  NodePtr parse_primary()
  {
    skip_space();
    if (pos_ >= text_.size())
      fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)))
      return parse_name();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr parse_number()
  {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin)
      fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Node>(Node{Op::num});
    n->value = v;
    return n;
  }

  NodePtr parse_name()
  {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    const std::string name = text_.substr(start, pos_ - start);
    if (name == "pi" || name == "e") {
      auto n = std::make_shared<Node>(Node{Op::num});
      n->value = name == "pi" ? std::numbers::pi : std::numbers::e;
      return n;
    }
    if (name.size() > 1 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos && name[1] != '0') {
      auto n = std::make_shared<Node>(Node{Op::var});
      n->var = std::stoi(name.substr(1));
      max_var_ = std::max(max_var_, n->var);
      return n;
    }
    static const std::pair<const char*, Op> unary[] = {{"sin", Op::sin}, {"cos", Op::cos},   {"exp", Op::exp},
                                                       {"log", Op::log}, {"sqrt", Op::sqrt}, {"abs", Op::abs}};
    for (const auto& [fn, op] : unary)
      if (name == fn) {
        expect('(');
        NodePtr a = parse_sum();
        expect(')');
        return make(op, a);
      }
    if (name == "min" || name == "max") {
      expect('(');
      NodePtr a = parse_sum();
      expect(',');
      NodePtr b = parse_sum();
      expect(')');
      return make(name == "min" ? Op::min : Op::max, a, b);
    }
    pos_ = start;
    fail("unknown name '" + name + "'");
  }

  static double eval(const Node& n, const Point& x)
  {
    switch (n.op) {
    case Op::num:
      return n.value;
    case Op::var:
      return x(n.var - 1);
    case Op::neg:
      return -eval(*n.a, x);
    case Op::add:
      return eval(*n.a, x) + eval(*n.b, x);
    case Op::sub:
      return eval(*n.a, x) - eval(*n.b, x);
    case Op::mul:
      return eval(*n.a, x) * eval(*n.b, x);
    case Op::div: {
      const double d = eval(*n.b, x);
      if (d == 0.0)
        throw ExpressionError("division by zero");
      return eval(*n.a, x) / d;
    }
    case Op::pow: {
      const double r = std::pow(eval(*n.a, x), eval(*n.b, x));
      if (!std::isfinite(r))
        throw ExpressionError("power is not finite");
      return r;
    }
    case Op::sin:
      return std::sin(eval(*n.a, x));
    case Op::cos:
      return std::cos(eval(*n.a, x));
    case Op::exp:
      return std::exp(eval(*n.a, x));
    case Op::log: {
      const double a = eval(*n.a, x);
      if (!(a > 0))
        throw ExpressionError("log of nonpositive value");
      return std::log(a);
    }
    case Op::sqrt: {
      const double a = eval(*n.a, x);
      if (a < 0)
        throw ExpressionError("sqrt of negative value");
      return std::sqrt(a);
    }
    case Op::abs:
      return std::abs(eval(*n.a, x));
    case Op::min:
      return std::min(eval(*n.a, x), eval(*n.b, x));
    case Op::max:
      return std::max(eval(*n.a, x), eval(*n.b, x));
    }
    throw ExpressionError("corrupt expression tree");
  }
};

inline double expression_eval(const std::string& expr, const Point& x) { return Expression(expr)(x); }

} // namespace hkflow

#endif
