#include "dafo/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "dafo/errors.hpp"

namespace dafo {

struct Expression::Node {
  enum class Kind { Constant, VarX, VarY, VarT, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt, Abs };
  Kind kind;
  double value = 0.0;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(double x, double y, double t) const {
    switch (kind) {
      case Kind::Constant: return value;
      case Kind::VarX: return x;
      case Kind::VarY: return y;
      case Kind::VarT: return t;
      case Kind::Add: return lhs->eval(x, y, t) + rhs->eval(x, y, t);
      case Kind::Sub: return lhs->eval(x, y, t) - rhs->eval(x, y, t);
      case Kind::Mul: return lhs->eval(x, y, t) * rhs->eval(x, y, t);
      case Kind::Div: return lhs->eval(x, y, t) / rhs->eval(x, y, t);
      case Kind::Pow: return std::pow(lhs->eval(x, y, t), rhs->eval(x, y, t));
      case Kind::Neg: return -lhs->eval(x, y, t);
      case Kind::Sin: return std::sin(lhs->eval(x, y, t));
      case Kind::Cos: return std::cos(lhs->eval(x, y, t));
      case Kind::Exp: return std::exp(lhs->eval(x, y, t));
      case Kind::Sqrt: return std::sqrt(lhs->eval(x, y, t));
      case Kind::Abs: return std::abs(lhs->eval(x, y, t));
    }
    return 0.0;
  }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr,
             double value = 0.0) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->value = value;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
public:
  explicit Parser(const std::string& text) : text_(text) {}

  NodePtr run() {
    NodePtr root = additive();
    skip_ws();
    if (pos_ != text_.size())
      fail("unexpected trailing input '" + text_.substr(pos_) + "'");
    return root;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression '" + text_ + "': " + msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr additive() {
    NodePtr lhs = multiplicative();
    for (;;) {
      if (consume('+'))
        lhs = make(Node::Kind::Add, lhs, multiplicative());
      else if (consume('-'))
        lhs = make(Node::Kind::Sub, lhs, multiplicative());
      else
        return lhs;
    }
  }

  NodePtr multiplicative() {
    NodePtr lhs = unary();
    for (;;) {
      if (consume('*'))
        lhs = make(Node::Kind::Mul, lhs, unary());
      else if (consume('/'))
        lhs = make(Node::Kind::Div, lhs, unary());
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (consume('-')) return make(Node::Kind::Neg, unary());
    if (consume('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (consume('^')) return make(Node::Kind::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = additive();
      if (!consume(')')) fail("missing ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    return make(Node::Kind::Constant, nullptr, nullptr, v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isalpha(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    const std::string name = text_.substr(start, pos_ - start);
    if (name == "x") return make(Node::Kind::VarX);
    if (name == "y") return make(Node::Kind::VarY);
    if (name == "t") return make(Node::Kind::VarT);

    Node::Kind kind;
    if (name == "sin") kind = Node::Kind::Sin;
    else if (name == "cos") kind = Node::Kind::Cos;
    else if (name == "exp") kind = Node::Kind::Exp;
    else if (name == "sqrt") kind = Node::Kind::Sqrt;
    else if (name == "abs") kind = Node::Kind::Abs;
    else fail("unknown identifier '" + name + "'");

    if (!consume('(')) fail("expected '(' after '" + name + "'");
    NodePtr arg = additive();
    if (!consume(')')) fail("missing ')' after argument of '" + name + "'");
    return make(kind, arg);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression expr;
  expr.text_ = text;
  expr.root_ = Parser(text).run();
  return expr;
}

double Expression::operator()(double x, double y, double t) const {
  return root_->eval(x, y, t);
}

}  // namespace dafo
