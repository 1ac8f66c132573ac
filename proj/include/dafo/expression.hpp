#ifndef DAFO_EXPRESSION_HPP
#define DAFO_EXPRESSION_HPP

#include <memory>
#include <string>

namespace dafo {

/// Small arithmetic expressions in the variables x, y, t with the
/// operators + - * / ^ and the functions sin, cos, exp, sqrt, abs.
/// Parsed once, evaluated at quadrature points.
class Expression {
public:
  struct Node;

  /// Throws ParseError on malformed input.
  static Expression parse(const std::string& text);

  double operator()(double x, double y, double t = 0.0) const;

  const std::string& text() const { return text_; }

private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace dafo

#endif
