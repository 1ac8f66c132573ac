#include "dafo/elements.hpp"

#include <cmath>
#include <stdexcept>

namespace dafo {

namespace {

QuadratureRule make_rule(int degree) {
  QuadratureRule rule;
  rule.degree = degree;
  auto add = [&rule](double l1, double l2, double l3, double w) {
    rule.nodes.push_back({{l1, l2, l3}, w});
  };
  auto add_sym3 = [&](double a, double b, double w) {
    add(a, b, b, w);
    add(b, a, b, w);
    add(b, b, a, w);
  };
  switch (degree) {
    case 1:
      add(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0);
      break;
    case 2:
      add_sym3(0.0, 0.5, 1.0 / 3.0);
      break;
    case 3:
      add(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, -27.0 / 48.0);
      add_sym3(0.6, 0.2, 25.0 / 48.0);
      break;
    case 5: {
      const double s = std::sqrt(15.0);
      add(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0);
      const double a1 = (6.0 - s) / 21.0;       // 0.0597158717...
      add_sym3(1.0 - 2.0 * a1, a1, (155.0 - s) / 1200.0);
      const double a2 = (6.0 + s) / 21.0;       // 0.4701420641...
      add_sym3(1.0 - 2.0 * a2, a2, (155.0 + s) / 1200.0);
      break;
    }
    default:
      throw std::invalid_argument("unsupported quadrature degree " +
                                  std::to_string(degree));
  }
  return rule;
}

}  // namespace

const QuadratureRule& quad_points(int degree) {
  static const QuadratureRule deg1 = make_rule(1);
  static const QuadratureRule deg2 = make_rule(2);
  static const QuadratureRule deg3 = make_rule(3);
  static const QuadratureRule deg5 = make_rule(5);
  switch (degree) {
    case 1: return deg1;
    case 2: return deg2;
    case 3: return deg3;
    case 5: return deg5;
    default:
      throw std::invalid_argument("unsupported quadrature degree " +
                                  std::to_string(degree));
  }
}

const EdgeQuadrature& edge_quadrature() {
  static const EdgeQuadrature q = [] {
    EdgeQuadrature eq;
    const double s = std::sqrt(3.0 / 5.0);
    eq.t = {0.5 * (1.0 - s), 0.5, 0.5 * (1.0 + s)};
    eq.w = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    return eq;
  }();
  return q;
}

ElementBasis::ElementBasis(const Mesh& mesh, int triangle) : tri_(triangle) {
  v_ = mesh.triangle_vertices(triangle);
  area_ = mesh.tri_area[triangle];
  for (int e = 0; e < 3; ++e) {
    sigma_[e] = mesh.sign_of(triangle, e);
    global_edge_[e] = mesh.edge_of(triangle, e);
    edge_len_[e] = (v_[(e + 2) % 3] - v_[(e + 1) % 3]).norm();
  }
  // grad lambda_i = (rotated opposite edge) / (2|K|); edge i runs from
  // vertex i+1 to vertex i+2 in CCW order.
  for (int i = 0; i < 3; ++i) {
    const Vec2 d = v_[(i + 2) % 3] - v_[(i + 1) % 3];
    grad_lambda_[i] = Vec2(-d.y(), d.x()) / (2.0 * area_);
  }
}

std::array<double, 3> ElementBasis::barycentric(const Vec2& x) const {
  std::array<double, 3> lambda;
  for (int i = 0; i < 3; ++i)
    lambda[i] = 1.0 / 3.0 + grad_lambda_[i].dot(x - (v_[0] + v_[1] + v_[2]) / 3.0);
  return lambda;
}

Vec2 ElementBasis::point(const std::array<double, 3>& lambda) const {
  return lambda[0] * v_[0] + lambda[1] * v_[1] + lambda[2] * v_[2];
}

double ElementBasis::bubble(const Vec2& x) const {
  const auto l = barycentric(x);
  return l[0] * l[1] * l[2];
}

Vec2 ElementBasis::bubble_grad(const Vec2& x) const {
  const auto l = barycentric(x);
  return l[1] * l[2] * grad_lambda_[0] + l[0] * l[2] * grad_lambda_[1] +
         l[0] * l[1] * grad_lambda_[2];
}

}  // namespace dafo
