#ifndef DAFO_ELEMENTS_HPP
#define DAFO_ELEMENTS_HPP

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "dafo/mesh.hpp"

namespace dafo {

/// Symmetric quadrature rule on the reference triangle, stored as
/// barycentric nodes with weights that sum to one. The integral over a
/// physical triangle K is |K| * sum_q w_q f(x_q).
struct QuadratureRule {
  struct Node {
    std::array<double, 3> lambda;
    double weight;
  };
  std::vector<Node> nodes;
  int degree = 0;
};

/// Rule exact for polynomials up to `degree` in {1, 2, 3, 5}.
const QuadratureRule& quad_points(int degree);

/// Gauss-Legendre nodes/weights on [0,1] (3 points, exact to degree 5),
/// used for edge means of boundary data.
struct EdgeQuadrature {
  std::array<double, 3> t;
  std::array<double, 3> w;
};
const EdgeQuadrature& edge_quadrature();

/// Per-triangle evaluation of the lowest-order Raviart-Thomas vector basis,
/// the Crouzeix-Raviart and cubic bubble scalar bases, and the barycentric
/// frame. Local edge e is opposite local vertex e, so the barycentric
/// coordinate vanishing on edge e is lambda_e.
class ElementBasis {
public:
  ElementBasis(const Mesh& mesh, int triangle);

  int triangle() const { return tri_; }
  double area() const { return area_; }
  const std::array<Vec2, 3>& vertex() const { return v_; }
  double sigma(int e) const { return sigma_[e]; }
  double edge_length(int e) const { return edge_len_[e]; }
  int global_edge(int e) const { return global_edge_[e]; }

  std::array<double, 3> barycentric(const Vec2& x) const;
  Vec2 point(const std::array<double, 3>& lambda) const;
  const Vec2& grad_lambda(int i) const { return grad_lambda_[i]; }

  /// Broken RT0 basis w_{K,e} with outward edge dofs:
  /// integral over edge f of w_{K,e} . n_K equals delta_{e,f}.
  Vec2 rt0_outward(int e, const Vec2& x) const {
    return sigma_[e] > 0 ? rt0_global(e, x) : Vec2(-rt0_global(e, x));
  }

  /// Conforming RT0 basis w_e restricted to K (dofs against the global
  /// edge normal n_e): sigma_{K,e} (x - a_e) / (2|K|).
  Vec2 rt0_global(int e, const Vec2& x) const {
    return sigma_[e] * (x - v_[e]) / (2.0 * area_);
  }

  /// Constant divergence of each outward RT0 basis function.
  double rt0_div() const { return 1.0 / area_; }

  /// Crouzeix-Raviart function of local edge e: 1 - 2 lambda_e.
  double cr(int e, const Vec2& x) const { return 1.0 - 2.0 * barycentric(x)[e]; }
  Vec2 cr_grad(int e) const { return -2.0 * grad_lambda_[e]; }

  /// Cubic bubble lambda_1 lambda_2 lambda_3 (element mean 1/60).
  double bubble(const Vec2& x) const;
  Vec2 bubble_grad(const Vec2& x) const;

private:
  int tri_;
  std::array<Vec2, 3> v_;
  double area_;
  std::array<double, 3> sigma_;
  std::array<double, 3> edge_len_;
  std::array<int, 3> global_edge_;
  std::array<Vec2, 3> grad_lambda_;
};

}  // namespace dafo

#endif
