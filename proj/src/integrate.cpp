#include "dafo/integrate.hpp"

namespace dafo {

std::vector<double> element_integrals(const Mesh& mesh,
                                      const QuadratureRule& rule,
                                      const ScalarField& f) {
  std::vector<double> out(mesh.num_triangles());
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const ElementBasis basis(mesh, k);
    double sum = 0.0;
    for (const auto& node : rule.nodes)
      sum += node.weight * f(basis.point(node.lambda));
    out[k] = sum * basis.area();
  }
  return out;
}

std::vector<double> element_means(const Mesh& mesh, const QuadratureRule& rule,
                                  const ScalarField& f) {
  std::vector<double> out = element_integrals(mesh, rule, f);
  for (int k = 0; k < mesh.num_triangles(); ++k) out[k] /= mesh.tri_area[k];
  return out;
}

double edge_mean(const Mesh& mesh, int e, const ScalarField& f) {
  const EdgeQuadrature& q = edge_quadrature();
  const Vec2 a = mesh.vertices[mesh.edges[e][0]];
  const Vec2 b = mesh.vertices[mesh.edges[e][1]];
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) sum += q.w[i] * f(a + q.t[i] * (b - a));
  return sum;
}

std::vector<double> dirichlet_edge_means(const Mesh& mesh,
                                         const ScalarField& g) {
  std::vector<double> out(mesh.num_edges(), 0.0);
  for (int e : mesh.boundary_edges) out[e] = edge_mean(mesh, e, g);
  return out;
}

}  // namespace dafo
