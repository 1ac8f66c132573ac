#ifndef DAFO_INTEGRATE_HPP
#define DAFO_INTEGRATE_HPP

#include <functional>
#include <vector>

#include "dafo/elements.hpp"
#include "dafo/mesh.hpp"

namespace dafo {

using ScalarField = std::function<double(const Vec2&)>;

/// int_K f dx for every element, by the given triangle rule.
std::vector<double> element_integrals(const Mesh& mesh,
                                      const QuadratureRule& rule,
                                      const ScalarField& f);

/// Element means (integral / area).
std::vector<double> element_means(const Mesh& mesh, const QuadratureRule& rule,
                                  const ScalarField& f);

/// Edge mean (1/|e|) int_e f dsigma by 3-point Gauss.
double edge_mean(const Mesh& mesh, int e, const ScalarField& f);

/// Edge means of the Dirichlet datum on boundary edges (zero elsewhere),
/// indexed by global edge id.
std::vector<double> dirichlet_edge_means(const Mesh& mesh,
                                         const ScalarField& g);

}  // namespace dafo

#endif
