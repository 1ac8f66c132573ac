// Shared fixtures: manufactured stationary problems wired into Problem
// instances.

#ifndef DAFO_TEST_PROBLEMS_HPP
#define DAFO_TEST_PROBLEMS_HPP

#include "dafo/globalsys.hpp"
#include "dafo/integrate.hpp"
#include "dafo/mms.hpp"

namespace dafo::testing {

inline ManufacturedCase forchheimer_case() {
  ManufacturedCase mc;
  mc.alpha = 1.3;
  mc.beta = 0.8;
  mc.gamma = 1.1;
  mc.porosity = 0.4;
  mc.dt = 0.7;
  return mc;
}

inline ManufacturedCase darcy_case() {
  ManufacturedCase mc = forchheimer_case();
  mc.beta = 0.0;
  return mc;
}

inline Problem make_problem(const Mesh& mesh, const ManufacturedCase& mc) {
  std::vector<double> f_int = element_integrals(
      mesh, quad_points(5), [&](const Vec2& x) { return mc.source(x); });
  std::vector<double> g_mean = dirichlet_edge_means(
      mesh, [&](const Vec2& x) { return mc.pressure(x); });
  return Problem(mesh, mc.coefficients(mesh.num_triangles()),
                 std::move(f_int), std::move(g_mean));
}

}  // namespace dafo::testing

#endif
