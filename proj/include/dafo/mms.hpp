#ifndef DAFO_MMS_HPP
#define DAFO_MMS_HPP

#include <string>
#include <vector>

#include "dafo/condense.hpp"
#include "dafo/constitutive.hpp"
#include "dafo/globalsys.hpp"

namespace dafo {

/// Manufactured stationary problem on the unit square with spatially
/// constant coefficients: the smooth positive exact pressure
///   p*(x, y) = 1 + 3/10 sin(pi x) sin(pi y) + x/5,
/// exact flux u* = -G^{-1}(grad p*), and matching source
/// f* = R(p*) + div u* derived with the chain rule.
struct ManufacturedCase {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 1.0;
  double porosity = 0.5;
  double dt = 1.0;

  double pressure(const Vec2& x) const;
  Vec2 grad_pressure(const Vec2& x) const;
  Mat2 hess_pressure(const Vec2& x) const;
  Vec2 exact_flux(const Vec2& x) const;
  double source(const Vec2& x) const;

  Coefficients coefficients(int num_elements) const;
};

/// One refinement level of the convergence study.
struct MmsRow {
  int n = 0;
  double err_p = 0.0;       ///< L2 error of p_h against p*
  double err_p_proj = 0.0;  ///< L2 distance of p_h to the element means of p*
  double err_u = 0.0;       ///< L2 error of u_h against u*
  double err_flux_max = 0.0;  ///< max edge-mean normal flux error
  int newton_iterations = 0;
  double element_balance = 0.0;  ///< max |F_K| at convergence
  double global_balance = 0.0;   ///< global conservation defect
};

struct MmsTable {
  std::vector<MmsRow> rows;

  /// log2(E_{n} / E_{2n}) between consecutive rows for the given column.
  std::vector<double> orders(double MmsRow::*column) const;
  /// Least-squares slope of log E against log h for the given column.
  double fitted_order(double MmsRow::*column) const;

  std::string to_text() const;
  std::string to_csv() const;
};

/// Solve the manufactured problem on structured meshes n, 2n, ..., one
/// per level, and tabulate the errors.
MmsTable mms_study(int levels, const ManufacturedCase& mc, Variant variant,
                   const SolverOptions& opts = {}, int base_n = 4);

}  // namespace dafo

#endif
