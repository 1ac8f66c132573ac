#ifndef DAFO_CONDENSE_HPP
#define DAFO_CONDENSE_HPP

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "dafo/constitutive.hpp"
#include "dafo/elements.hpp"
#include "dafo/mesh.hpp"

namespace dafo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// Static-condensation strategy for the element-local unknowns.
enum class Variant {
  FluxOnly,    ///< eliminate the flux triple; keep (p_K, mu_e) globally
  ClosedForm,  ///< eliminate flux and pressure via C_K^{-1}; keep mu_e
  Coupled,     ///< eliminate (flux, pressure) through one 4x4 system; keep mu_e
};

const char* variant_name(Variant v);

/// Controls for the damped Newton iterations (local and global).
struct NewtonConfig {
  double abs_tol = 1e-12;
  double rel_tol = 0.0;  ///< optional: converged when r <= rel_tol * r_initial
  int max_iter = 25;
  double backtrack_factor = 0.5;
  double min_step = 9.5367431640625e-7;  // 2^-20
};

/// Flux triple and element pressure returned by the eliminating variants.
struct LocalSolution {
  Vec3 u = Vec3::Zero();
  double p = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// Derivatives of the local solve maps at a converged state.
struct Sensitivities {
  Mat3 du_dmu = Mat3::Zero();   ///< d u_{K,e} / d mu_f
  Vec3 du_dp = Vec3::Zero();    ///< d u_{K,e} / d p_K (FluxOnly)
  Vec3 dp_dmu = Vec3::Zero();   ///< d p_K / d mu_f (eliminating variants)
};

/// Element-local nonlinear algebra: residuals F_{K,e} and F_K, the three
/// elimination solves, their Jacobians and the sensitivity blocks. Flux
/// dofs follow the outward-normal convention of the broken RT0 basis.
///
/// All quadrature of the nonlinear form a_K uses the rule passed at
/// construction; every consumer of one mesh must share that rule or the
/// cross-variant identities fail.
class LocalElement {
public:
  LocalElement(const Mesh& mesh, int triangle, const Coefficients& coeffs,
               const QuadratureRule& rule, const LawConfig& law = {});

  const ElementBasis& basis() const { return basis_; }
  const CellLaw& cell_law() const { return cell_law_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const LawConfig& law() const { return law_; }

  /// a_K components f_{K,e}(u) = int_K G(u_K) . w_{K,e} dx by quadrature.
  Vec3 a_form(const Vec3& u) const;

  /// Same components against an arbitrary vector field:
  /// int_K G(w(x)) . w_{K,e} dx, evaluated with the element's rule.
  Vec3 a_form_field(const std::function<Vec2(const Vec2&)>& w) const;

  /// Visit the physical quadrature points: fn(x, weight, w_out) where
  /// weight includes |K| and w_out holds the three outward RT0 values.
  template <class Fn>
  void for_each_quad_point(Fn&& fn) const {
    for (const auto& q : quad_) fn(q.x, q.w, q.w_out);
  }

  /// F_{K,e} = a_K(u_K, w_{K,e}) - p_K + mu_e.
  Vec3 flux_residual(const Vec3& u, double p, const Vec3& mu) const;

  /// D of the flux residual in u; symmetric positive definite.
  Mat3 flux_jacobian(const Vec3& u) const;

  /// Conservation residual F_K = C_K(p) + sum_e u_e - int_K f dx.
  double conservation_residual(const Vec3& u, double p, double f_int) const;

  /// Pressure eliminated through C_K: p(u) = C_K^{-1}(int_K f - sum u_e).
  double pressure_from_flux(const Vec3& u, double f_int) const;

  /// Jacobian of the closed-form residual:
  /// D F_bar = D F_tilde - (dp/du) * ones * ones^T.
  Mat3 closed_form_jacobian(const Vec3& u, double f_int) const;

  /// 4x4 Jacobian [[D F_tilde, -1], [1^T, C_K']] of the coupled system;
  /// C_K' uses the eps_p floor.
  Mat4 coupled_jacobian(const Vec3& u, double p) const;

  /// Solve F_{K,e}(u; p, mu) = 0 for the flux triple.
  Vec3 solve_flux_only(double p, const Vec3& mu, const NewtonConfig& cfg,
                       const Vec3& u0 = Vec3::Zero()) const;

  /// Solve F_bar(u) = 0 with the pressure eliminated in closed form.
  LocalSolution solve_closed_form(const Vec3& mu, double f_int,
                                  const NewtonConfig& cfg,
                                  const Vec3& u0 = Vec3::Zero()) const;

  /// Solve the coupled 4x4 system for (u, p) simultaneously.
  LocalSolution solve_coupled(const Vec3& mu, double f_int,
                              const NewtonConfig& cfg,
                              const Vec3& u0 = Vec3::Zero(),
                              double p0 = 0.0) const;

  /// Sensitivity blocks at a converged local state (for the assembled
  /// global Jacobian and its finite-difference oracle).
  Sensitivities sensitivities(Variant variant, const Vec3& u, double p,
                              double f_int = 0.0) const;

private:
  struct QuadData {
    Vec2 x;
    double w;  // physical weight (includes |K|)
    std::array<Vec2, 3> w_out;
  };

  ElementBasis basis_;
  CellLaw cell_law_;
  double alpha_;
  double beta_;
  LawConfig law_;
  std::vector<QuadData> quad_;
};

}  // namespace dafo

#endif
