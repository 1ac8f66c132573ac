#ifndef DAFO_CONSTITUTIVE_HPP
#define DAFO_CONSTITUTIVE_HPP

#include <vector>

#include <Eigen/Dense>

#include "dafo/mesh.hpp"

namespace dafo {

using Mat2 = Eigen::Matrix2d;

/// Numerical guards for the constitutive maps.
struct LawConfig {
  /// Switch to the rationalized form of G^{-1} when 4 beta |v| / alpha^2
  /// falls below this threshold. The primary formula loses roughly
  /// 2 eps / ratio relative accuracy, so the switch must happen well
  /// before the 1e-12 round-trip contract is at risk.
  double tau_g = 1e-2;
  /// Floor for sqrt(|p|) in derivative denominators near p = 0.
  double eps_p = 1e-10;
};

/// Raw per-element physical data of the gas-flow model. Scalars may be
/// broadcast to all elements via the one-element vector form.
struct PhysicalParams {
  std::vector<double> porosity;      // phi
  std::vector<double> permeability;  // k (m^2)
  std::vector<double> forchheimer;   // beta_Fo
  std::vector<double> viscosity;     // mu
  std::vector<double> molar_weight;  // W
  std::vector<double> temperature;   // Theta
  double gas_constant = 8.31446261815324;  // R0
};

/// Derived piecewise-constant coefficients of the transformed system
/// p = |P| P, u = rho v:
///   gamma = W / (R0 Theta), alpha = 2 mu / (gamma k), beta = 2 beta_Fo / gamma.
struct Coefficients {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> gamma;
  std::vector<double> porosity;
  double dt = 1.0;

  double alpha_min = 0.0;
  double beta_min = 0.0;
  double gamma_min = 0.0;

  /// Broadcast constructor used by tests and manufactured problems.
  static Coefficients constant(int num_elements, double alpha, double beta,
                               double gamma, double porosity, double dt);

  /// Storage coefficient integral of element K: int_K phi gamma dx.
  double phigamma_integral(int k, double area) const {
    return porosity[k] * gamma[k] * area;
  }
};

/// Apply the coefficient formulas per element; every raw parameter must be
/// strictly positive except the Forchheimer coefficient, which may be zero
/// (Darcy limit). Inputs of length 1 broadcast over the mesh.
Coefficients derive_coefficients(const PhysicalParams& params,
                                 int num_elements, double dt);

/// G(u) = (alpha + beta |u|) u.
Vec2 g_eval(const Vec2& u, double alpha, double beta);

/// Exact inverse of G. For 4 beta |v| / alpha^2 < tau_g the rationalized
/// form 2 v / (alpha + sqrt(alpha^2 + 4 beta |v|)) is used.
Vec2 g_inverse(const Vec2& v, double alpha, double beta, double tau_g = 1e-2);

/// Derivative of G: (alpha + beta |u|) Id + beta u u^T / |u|; alpha * Id
/// in the limit u = 0. Symmetric positive definite for all u.
Mat2 g_jacobian(const Vec2& u, double alpha, double beta);

/// R(p) = (phi / dt) gamma p / sqrt(|p|), odd in p with R(0) = 0.
double r_eval(double p, double phi, double gamma, double dt);

/// Elementwise storage map C_K and its inverse and derivatives. Captures
/// int_K phi gamma dx of one element, assumed positive.
class CellLaw {
public:
  CellLaw(double phigamma_integral, double dt);

  /// C_K(p) = int_K phi gamma dx / dt * p / sqrt(|p|).
  double eval(double p) const;
  /// p with C_K(p) = rhs:  p = |P| P,  P = dt / int_K phi gamma dx * rhs.
  double inverse(double rhs) const;
  /// C_K'(p) with sqrt(|p|) floored at sqrt(eps_p).
  double deriv(double p, double eps_p) const;
  /// Closed-form d p_K / d u_{K,e} = -2 sqrt(|p|) dt / int_K phi gamma dx,
  /// continuous through p = 0.
  double dpk_du(double p) const;

  double phigamma_integral() const { return phigamma_; }
  double dt() const { return dt_; }

private:
  double phigamma_;
  double dt_;
};

/// Element integral of the augmented source f = f_tilde + R(p_prev)-term:
/// returns int_K f_tilde dx + C_K(p_prev).
double augmented_source(const CellLaw& law, double p_prev,
                        double ftilde_integral);

}  // namespace dafo

#endif
