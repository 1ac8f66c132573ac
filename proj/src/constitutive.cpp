#include "dafo/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dafo {

namespace {

// Broadcast a length-1 or length-n parameter vector to element k.
double at(const std::vector<double>& v, int k, const char* name) {
  if (v.empty())
    throw std::invalid_argument(std::string("parameter '") + name +
                                "' is empty");
  return v.size() == 1 ? v[0] : v.at(k);
}

void check_size(const std::vector<double>& v, int n, const char* name) {
  if (v.size() != 1 && static_cast<int>(v.size()) != n)
    throw std::invalid_argument(std::string("parameter '") + name + "' has " +
                                std::to_string(v.size()) +
                                " entries, expected 1 or " + std::to_string(n));
}

}  // namespace

Coefficients Coefficients::constant(int num_elements, double alpha,
                                    double beta, double gamma, double porosity,
                                    double dt) {
  Coefficients c;
  c.alpha.assign(num_elements, alpha);
  c.beta.assign(num_elements, beta);
  c.gamma.assign(num_elements, gamma);
  c.porosity.assign(num_elements, porosity);
  c.dt = dt;
  c.alpha_min = alpha;
  c.beta_min = beta;
  c.gamma_min = gamma;
  return c;
}

Coefficients derive_coefficients(const PhysicalParams& params,
                                 int num_elements, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(params.gas_constant > 0.0))
    throw std::invalid_argument("gas constant must be positive");
  check_size(params.porosity, num_elements, "phi");
  check_size(params.permeability, num_elements, "k");
  check_size(params.forchheimer, num_elements, "beta_fo");
  check_size(params.viscosity, num_elements, "mu");
  check_size(params.molar_weight, num_elements, "W");
  check_size(params.temperature, num_elements, "Theta");

  Coefficients c;
  c.alpha.resize(num_elements);
  c.beta.resize(num_elements);
  c.gamma.resize(num_elements);
  c.porosity.resize(num_elements);
  c.dt = dt;
  for (int k = 0; k < num_elements; ++k) {
    const double phi = at(params.porosity, k, "phi");
    const double perm = at(params.permeability, k, "k");
    const double bfo = at(params.forchheimer, k, "beta_fo");
    const double mu = at(params.viscosity, k, "mu");
    const double W = at(params.molar_weight, k, "W");
    const double theta = at(params.temperature, k, "Theta");
    if (!(phi > 0.0 && perm > 0.0 && mu > 0.0 && W > 0.0 && theta > 0.0))
      throw std::invalid_argument(
          "physical parameters must be strictly positive (element " +
          std::to_string(k) + ")");
    if (bfo < 0.0)
      throw std::invalid_argument("Forchheimer coefficient must be >= 0");

    const double gamma = W / (params.gas_constant * theta);
    c.gamma[k] = gamma;
    c.alpha[k] = 2.0 * mu / (gamma * perm);
    c.beta[k] = 2.0 * bfo / gamma;
    c.porosity[k] = phi;
  }
  c.alpha_min = *std::min_element(c.alpha.begin(), c.alpha.end());
  c.beta_min = *std::min_element(c.beta.begin(), c.beta.end());
  c.gamma_min = *std::min_element(c.gamma.begin(), c.gamma.end());
  return c;
}

Vec2 g_eval(const Vec2& u, double alpha, double beta) {
  return (alpha + beta * u.norm()) * u;
}

Vec2 g_inverse(const Vec2& v, double alpha, double beta, double tau_g) {
  const double m = v.norm();
  if (m == 0.0) return Vec2::Zero();
  const double disc = alpha * alpha + 4.0 * beta * m;
  if (4.0 * beta * m < tau_g * alpha * alpha)
    return v * (2.0 / (alpha + std::sqrt(disc)));
  return v * ((std::sqrt(disc) - alpha) / (2.0 * beta * m));
}

Mat2 g_jacobian(const Vec2& u, double alpha, double beta) {
  const double m = u.norm();
  if (m == 0.0) return alpha * Mat2::Identity();
  return (alpha + beta * m) * Mat2::Identity() +
         (beta / m) * (u * u.transpose());
}

double r_eval(double p, double phi, double gamma, double dt) {
  if (p == 0.0) return 0.0;
  // p / sqrt(|p|) = sign(p) sqrt(|p|)
  return phi / dt * gamma * std::copysign(std::sqrt(std::abs(p)), p);
}

CellLaw::CellLaw(double phigamma_integral, double dt)
    : phigamma_(phigamma_integral), dt_(dt) {
  if (!(phigamma_ > 0.0))
    throw std::invalid_argument(
        "storage coefficient integral must be positive");
  if (!(dt_ > 0.0)) throw std::invalid_argument("time step must be positive");
}

double CellLaw::eval(double p) const {
  if (p == 0.0) return 0.0;
  return phigamma_ / dt_ * std::copysign(std::sqrt(std::abs(p)), p);
}

double CellLaw::inverse(double rhs) const {
  const double P = dt_ / phigamma_ * rhs;
  return std::abs(P) * P;
}

double CellLaw::deriv(double p, double eps_p) const {
  const double root = std::max(std::sqrt(std::abs(p)), std::sqrt(eps_p));
  return phigamma_ / (2.0 * dt_ * root);
}

double CellLaw::dpk_du(double p) const {
  return -2.0 * std::sqrt(std::abs(p)) * dt_ / phigamma_;
}

double augmented_source(const CellLaw& law, double p_prev,
                        double ftilde_integral) {
  return ftilde_integral + law.eval(p_prev);
}

}  // namespace dafo
