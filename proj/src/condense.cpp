#include "dafo/condense.hpp"

#include <cmath>
#include <string>

#include "dafo/errors.hpp"

namespace dafo {

namespace {

// A stalled iteration (backtracking finds no decrease at all) sits at the
// round-off floor of the residual. Accept the stall when the residual is
// within a small factor of the tolerance or below the evaluation-floor
// estimate the caller supplies (8 eps times the residual's term scale).
constexpr double kStallAccept = 32.0;
constexpr double kFloorEps = 8.0 * 2.220446049250313e-16;

/// Damped Newton with Armijo backtracking on the euclidean residual norm.
/// Residual, Jacobian and a residual-magnitude estimate are supplied as
/// callables; throws NewtonDiverged when the iteration cap is reached or
/// the iteration stalls far from both tolerance and round-off floor.
template <int N, class ResidualFn, class JacobianFn, class ScaleFn>
Eigen::Matrix<double, N, 1> newton_solve_small(
    Eigen::Matrix<double, N, 1> x, const ResidualFn& residual,
    const JacobianFn& jacobian, const ScaleFn& scale,
    const NewtonConfig& cfg, const std::string& what, int* iterations_out,
    double* residual_out) {
  using VecN = Eigen::Matrix<double, N, 1>;
  VecN r = residual(x);
  double rn = r.norm();
  const double r0 = rn;
  const double tol = std::max(cfg.abs_tol, cfg.rel_tol * r0);

  for (int it = 0; it <= cfg.max_iter; ++it) {
    if (rn <= tol) {
      if (iterations_out) *iterations_out = it;
      if (residual_out) *residual_out = rn;
      return x;
    }
    if (it == cfg.max_iter) break;

    const Eigen::Matrix<double, N, N> J = jacobian(x);
    Eigen::PartialPivLU<Eigen::Matrix<double, N, N>> lu(J);
    const VecN dir = lu.solve(-r);
    if (!dir.allFinite())
      throw SingularMatrixError(what + ": singular local Jacobian");

    // Backtracking: accept the first step with sufficient decrease, else
    // keep the best trial seen so the iteration still makes progress.
    double lambda = 1.0;
    VecN best_x = x + dir;
    VecN best_r = residual(best_x);
    double best_rn = best_r.norm();
    while (best_rn > (1.0 - 1e-4 * lambda) * rn && lambda >= cfg.min_step) {
      lambda *= cfg.backtrack_factor;
      const VecN trial_x = x + lambda * dir;
      const VecN trial_r = residual(trial_x);
      const double trial_rn = trial_r.norm();
      if (trial_rn < best_rn) {
        best_x = trial_x;
        best_r = trial_r;
        best_rn = trial_rn;
      }
    }
    if (best_rn >= rn) {  // no descent direction left: round-off floor
      if (rn <= std::max(kStallAccept * tol, kFloorEps * scale(x))) {
        if (iterations_out) *iterations_out = it;
        if (residual_out) *residual_out = rn;
        return x;
      }
      throw NewtonDiverged(
          what + ": stalled at residual " + std::to_string(rn), rn, it);
    }
    x = best_x;
    r = best_r;
    rn = best_rn;
  }
  throw NewtonDiverged(what + ": no convergence in " +
                           std::to_string(cfg.max_iter) +
                           " iterations (residual " + std::to_string(rn) + ")",
                       rn, cfg.max_iter);
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::FluxOnly: return "flux-only";
    case Variant::ClosedForm: return "closed-form";
    case Variant::Coupled: return "coupled";
  }
  return "?";
}

LocalElement::LocalElement(const Mesh& mesh, int triangle,
                           const Coefficients& coeffs,
                           const QuadratureRule& rule, const LawConfig& law)
    : basis_(mesh, triangle),
      cell_law_(coeffs.phigamma_integral(triangle, mesh.tri_area[triangle]),
                coeffs.dt),
      alpha_(coeffs.alpha[triangle]),
      beta_(coeffs.beta[triangle]),
      law_(law) {
  quad_.reserve(rule.nodes.size());
  for (const auto& node : rule.nodes) {
    QuadData q;
    q.x = basis_.point(node.lambda);
    q.w = node.weight * basis_.area();
    for (int e = 0; e < 3; ++e) q.w_out[e] = basis_.rt0_outward(e, q.x);
    quad_.push_back(q);
  }
}

Vec3 LocalElement::a_form(const Vec3& u) const {
  Vec3 f = Vec3::Zero();
  for (const auto& q : quad_) {
    const Vec2 uq = u[0] * q.w_out[0] + u[1] * q.w_out[1] + u[2] * q.w_out[2];
    const Vec2 g = g_eval(uq, alpha_, beta_);
    for (int e = 0; e < 3; ++e) f[e] += q.w * g.dot(q.w_out[e]);
  }
  return f;
}

Vec3 LocalElement::a_form_field(
    const std::function<Vec2(const Vec2&)>& w) const {
  Vec3 f = Vec3::Zero();
  for (const auto& q : quad_) {
    const Vec2 g = g_eval(w(q.x), alpha_, beta_);
    for (int e = 0; e < 3; ++e) f[e] += q.w * g.dot(q.w_out[e]);
  }
  return f;
}

Vec3 LocalElement::flux_residual(const Vec3& u, double p, const Vec3& mu) const {
  return a_form(u) - Vec3::Constant(p) + mu;
}

Mat3 LocalElement::flux_jacobian(const Vec3& u) const {
  Mat3 J = Mat3::Zero();
  for (const auto& q : quad_) {
    const Vec2 uq = u[0] * q.w_out[0] + u[1] * q.w_out[1] + u[2] * q.w_out[2];
    const Mat2 dg = g_jacobian(uq, alpha_, beta_);
    for (int e = 0; e < 3; ++e) {
      const Vec2 dg_we = dg * q.w_out[e];
      J(e, e) += q.w * dg_we.dot(q.w_out[e]);
      for (int f = e + 1; f < 3; ++f) {
        const double v = q.w * dg_we.dot(q.w_out[f]);
        J(e, f) += v;
        J(f, e) += v;  // DG is symmetric, so D F_tilde is
      }
    }
  }
  return J;
}

double LocalElement::conservation_residual(const Vec3& u, double p,
                                           double f_int) const {
  return cell_law_.eval(p) + u.sum() - f_int;
}

double LocalElement::pressure_from_flux(const Vec3& u, double f_int) const {
  return cell_law_.inverse(f_int - u.sum());
}

Mat3 LocalElement::closed_form_jacobian(const Vec3& u, double f_int) const {
  const double p = pressure_from_flux(u, f_int);
  const double dpdu = cell_law_.dpk_du(p);
  return flux_jacobian(u) - dpdu * Mat3::Ones();
}

Mat4 LocalElement::coupled_jacobian(const Vec3& u, double p) const {
  Mat4 J;
  J.topLeftCorner<3, 3>() = flux_jacobian(u);
  J.topRightCorner<3, 1>() = Vec3::Constant(-1.0);
  J.bottomLeftCorner<1, 3>() = Eigen::RowVector3d::Ones();
  J(3, 3) = cell_law_.deriv(p, law_.eps_p);
  return J;
}

namespace {

// Magnitude of the terms entering the flux rows: a_K components plus the
// pressure and multiplier levels.
double flux_row_scale(double alpha, double beta, const Vec3& u, double p,
                      const Vec3& mu) {
  const double m = 3.0 * u.cwiseAbs().maxCoeff();
  return (alpha + beta * m) * m + std::abs(p) +
         mu.cwiseAbs().maxCoeff();
}

}  // namespace

Vec3 LocalElement::solve_flux_only(double p, const Vec3& mu,
                                   const NewtonConfig& cfg,
                                   const Vec3& u0) const {
  const std::string what =
      "flux solve (element " + std::to_string(basis_.triangle()) + ")";
  return newton_solve_small<3>(
      u0, [&](const Vec3& u) { return flux_residual(u, p, mu); },
      [&](const Vec3& u) { return flux_jacobian(u); },
      [&](const Vec3& u) { return flux_row_scale(alpha_, beta_, u, p, mu); },
      cfg, what, nullptr, nullptr);
}

LocalSolution LocalElement::solve_closed_form(const Vec3& mu, double f_int,
                                              const NewtonConfig& cfg,
                                              const Vec3& u0) const {
  const std::string what =
      "closed-form solve (element " + std::to_string(basis_.triangle()) + ")";
  LocalSolution sol;
  sol.u = newton_solve_small<3>(
      u0,
      [&](const Vec3& u) {
        return flux_residual(u, pressure_from_flux(u, f_int), mu);
      },
      [&](const Vec3& u) { return closed_form_jacobian(u, f_int); },
      [&](const Vec3& u) {
        // the eliminated pressure amplifies the rounding of f - sum(u)
        const double p = pressure_from_flux(u, f_int);
        const double amplified =
            std::abs(cell_law_.dpk_du(p)) *
            std::max(3.0 * u.cwiseAbs().maxCoeff(), std::abs(f_int));
        return flux_row_scale(alpha_, beta_, u, p, mu) + amplified;
      },
      cfg, what, &sol.iterations, &sol.residual);
  sol.p = pressure_from_flux(sol.u, f_int);
  return sol;
}

LocalSolution LocalElement::solve_coupled(const Vec3& mu, double f_int,
                                          const NewtonConfig& cfg,
                                          const Vec3& u0, double p0) const {
  const std::string what =
      "coupled solve (element " + std::to_string(basis_.triangle()) + ")";
  Vec4 z0;
  z0 << u0, p0;
  LocalSolution sol;
  const Vec4 z = newton_solve_small<4>(
      z0,
      [&](const Vec4& z) {
        Vec4 r;
        r.head<3>() = flux_residual(z.head<3>(), z[3], mu);
        r[3] = conservation_residual(z.head<3>(), z[3], f_int);
        return r;
      },
      [&](const Vec4& z) { return coupled_jacobian(z.head<3>(), z[3]); },
      [&](const Vec4& z) {
        return flux_row_scale(alpha_, beta_, z.head<3>(), z[3], mu) +
               std::abs(cell_law_.eval(z[3])) + std::abs(f_int) +
               3.0 * z.head<3>().cwiseAbs().maxCoeff();
      },
      cfg, what, &sol.iterations, &sol.residual);
  sol.u = z.head<3>();
  sol.p = z[3];
  return sol;
}

Sensitivities LocalElement::sensitivities(Variant variant, const Vec3& u,
                                          double p, double f_int) const {
  Sensitivities s;
  switch (variant) {
    case Variant::FluxOnly: {
      // dF_{K,e}/dp = -1 and dF_{K,e}/dmu_f = delta_{ef}, so the implicit
      // function theorem gives du/dp = DFtilde^{-1} 1, du/dmu = -DFtilde^{-1}.
      Eigen::FullPivLU<Mat3> lu(flux_jacobian(u));
      if (!lu.isInvertible())
        throw SingularMatrixError("singular flux Jacobian in element " +
                                  std::to_string(basis_.triangle()));
      s.du_dp = lu.solve(Vec3::Ones());
      s.du_dmu = -lu.solve(Mat3::Identity());
      break;
    }
    case Variant::ClosedForm: {
      Eigen::FullPivLU<Mat3> lu(closed_form_jacobian(u, f_int));
      if (!lu.isInvertible())
        throw SingularMatrixError("singular condensed Jacobian in element " +
                                  std::to_string(basis_.triangle()));
      s.du_dmu = -lu.solve(Mat3::Identity());
      s.dp_dmu =
          cell_law_.dpk_du(pressure_from_flux(u, f_int)) *
          (Eigen::RowVector3d::Ones() * s.du_dmu).transpose();
      break;
    }
    case Variant::Coupled: {
      // d(u,p)/dmu_f = -DF_K^{-1} (delta_f; 0).
      Eigen::FullPivLU<Mat4> lu(coupled_jacobian(u, p));
      if (!lu.isInvertible())
        throw SingularMatrixError("singular coupled Jacobian in element " +
                                  std::to_string(basis_.triangle()));
      Eigen::Matrix<double, 4, 3> rhs = Eigen::Matrix<double, 4, 3>::Zero();
      rhs.topLeftCorner<3, 3>() = Mat3::Identity();
      const Eigen::Matrix<double, 4, 3> block = -lu.solve(rhs);
      s.du_dmu = block.topLeftCorner<3, 3>();
      s.dp_dmu = block.bottomRows<1>().transpose();
      break;
    }
  }
  return s;
}

}  // namespace dafo
