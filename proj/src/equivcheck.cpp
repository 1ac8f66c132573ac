#include "dafo/equivcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dafo/errors.hpp"

namespace dafo {

namespace {

// Moment matrix of (cr0, cr1, cr2, bubble) against (three edge means,
// element mean). CR edge means are delta_{ef}, the bubble vanishes on the
// boundary and has element mean 1/60, CR element means are 1/3.
const Eigen::PartialPivLU<Mat4>& moment_lu() {
  static const Eigen::PartialPivLU<Mat4> lu = [] {
    Mat4 m;
    m << 1, 0, 0, 0,  //
        0, 1, 0, 0,   //
        0, 0, 1, 0,   //
        1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 60.0;
    if (std::abs(m.determinant()) < 1e-14)
      throw SingularMatrixError("singular moment matrix");
    return Eigen::PartialPivLU<Mat4>(m);
  }();
  return lu;
}

double field_scale(const HybridState& state) {
  double s = 0.0;
  for (double v : state.p) s = std::max(s, std::abs(v));
  for (double v : state.mu) s = std::max(s, std::abs(v));
  for (const auto& f : state.flux)
    for (double v : f) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace

double NonconformingField::value(const ElementBasis& basis,
                                 const Vec2& x) const {
  const auto& c = coeff[basis.triangle()];
  double v = c[3] * basis.bubble(x);
  for (int e = 0; e < 3; ++e) v += c[e] * basis.cr(e, x);
  return v;
}

Vec2 NonconformingField::gradient(const ElementBasis& basis,
                                  const Vec2& x) const {
  const auto& c = coeff[basis.triangle()];
  Vec2 g = c[3] * basis.bubble_grad(x);
  for (int e = 0; e < 3; ++e) g += c[e] * basis.cr_grad(e);
  return g;
}

NonconformingField sh_inverse(const Mesh& mesh, const std::vector<double>& p,
                              const std::vector<double>& mu) {
  NonconformingField field;
  field.coeff.resize(mesh.num_triangles());
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    Vec4 moments;
    for (int i = 0; i < 3; ++i) moments[i] = mu[mesh.edge_of(k, i)];
    moments[3] = p[k];
    const Vec4 c = moment_lu().solve(moments);
    field.coeff[k] = {c[0], c[1], c[2], c[3]};
  }
  return field;
}

std::pair<std::vector<double>, std::vector<double>> project_moments(
    const Mesh& mesh, const NonconformingField& field) {
  std::vector<double> p(mesh.num_triangles());
  std::vector<double> mu(mesh.num_edges(), 0.0);
  std::vector<int> hits(mesh.num_edges(), 0);
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const auto& c = field.coeff[k];
    p[k] = (c[0] + c[1] + c[2]) / 3.0 + c[3] / 60.0;
    for (int i = 0; i < 3; ++i) {
      const int e = mesh.edge_of(k, i);
      mu[e] += c[i];
      ++hits[e];
    }
  }
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (hits[e] > 1) mu[e] /= hits[e];
  return {std::move(p), std::move(mu)};
}

Vec3 nonlinear_projection(const LocalElement& elem,
                          const std::function<Vec2(const Vec2&)>& w,
                          const NewtonConfig& cfg) {
  const Vec3 rhs = elem.a_form_field(w);
  // Newton on a_K(z) = rhs; the linear case (beta = 0) converges in one step.
  Vec3 z = Vec3::Zero();
  Vec3 r = elem.a_form(z) - rhs;
  for (int it = 0; it < cfg.max_iter; ++it) {
    if (r.norm() <= cfg.abs_tol) return z;
    const Vec3 dz = elem.flux_jacobian(z).partialPivLu().solve(-r);
    double lambda = 1.0;
    Vec3 best = z + dz;
    Vec3 best_r = elem.a_form(best) - rhs;
    while (best_r.norm() > (1.0 - 1e-4 * lambda) * r.norm() &&
           lambda >= cfg.min_step) {
      lambda *= cfg.backtrack_factor;
      const Vec3 trial = z + lambda * dz;
      const Vec3 trial_r = elem.a_form(trial) - rhs;
      if (trial_r.norm() < best_r.norm()) {
        best = trial;
        best_r = trial_r;
      }
    }
    if (best_r.norm() >= r.norm()) break;  // round-off floor
    z = best;
    r = best_r;
  }
  if (r.norm() > 32.0 * cfg.abs_tol)
    throw NewtonDiverged("nonlinear projection did not converge (element " +
                             std::to_string(elem.basis().triangle()) + ")",
                         r.norm(), cfg.max_iter);
  return z;
}

ReconstructionReport verify_reconstruction(const Problem& problem, const HybridState& state,
                             const NewtonConfig& projection_cfg) {
  const Mesh& mesh = problem.mesh();
  ReconstructionReport report;
  report.scale = field_scale(state);

  const NonconformingField psi = sh_inverse(mesh, state.p, state.mu);

  // Per-element projected flux z_K = P G^{-1}(grad psi); the
  // reconstruction identity states u_{K,e} = -z_{K,e}.
  std::vector<Vec3> z(mesh.num_triangles());
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const LocalElement& elem = problem.element(k);
    const auto w = [&](const Vec2& x) {
      return g_inverse(psi.gradient(elem.basis(), x), elem.alpha(),
                       elem.beta(), elem.law().tau_g);
    };
    z[k] = nonlinear_projection(elem, w, projection_cfg);
    for (int i = 0; i < 3; ++i)
      report.flux_identity = std::max(
          report.flux_identity, std::abs(state.flux[k][i] + z[k][i]));
  }

  // Residual of the nonconforming equation for a test function given by
  // its element means, per-element gradients and support.
  const auto residual_for =
      [&](const std::vector<int>& elems,
          const std::function<double(int)>& mean,
          const std::function<Vec2(int, const Vec2&)>& grad) {
        double r = 0.0;
        for (int k : elems) {
          const LocalElement& elem = problem.element(k);
          r += elem.cell_law().eval(state.p[k]) * mean(k);
          r -= problem.source_integral(k) * mean(k);
          double flux_term = 0.0;
          elem.for_each_quad_point(
              [&](const Vec2& x, double w, const std::array<Vec2, 3>& w_out) {
                const Vec2 zh =
                    z[k][0] * w_out[0] + z[k][1] * w_out[1] + z[k][2] * w_out[2];
                flux_term += w * zh.dot(grad(k, x));
              });
          r += flux_term;
        }
        return std::abs(r);
      };

  for (int e : mesh.interior_edges) {
    const std::vector<int> elems{mesh.edge_tris[e][0], mesh.edge_tris[e][1]};
    report.cr_residual = std::max(
        report.cr_residual,
        residual_for(
            elems, [](int) { return 1.0 / 3.0; },
            [&](int k, const Vec2&) {
              return problem.element(k).basis().cr_grad(
                  mesh.local_edge_index(k, e));
            }));
  }
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    report.bubble_residual = std::max(
        report.bubble_residual,
        residual_for(
            {k}, [](int) { return 1.0 / 60.0; },
            [&](int kk, const Vec2& x) {
              return problem.element(kk).basis().bubble_grad(x);
            }));
  }
  return report;
}

MixedFormReport verify_mixed_form(const Problem& problem,
                                 const HybridState& state) {
  const Mesh& mesh = problem.mesh();
  MixedFormReport report;
  report.scale = field_scale(state);
  report.flux_jump = max_flux_jump(problem, state);

  // Flux equation (conforming form) tested with the global RT0 basis
  // field of every edge: sum over adjacent K of
  // sigma_{K,e} (a_K(u_K, w_{K,e}) - p_K + mu_e).
  std::vector<double> flux_residual(mesh.num_edges(), 0.0);
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const LocalElement& elem = problem.element(k);
    const Vec3 u(state.flux[k][0], state.flux[k][1], state.flux[k][2]);
    const Vec3 a = elem.a_form(u);
    for (int i = 0; i < 3; ++i) {
      const int e = mesh.edge_of(k, i);
      flux_residual[e] +=
          mesh.sign_of(k, i) * (a[i] - state.p[k] + state.mu[e]);
    }
  }
  for (double r : flux_residual)
    report.mixed_flux_residual =
        std::max(report.mixed_flux_residual, std::abs(r));

  report.mixed_balance_residual = max_element_balance(problem, state);
  return report;
}

double ReconstructionReport::worst() const {
  return std::max({flux_identity, cr_residual, bubble_residual});
}

double MixedFormReport::worst() const {
  return std::max({flux_jump, mixed_flux_residual, mixed_balance_residual});
}

std::string ReconstructionReport::to_text() const {
  std::ostringstream os;
  os << "reconstruction check (nonconforming equivalence)\n"
     << "  flux identity   max |u_{K,e} + P G^{-1}(grad psi)_e| = "
     << flux_identity << "\n"
     << "  CR residual     max over interior-edge tests        = "
     << cr_residual << "\n"
     << "  bubble residual max over element bubbles            = "
     << bubble_residual << "\n"
     << "  field scale                                         = " << scale
     << "\n";
  return os.str();
}

std::string ReconstructionReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "check,value\nflux_identity," << flux_identity << "\ncr_residual,"
     << cr_residual << "\nbubble_residual," << bubble_residual << "\nscale,"
     << scale << "\n";
  return os.str();
}

std::string MixedFormReport::to_text() const {
  std::ostringstream os;
  os << "conforming mixed-form check\n"
     << "  flux continuity max |u_{K,e} + u_{K',e}|  = " << flux_jump << "\n"
     << "  flux equation   max over RT0 basis tests  = "
     << mixed_flux_residual << "\n"
     << "  mass balance    max over element tests    = "
     << mixed_balance_residual << "\n"
     << "  field scale                               = " << scale << "\n";
  return os.str();
}

std::string MixedFormReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "check,value\nflux_jump," << flux_jump << "\nmixed_flux_residual,"
     << mixed_flux_residual << "\nmixed_balance_residual,"
     << mixed_balance_residual << "\nscale," << scale << "\n";
  return os.str();
}

}  // namespace dafo
