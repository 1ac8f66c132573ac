#ifndef DAFO_EQUIVCHECK_HPP
#define DAFO_EQUIVCHECK_HPP

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "dafo/condense.hpp"
#include "dafo/globalsys.hpp"
#include "dafo/mesh.hpp"

namespace dafo {

/// Broken representation of a field in the augmented Crouzeix-Raviart
/// space: per element three CR coefficients (one per local edge) plus a
/// cubic bubble coefficient. Interior continuity in the edge means is a
/// property of how the field was built, not of the storage.
struct NonconformingField {
  std::vector<std::array<double, 4>> coeff;  // [cr0, cr1, cr2, bubble]

  double value(const ElementBasis& basis, const Vec2& x) const;
  Vec2 gradient(const ElementBasis& basis, const Vec2& x) const;
};

/// Invert the moment map: find the unique field whose edge means equal
/// mu_e (all edges, boundary entries carrying the Dirichlet means) and
/// whose element means equal p_K.
NonconformingField sh_inverse(const Mesh& mesh, const std::vector<double>& p,
                              const std::vector<double>& mu);

/// Element means and edge means of a nonconforming field (interior edge
/// means averaged over the two sides, which agree for conforming input).
std::pair<std::vector<double>, std::vector<double>> project_moments(
    const Mesh& mesh, const NonconformingField& field);

/// Nonlinear projection onto RT0(K): the flux triple z (outward dofs)
/// with int_K G(z_h) . w_{K,e} dx = int_K G(w) . w_{K,e} dx for all three
/// basis functions, both sides evaluated with the element's rule.
Vec3 nonlinear_projection(const LocalElement& elem,
                          const std::function<Vec2(const Vec2&)>& w,
                          const NewtonConfig& cfg = {});

/// Residual maxima of the reconstruction identities: the flux relation
/// u_h = -P G^{-1}(grad psi_h) and the nonconforming equation tested
/// against every interior CR function and every bubble.
struct ReconstructionReport {
  double flux_identity = 0.0;
  double cr_residual = 0.0;
  double bubble_residual = 0.0;
  double scale = 1.0;

  double worst() const;
  bool pass(double rel_tol) const { return worst() <= rel_tol * scale; }
  std::string to_text() const;
  std::string to_csv() const;
};

/// Residual maxima of the conforming mixed equations recovered from the
/// hybrid solution: flux continuity across interior edges, the flux
/// equation tested with every conforming RT0 basis field, and element
/// balance tested with every indicator.
struct MixedFormReport {
  double flux_jump = 0.0;
  double mixed_flux_residual = 0.0;
  double mixed_balance_residual = 0.0;
  double scale = 1.0;

  double worst() const;
  bool pass(double rel_tol) const { return worst() <= rel_tol * scale; }
  std::string to_text() const;
  std::string to_csv() const;
};

ReconstructionReport verify_reconstruction(const Problem& problem, const HybridState& state,
                             const NewtonConfig& projection_cfg = {});

MixedFormReport verify_mixed_form(const Problem& problem,
                                 const HybridState& state);

}  // namespace dafo

#endif
