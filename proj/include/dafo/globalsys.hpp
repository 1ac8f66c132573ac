#ifndef DAFO_GLOBALSYS_HPP
#define DAFO_GLOBALSYS_HPP

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dafo/condense.hpp"
#include "dafo/constitutive.hpp"
#include "dafo/elements.hpp"
#include "dafo/mesh.hpp"

namespace dafo {

/// Discrete solution of the hybridized system: element pressures p_K,
/// edge multipliers mu_e (boundary entries pinned to the Dirichlet edge
/// means) and the broken flux dofs u_{K,e} in outward convention.
struct HybridState {
  Variant variant = Variant::ClosedForm;
  int time_index = 0;
  std::vector<double> p;
  std::vector<double> mu;
  std::vector<std::array<double, 3>> flux;
};

/// One row of the global Newton convergence log.
struct NewtonTraceEntry {
  int iteration;
  double residual;
  double step;  // Armijo damping factor of the accepted step (0 for entry 0)
};

struct SolveReport {
  std::vector<NewtonTraceEntry> trace;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Condensed sparse linear system J dx = rhs for one Newton step.
/// Unknown ordering: elements first (FluxOnly only), then interior edges
/// by ascending global edge id.
struct SparseSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
};

enum class LinearSolverKind {
  Direct,             ///< sparse LU factorization
  ConjugateGradient,  ///< iterative hook for symmetric systems
};

struct SolverOptions {
  NewtonConfig global{.abs_tol = 1e-11, .max_iter = 25};
  NewtonConfig local{.abs_tol = 1e-13, .max_iter = 25};
  LinearSolverKind linear = LinearSolverKind::Direct;
};

/// One stationary hybridized problem: mesh, coefficients, element source
/// integrals int_K f dx and Dirichlet edge means on the boundary.
/// Precomputes the per-element local algebra with a shared quadrature rule.
class Problem {
public:
  Problem(const Mesh& mesh, Coefficients coeffs,
          std::vector<double> source_integral,
          std::vector<double> dirichlet_edge_mean, LawConfig law = {},
          int quad_degree = 5);

  const Mesh& mesh() const { return *mesh_; }
  const Coefficients& coefficients() const { return coeffs_; }
  const LocalElement& element(int k) const { return elements_[k]; }
  const LawConfig& law() const { return law_; }
  int quad_degree() const { return quad_degree_; }

  double source_integral(int k) const { return source_int_[k]; }
  void set_source_integrals(std::vector<double> source_integral);
  /// Dirichlet mean of g on boundary edge e (by global edge id).
  double dirichlet_mean(int e) const { return dirichlet_mean_[e]; }
  void set_dirichlet_means(std::vector<double> dirichlet_edge_mean);

  /// Position of edge e among the interior-edge unknowns, -1 on boundary.
  int interior_index(int e) const { return interior_index_[e]; }
  int num_interior_edges() const {
    return static_cast<int>(mesh_->interior_edges.size());
  }
  int num_unknowns(Variant v) const;

  /// Zero state with boundary multipliers pinned to the Dirichlet means.
  HybridState initial_state(Variant v) const;

private:
  const Mesh* mesh_;
  Coefficients coeffs_;
  std::vector<double> source_int_;
  std::vector<double> dirichlet_mean_;
  LawConfig law_;
  int quad_degree_;
  std::vector<LocalElement> elements_;
  std::vector<int> interior_index_;
};

/// Re-solve the local problems at the state's (p, mu) and assemble the
/// condensed residual: [F_K; F_e] for FluxOnly, [F_e] otherwise. Updates
/// the state's local fields (flux, and p for the eliminating variants)
/// in place, warm-starting each local Newton from the stored values.
Eigen::VectorXd assemble_residual(const Problem& problem, HybridState& state,
                                  const NewtonConfig& local_cfg);

/// Chain-rule Jacobian of the condensed residual at the state's converged
/// local fields, with rhs = -residual.
SparseSystem assemble_jacobian(const Problem& problem,
                               const HybridState& state,
                               const Eigen::VectorXd& residual);

/// Solve the assembled linear system; verifies the relative residual of
/// the solve is below 1e-12 and throws SingularMatrixError otherwise.
Eigen::VectorXd sparse_solve(const SparseSystem& system,
                             LinearSolverKind kind = LinearSolverKind::Direct);

/// Damped global Newton iteration on the condensed system. Throws
/// NewtonDiverged when the iteration cap is hit; `trace_out`, when given,
/// receives the convergence log even on failure.
SolveReport newton_solve(const Problem& problem, Variant variant,
                         HybridState& state, const SolverOptions& opts = {},
                         std::vector<NewtonTraceEntry>* trace_out = nullptr);

/// Full discrete solution in output-friendly form.
struct FieldOutput {
  std::vector<double> cell_p;        ///< transformed pressure p_K
  std::vector<double> cell_P;       ///< physical pressure sign(p) sqrt(|p|)
  std::vector<Vec2> cell_velocity;   ///< u_h at the element centroid
  std::vector<double> edge_flux;     ///< v_e against the global normal n_e
};
FieldOutput recover_fields(const Problem& problem, const HybridState& state);

/// max over interior edges of |u_{K,e} + u_{K',e}| (flux continuity).
double max_flux_jump(const Problem& problem, const HybridState& state);

/// max over elements of |C_K(p_K) + sum_e u_{K,e} - int_K f|.
double max_element_balance(const Problem& problem, const HybridState& state);

/// | sum_K (int_K f - C_K(p_K)) - boundary outflux |.
double global_balance(const Problem& problem, const HybridState& state);

/// Signed outward flux through the domain boundary.
double boundary_outflux(const Problem& problem, const HybridState& state);

}  // namespace dafo

#endif
