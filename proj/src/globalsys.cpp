#include "dafo/globalsys.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "dafo/errors.hpp"

namespace dafo {

Problem::Problem(const Mesh& mesh, Coefficients coeffs,
                 std::vector<double> source_integral,
                 std::vector<double> dirichlet_edge_mean, LawConfig law,
                 int quad_degree)
    : mesh_(&mesh),
      coeffs_(std::move(coeffs)),
      source_int_(std::move(source_integral)),
      dirichlet_mean_(std::move(dirichlet_edge_mean)),
      law_(law),
      quad_degree_(quad_degree) {
  const int nt = mesh.num_triangles();
  if (static_cast<int>(source_int_.size()) != nt)
    throw std::invalid_argument("source integral vector has wrong size");
  if (static_cast<int>(dirichlet_mean_.size()) != mesh.num_edges())
    dirichlet_mean_.resize(mesh.num_edges(), 0.0);

  const QuadratureRule& rule = quad_points(quad_degree_);
  elements_.reserve(nt);
  for (int k = 0; k < nt; ++k)
    elements_.emplace_back(mesh, k, coeffs_, rule, law_);

  interior_index_.assign(mesh.num_edges(), -1);
  for (std::size_t i = 0; i < mesh.interior_edges.size(); ++i)
    interior_index_[mesh.interior_edges[i]] = static_cast<int>(i);
}

void Problem::set_source_integrals(std::vector<double> source_integral) {
  if (source_integral.size() != source_int_.size())
    throw std::invalid_argument("source integral vector has wrong size");
  source_int_ = std::move(source_integral);
}

void Problem::set_dirichlet_means(std::vector<double> dirichlet_edge_mean) {
  if (static_cast<int>(dirichlet_edge_mean.size()) != mesh_->num_edges())
    throw std::invalid_argument("Dirichlet mean vector has wrong size");
  dirichlet_mean_ = std::move(dirichlet_edge_mean);
}

int Problem::num_unknowns(Variant v) const {
  const int ne = num_interior_edges();
  return v == Variant::FluxOnly ? mesh_->num_triangles() + ne : ne;
}

HybridState Problem::initial_state(Variant v) const {
  HybridState state;
  state.variant = v;
  state.p.assign(mesh_->num_triangles(), 0.0);
  state.mu.assign(mesh_->num_edges(), 0.0);
  state.flux.assign(mesh_->num_triangles(), {0.0, 0.0, 0.0});
  for (int e : mesh_->boundary_edges) state.mu[e] = dirichlet_mean_[e];
  return state;
}

namespace {

Vec3 mu_triple(const Mesh& mesh, const HybridState& state, int k) {
  Vec3 mu;
  for (int i = 0; i < 3; ++i) mu[i] = state.mu[mesh.edge_of(k, i)];
  return mu;
}

}  // namespace

Eigen::VectorXd assemble_residual(const Problem& problem, HybridState& state,
                                  const NewtonConfig& local_cfg) {
  const Mesh& mesh = problem.mesh();
  const int nt = mesh.num_triangles();
  const bool flux_only = state.variant == Variant::FluxOnly;
  Eigen::VectorXd residual =
      Eigen::VectorXd::Zero(problem.num_unknowns(state.variant));

  for (int k = 0; k < nt; ++k) {
    const LocalElement& elem = problem.element(k);
    const Vec3 mu = mu_triple(mesh, state, k);
    const Vec3 warm(state.flux[k][0], state.flux[k][1], state.flux[k][2]);
    Vec3 u;
    try {
      if (flux_only) {
        u = elem.solve_flux_only(state.p[k], mu, local_cfg, warm);
      } else if (state.variant == Variant::ClosedForm) {
        const LocalSolution sol = elem.solve_closed_form(
            mu, problem.source_integral(k), local_cfg, warm);
        u = sol.u;
        state.p[k] = sol.p;
      } else {
        const LocalSolution sol = elem.solve_coupled(
            mu, problem.source_integral(k), local_cfg, warm, state.p[k]);
        u = sol.u;
        state.p[k] = sol.p;
      }
    } catch (const NewtonDiverged& err) {
      throw NewtonDiverged("local solve failed in element " +
                               std::to_string(k) + ": " + err.what(),
                           err.last_residual, err.iterations);
    }
    for (int i = 0; i < 3; ++i) state.flux[k][i] = u[i];

    if (flux_only)
      residual[k] = elem.conservation_residual(u, state.p[k],
                                               problem.source_integral(k));
    const int offset = flux_only ? nt : 0;
    for (int i = 0; i < 3; ++i) {
      const int idx = problem.interior_index(mesh.edge_of(k, i));
      if (idx >= 0) residual[offset + idx] += u[i];
    }
  }
  return residual;
}

SparseSystem assemble_jacobian(const Problem& problem,
                               const HybridState& state,
                               const Eigen::VectorXd& residual) {
  const Mesh& mesh = problem.mesh();
  const int nt = mesh.num_triangles();
  const bool flux_only = state.variant == Variant::FluxOnly;
  const int n = problem.num_unknowns(state.variant);
  const int offset = flux_only ? nt : 0;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(nt) * (flux_only ? 16 : 9));

  for (int k = 0; k < nt; ++k) {
    const LocalElement& elem = problem.element(k);
    const Vec3 u(state.flux[k][0], state.flux[k][1], state.flux[k][2]);
    const Sensitivities sens = elem.sensitivities(
        state.variant, u, state.p[k], problem.source_integral(k));

    std::array<int, 3> col{-1, -1, -1};  // multiplier unknown per local edge
    for (int i = 0; i < 3; ++i) {
      const int idx = problem.interior_index(mesh.edge_of(k, i));
      if (idx >= 0) col[i] = offset + idx;
    }

    if (flux_only) {
      // dF_K/dp_K = sum_e du_e/dp + C_K', dF_K/dmu_f = sum_e du_e/dmu_f
      const double ck_prime =
          elem.cell_law().deriv(state.p[k], problem.law().eps_p);
      triplets.emplace_back(k, k, sens.du_dp.sum() + ck_prime);
      for (int f = 0; f < 3; ++f)
        if (col[f] >= 0)
          triplets.emplace_back(k, col[f], sens.du_dmu.col(f).sum());
    }

    // Edge rows F_e: each adjacent element contributes du_{K,e}/d(unknowns).
    for (int i = 0; i < 3; ++i) {
      if (col[i] < 0) continue;
      const int row = col[i];
      if (flux_only) triplets.emplace_back(row, k, sens.du_dp[i]);
      for (int f = 0; f < 3; ++f)
        if (col[f] >= 0) triplets.emplace_back(row, col[f], sens.du_dmu(i, f));
    }
  }

  SparseSystem system;
  system.matrix.resize(n, n);
  system.matrix.setFromTriplets(triplets.begin(), triplets.end());
  system.rhs = -residual;
  return system;
}

Eigen::VectorXd sparse_solve(const SparseSystem& system,
                             LinearSolverKind kind) {
  Eigen::VectorXd x;
  if (kind == LinearSolverKind::Direct) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(system.matrix);
    if (solver.info() != Eigen::Success)
      throw SingularMatrixError("sparse LU factorization failed");
    x = solver.solve(system.rhs);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper>
        solver;
    solver.setTolerance(1e-14);
    solver.setMaxIterations(8 * system.matrix.rows() + 100);
    solver.compute(system.matrix);
    x = solver.solve(system.rhs);
  }
  const double bnorm = system.rhs.norm();
  const double res = (system.matrix * x - system.rhs).norm();
  if (!x.allFinite() || res > 1e-12 * std::max(bnorm, 1e-300))
    throw SingularMatrixError(
        "linear solve residual " + std::to_string(res) +
        " exceeds tolerance (matrix singular or ill-conditioned)");
  return x;
}

namespace {

void apply_update(const Problem& problem, HybridState& state,
                  const Eigen::VectorXd& dx, double lambda) {
  const Mesh& mesh = problem.mesh();
  const bool flux_only = state.variant == Variant::FluxOnly;
  const int nt = mesh.num_triangles();
  const int offset = flux_only ? nt : 0;
  if (flux_only)
    for (int k = 0; k < nt; ++k) state.p[k] += lambda * dx[k];
  for (std::size_t i = 0; i < mesh.interior_edges.size(); ++i)
    state.mu[mesh.interior_edges[i]] += lambda * dx[offset + i];
}

}  // namespace

SolveReport newton_solve(const Problem& problem, Variant variant,
                         HybridState& state, const SolverOptions& opts,
                         std::vector<NewtonTraceEntry>* trace_out) {
  state.variant = variant;
  SolveReport report;
  auto log = [&](int it, double rn, double step) {
    report.trace.push_back({it, rn, step});
    if (trace_out) trace_out->push_back({it, rn, step});
  };

  Eigen::VectorXd residual = assemble_residual(problem, state, opts.local);
  double rnorm = residual.norm();
  log(0, rnorm, 0.0);
  const double tol =
      std::max(opts.global.abs_tol, opts.global.rel_tol * rnorm);

  for (int it = 0; it <= opts.global.max_iter; ++it) {
    if (rnorm <= tol) {
      report.iterations = it;
      report.residual = rnorm;
      report.converged = true;
      return report;
    }
    if (it == opts.global.max_iter) break;

    const SparseSystem system = assemble_jacobian(problem, state, residual);
    const Eigen::VectorXd dx = sparse_solve(system, opts.linear);

    double lambda = 1.0;
    HybridState best = state;
    apply_update(problem, best, dx, lambda);
    Eigen::VectorXd best_res = assemble_residual(problem, best, opts.local);
    double best_rn = best_res.norm();
    double best_lambda = lambda;
    while (best_rn > (1.0 - 1e-4 * lambda) * rnorm &&
           lambda >= opts.global.min_step) {
      lambda *= opts.global.backtrack_factor;
      HybridState trial = state;  // warm start from the pre-step fields
      apply_update(problem, trial, dx, lambda);
      Eigen::VectorXd trial_res = assemble_residual(problem, trial, opts.local);
      const double trial_rn = trial_res.norm();
      if (trial_rn < best_rn) {
        best = std::move(trial);
        best_res = std::move(trial_res);
        best_rn = trial_rn;
        best_lambda = lambda;
      }
    }
    if (best_rn >= rnorm) {  // stalled at the round-off floor
      if (rnorm <= 32.0 * tol) {
        report.iterations = it;
        report.residual = rnorm;
        report.converged = true;
        return report;
      }
      throw NewtonDiverged(std::string("global Newton (") +
                               variant_name(variant) +
                               ") stalled at residual " +
                               std::to_string(rnorm),
                           rnorm, it);
    }
    state = std::move(best);
    residual = std::move(best_res);
    rnorm = best_rn;
    log(it + 1, rnorm, best_lambda);
  }

  throw NewtonDiverged(
      std::string("global Newton (") + variant_name(variant) +
          ") did not converge in " + std::to_string(opts.global.max_iter) +
          " iterations; last residual " + std::to_string(rnorm),
      rnorm, opts.global.max_iter);
}

FieldOutput recover_fields(const Problem& problem, const HybridState& state) {
  const Mesh& mesh = problem.mesh();
  FieldOutput out;
  const int nt = mesh.num_triangles();
  out.cell_p.resize(nt);
  out.cell_P.resize(nt);
  out.cell_velocity.resize(nt);
  out.edge_flux.assign(mesh.num_edges(), 0.0);

  for (int k = 0; k < nt; ++k) {
    out.cell_p[k] = state.p[k];
    out.cell_P[k] =
        std::copysign(std::sqrt(std::abs(state.p[k])), state.p[k]);
    const ElementBasis& basis = problem.element(k).basis();
    const Vec2 c = mesh.centroid(k);
    Vec2 vel = Vec2::Zero();
    for (int i = 0; i < 3; ++i) vel += state.flux[k][i] * basis.rt0_outward(i, c);
    out.cell_velocity[k] = vel;
    // Signed global flux v_e = sigma_{K,e} u_{K,e}; both sides agree at
    // convergence, the first adjacent element wins here.
    for (int i = 0; i < 3; ++i) {
      const int e = mesh.edge_of(k, i);
      if (mesh.edge_tris[e][0] == k)
        out.edge_flux[e] = mesh.sign_of(k, i) * state.flux[k][i];
    }
  }
  return out;
}

double max_flux_jump(const Problem& problem, const HybridState& state) {
  const Mesh& mesh = problem.mesh();
  double worst = 0.0;
  for (int e : mesh.interior_edges) {
    const int k0 = mesh.edge_tris[e][0];
    const int k1 = mesh.edge_tris[e][1];
    const double jump = state.flux[k0][mesh.local_edge_index(k0, e)] +
                        state.flux[k1][mesh.local_edge_index(k1, e)];
    worst = std::max(worst, std::abs(jump));
  }
  return worst;
}

double max_element_balance(const Problem& problem, const HybridState& state) {
  double worst = 0.0;
  for (int k = 0; k < problem.mesh().num_triangles(); ++k) {
    const Vec3 u(state.flux[k][0], state.flux[k][1], state.flux[k][2]);
    worst = std::max(
        std::abs(problem.element(k).conservation_residual(
            u, state.p[k], problem.source_integral(k))),
        worst);
  }
  return worst;
}

double boundary_outflux(const Problem& problem, const HybridState& state) {
  const Mesh& mesh = problem.mesh();
  double total = 0.0;
  for (int e : mesh.boundary_edges) {
    const int k = mesh.edge_tris[e][0];
    total += state.flux[k][mesh.local_edge_index(k, e)];
  }
  return total;
}

double global_balance(const Problem& problem, const HybridState& state) {
  double interior = 0.0;
  for (int k = 0; k < problem.mesh().num_triangles(); ++k)
    interior += problem.source_integral(k) -
                problem.element(k).cell_law().eval(state.p[k]);
  return std::abs(interior - boundary_outflux(problem, state));
}

}  // namespace dafo
