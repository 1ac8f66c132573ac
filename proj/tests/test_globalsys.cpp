#include <doctest.h>

#include <cmath>
#include <random>

#include "dafo/errors.hpp"
#include "dafo/globalsys.hpp"
#include "test_problems.hpp"

using namespace dafo;
using dafo::testing::darcy_case;
using dafo::testing::forchheimer_case;
using dafo::testing::make_problem;

TEST_SUITE_BEGIN("globalsys");

namespace {

SolverOptions tight_options() {
  SolverOptions opts;
  opts.global.abs_tol = 1e-12;
  opts.global.max_iter = 25;
  opts.local.abs_tol = 1e-14;
  opts.local.max_iter = 30;
  return opts;
}

}  // namespace

TEST_CASE("residual layout and zero problem") {
  const Mesh mesh = Mesh::structured(1);
  const Coefficients coeffs =
      Coefficients::constant(mesh.num_triangles(), 1.0, 1.0, 1.0, 0.5, 1.0);
  Problem problem(mesh, coeffs, std::vector<double>(mesh.num_triangles(), 0.0),
                  std::vector<double>(mesh.num_edges(), 0.0));

  SUBCASE("residual lengths: 2 elements + 1 interior edge vs 1") {
    HybridState fo = problem.initial_state(Variant::FluxOnly);
    CHECK(assemble_residual(problem, fo, NewtonConfig{}).size() == 3);
    HybridState cf = problem.initial_state(Variant::ClosedForm);
    CHECK(assemble_residual(problem, cf, NewtonConfig{}).size() == 1);
    HybridState cp = problem.initial_state(Variant::Coupled);
    CHECK(assemble_residual(problem, cp, NewtonConfig{}).size() == 1);
  }
  SUBCASE("zero data: zero state is the solution, no Newton step needed") {
    for (Variant v :
         {Variant::FluxOnly, Variant::ClosedForm, Variant::Coupled}) {
      HybridState state = problem.initial_state(v);
      const SolveReport report = newton_solve(problem, v, state);
      CHECK(report.converged);
      CHECK(report.iterations <= 1);
      CHECK(report.residual <= 1e-13);
      for (double p : state.p) CHECK(p == 0.0);
      for (const auto& f : state.flux)
        for (double u : f) CHECK(std::abs(u) <= 1e-13);
    }
  }
}

TEST_CASE("constant-pressure hand case on the n=1 mesh") {
  // With g = c and f = R(c) the exact discrete solution is p = c, u = 0,
  // mu = c on every edge (hand computation, beta arbitrary).
  const Mesh mesh = Mesh::structured(1);
  const double c = 2.25;
  const Coefficients coeffs =
      Coefficients::constant(mesh.num_triangles(), 1.2, 0.0, 1.0, 1.0, 1.0);
  std::vector<double> f_int(mesh.num_triangles());
  for (int k = 0; k < mesh.num_triangles(); ++k)
    f_int[k] = r_eval(c, 1.0, 1.0, 1.0) * mesh.tri_area[k];
  std::vector<double> g_mean(mesh.num_edges(), 0.0);
  for (int e : mesh.boundary_edges) g_mean[e] = c;
  Problem problem(mesh, coeffs, f_int, g_mean);

  for (Variant v : {Variant::FluxOnly, Variant::ClosedForm, Variant::Coupled}) {
    HybridState state = problem.initial_state(v);
    for (int e : mesh.boundary_edges) CHECK(state.mu[e] == c);  // pinned
    const SolveReport report = newton_solve(problem, v, state, tight_options());
    CHECK(report.converged);
    for (int e : mesh.boundary_edges) CHECK(state.mu[e] == c);  // untouched
    for (double p : state.p) CHECK(p == doctest::Approx(c).epsilon(1e-10));
    for (int e : mesh.interior_edges)
      CHECK(state.mu[e] == doctest::Approx(c).epsilon(1e-10));
    for (const auto& f : state.flux)
      for (double u : f) CHECK(std::abs(u) <= 1e-10);

    const FieldOutput fields = recover_fields(problem, state);
    for (double flux : fields.edge_flux) CHECK(std::abs(flux) <= 1e-10);
    for (double P : fields.cell_P)
      CHECK(P == doctest::Approx(std::sqrt(c)).epsilon(1e-10));
    for (const auto& vel : fields.cell_velocity)
      CHECK(vel.norm() <= 1e-9);
  }
}

TEST_CASE("converged state is a fixed point of the residual") {
  const Mesh mesh = Mesh::structured(2);
  Problem problem = make_problem(mesh, forchheimer_case());
  HybridState state = problem.initial_state(Variant::ClosedForm);
  newton_solve(problem, Variant::ClosedForm, state, tight_options());
  const Eigen::VectorXd residual =
      assemble_residual(problem, state, tight_options().local);
  CHECK(residual.norm() <= 1e-10);

  // the signed edge flux is single-valued: both adjacent elements yield
  // the same v_e after converting the outward dofs to the global normal
  const FieldOutput fields = recover_fields(problem, state);
  for (int e : mesh.interior_edges) {
    for (int side = 0; side < 2; ++side) {
      const int k = mesh.edge_tris[e][side];
      const int i = mesh.local_edge_index(k, e);
      const double v = mesh.sign_of(k, i) * state.flux[k][i];
      CHECK(fields.edge_flux[e] == doctest::Approx(v).epsilon(1e-9));
    }
  }
}

TEST_CASE("Jacobian matches the linear assembly oracle at beta = 0") {
  // Independent dense assembly per the chain-rule formulas with
  // DFtilde = alpha M: du/dp = (alpha M)^{-1} 1, du/dmu = -(alpha M)^{-1}.
  const Mesh mesh = Mesh::structured(1);
  const ManufacturedCase mc = darcy_case();
  Problem problem = make_problem(mesh, mc);
  HybridState state = problem.initial_state(Variant::FluxOnly);
  newton_solve(problem, Variant::FluxOnly, state, tight_options());

  const Eigen::VectorXd residual =
      assemble_residual(problem, state, tight_options().local);
  const SparseSystem system = assemble_jacobian(problem, state, residual);
  const Eigen::MatrixXd jac = Eigen::MatrixXd(system.matrix);

  const int nt = mesh.num_triangles();
  const int n = problem.num_unknowns(Variant::FluxOnly);
  Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < nt; ++k) {
    const Mat3 am_inv =
        problem.element(k).flux_jacobian(Vec3::Zero()).inverse();
    const Vec3 du_dp = am_inv * Vec3::Ones();
    const double ck_prime =
        problem.element(k).cell_law().deriv(state.p[k], problem.law().eps_p);
    oracle(k, k) = du_dp.sum() + ck_prime;
    for (int i = 0; i < 3; ++i) {
      const int idx = problem.interior_index(mesh.edge_of(k, i));
      if (idx < 0) continue;
      const int row = nt + idx;
      oracle(k, row) += -am_inv.col(i).sum();  // dF_K/dmu
      oracle(row, k) += du_dp[i];              // dF_e/dp
      for (int f = 0; f < 3; ++f) {
        const int jdx = problem.interior_index(mesh.edge_of(k, f));
        if (jdx >= 0) oracle(row, nt + jdx) += -am_inv(i, f);
      }
    }
  }
  CHECK((jac - oracle).norm() <= 1e-10 * std::max(1.0, oracle.norm()));
}

TEST_CASE("Jacobian matches finite differences of the residual") {
  const Mesh mesh = Mesh::structured(2);
  Problem problem = make_problem(mesh, forchheimer_case());
  const NewtonConfig local{.abs_tol = 1e-14, .max_iter = 40};

  for (Variant v : {Variant::FluxOnly, Variant::ClosedForm, Variant::Coupled}) {
    CAPTURE(variant_name(v));
    HybridState state = problem.initial_state(v);
    SolverOptions opts = tight_options();
    newton_solve(problem, v, state, opts);

    // move off the exact solution so derivative structure is generic
    std::mt19937 rng(53);
    std::uniform_real_distribution<double> perturb(-0.05, 0.05);
    for (int e : mesh.interior_edges) state.mu[e] += perturb(rng);
    if (v == Variant::FluxOnly)
      for (double& p : state.p) p += perturb(rng);

    Eigen::VectorXd residual = assemble_residual(problem, state, local);
    const SparseSystem system = assemble_jacobian(problem, state, residual);
    const Eigen::MatrixXd jac = Eigen::MatrixXd(system.matrix);
    const int nt = mesh.num_triangles();
    const int n = problem.num_unknowns(v);

    std::uniform_int_distribution<int> pick(0, n - 1);
    const double h = 1e-6;
    auto apply = [&](HybridState& s, int col, double delta) {
      if (v == Variant::FluxOnly && col < nt) s.p[col] += delta;
      else {
        const int e =
            mesh.interior_edges[v == Variant::FluxOnly ? col - nt : col];
        s.mu[e] += delta;
      }
    };
    for (int trial = 0; trial < 20; ++trial) {
      const int col = pick(rng);
      HybridState plus = state, minus = state;
      apply(plus, col, h);
      apply(minus, col, -h);
      const Eigen::VectorXd fd = (assemble_residual(problem, plus, local) -
                                  assemble_residual(problem, minus, local)) /
                                 (2.0 * h);
      const Eigen::VectorXd col_err = jac.col(col) - fd;
      CHECK(col_err.norm() <= 1e-5 * std::max(1.0, fd.norm()));
    }

    // locality: edge rows couple only the two adjacent elements' edges
    for (int i = 0; i < static_cast<int>(mesh.interior_edges.size()); ++i) {
      const int e = mesh.interior_edges[i];
      const int row = (v == Variant::FluxOnly ? nt : 0) + i;
      for (int j = 0; j < static_cast<int>(mesh.interior_edges.size()); ++j) {
        const int f = mesh.interior_edges[j];
        const int col = (v == Variant::FluxOnly ? nt : 0) + j;
        if (jac(row, col) == 0.0) continue;
        bool adjacent = false;
        for (int side = 0; side < 2; ++side) {
          const int k = mesh.edge_tris[e][side];
          for (int le = 0; le < 3; ++le)
            if (mesh.edge_of(k, le) == f) adjacent = true;
        }
        CHECK(adjacent);
      }
    }
  }
}

TEST_CASE("flux-only Jacobian has a symmetric sparsity pattern") {
  const Mesh mesh = Mesh::structured(2);
  Problem problem = make_problem(mesh, darcy_case());
  HybridState state = problem.initial_state(Variant::FluxOnly);
  newton_solve(problem, Variant::FluxOnly, state, tight_options());
  const Eigen::VectorXd residual =
      assemble_residual(problem, state, tight_options().local);
  const Eigen::MatrixXd jac =
      Eigen::MatrixXd(assemble_jacobian(problem, state, residual).matrix);
  for (int i = 0; i < jac.rows(); ++i)
    for (int j = 0; j < jac.cols(); ++j)
      CHECK((jac(i, j) != 0.0) == (jac(j, i) != 0.0));
}

TEST_CASE("sparse_solve") {
  SUBCASE("identity returns the rhs") {
    SparseSystem system;
    system.matrix.resize(4, 4);
    system.matrix.setIdentity();
    system.rhs = Eigen::Vector4d(1.0, -2.0, 0.5, 3.0);
    const Eigen::VectorXd x = sparse_solve(system);
    CHECK((x - system.rhs).norm() <= 1e-14);
  }
  SUBCASE("random SPD matches a dense solve") {
    std::mt19937 rng(59);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd a(50, 50);
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j) a(i, j) = gauss(rng);
    const Eigen::MatrixXd spd =
        a * a.transpose() + 50.0 * Eigen::MatrixXd::Identity(50, 50);
    Eigen::VectorXd b(50);
    for (int i = 0; i < 50; ++i) b[i] = gauss(rng);

    SparseSystem system;
    system.matrix = spd.sparseView();
    system.rhs = b;
    const Eigen::VectorXd dense = spd.lu().solve(b);
    CHECK((sparse_solve(system, LinearSolverKind::Direct) - dense).norm() <=
          1e-10 * dense.norm());
    CHECK((sparse_solve(system, LinearSolverKind::ConjugateGradient) - dense)
              .norm() <= 1e-9 * dense.norm());
  }
  SUBCASE("singular matrix throws") {
    SparseSystem system;
    system.matrix.resize(3, 3);
    std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {1, 1, 1.0}};
    system.matrix.setFromTriplets(t.begin(), t.end());  // zero row/col 2
    system.rhs = Eigen::Vector3d(1.0, 1.0, 1.0);
    CHECK_THROWS_AS(sparse_solve(system), SingularMatrixError);
  }
}

TEST_CASE("newton_solve on the manufactured problem") {
  const ManufacturedCase mc = forchheimer_case();

  SUBCASE("n = 4 converges from zero within 12 iterations, all variants") {
    const Mesh mesh = Mesh::structured(4);
    Problem problem = make_problem(mesh, mc);
    for (Variant v :
         {Variant::FluxOnly, Variant::ClosedForm, Variant::Coupled}) {
      CAPTURE(variant_name(v));
      HybridState state = problem.initial_state(v);
      std::vector<NewtonTraceEntry> trace;
      const SolveReport report =
          newton_solve(problem, v, state, tight_options(), &trace);
      CHECK(report.converged);
      CHECK(report.iterations <= 12);
      CHECK(trace.size() == static_cast<std::size_t>(report.iterations) + 1);
      CHECK(max_flux_jump(problem, state) <= 1e-10);
      CHECK(max_element_balance(problem, state) <= 1e-10);
      CHECK(global_balance(problem, state) <= 1e-10);
    }
  }
  SUBCASE("variant equivalence on n in {1, 2, 4}") {
    for (int n : {1, 2, 4}) {
      CAPTURE(n);
      const Mesh mesh = Mesh::structured(n);
      Problem problem = make_problem(mesh, mc);
      HybridState fo = problem.initial_state(Variant::FluxOnly);
      HybridState cf = problem.initial_state(Variant::ClosedForm);
      HybridState cp = problem.initial_state(Variant::Coupled);
      newton_solve(problem, Variant::FluxOnly, fo, tight_options());
      newton_solve(problem, Variant::ClosedForm, cf, tight_options());
      newton_solve(problem, Variant::Coupled, cp, tight_options());
      for (int k = 0; k < mesh.num_triangles(); ++k) {
        CHECK(fo.p[k] == doctest::Approx(cf.p[k]).epsilon(1e-8));
        CHECK(cf.p[k] == doctest::Approx(cp.p[k]).epsilon(1e-8));
        for (int i = 0; i < 3; ++i) {
          CHECK(std::abs(fo.flux[k][i] - cf.flux[k][i]) <= 1e-8);
          CHECK(std::abs(cf.flux[k][i] - cp.flux[k][i]) <= 1e-8);
        }
      }
      for (int e : mesh.interior_edges) {
        CHECK(std::abs(fo.mu[e] - cf.mu[e]) <= 1e-8);
        CHECK(std::abs(cf.mu[e] - cp.mu[e]) <= 1e-8);
      }
    }
  }
  SUBCASE("quadratic tail of the global iteration") {
    const Mesh mesh = Mesh::structured(4);
    Problem problem = make_problem(mesh, mc);
    HybridState state = problem.initial_state(Variant::ClosedForm);
    std::vector<NewtonTraceEntry> trace;
    newton_solve(problem, Variant::ClosedForm, state, tight_options(), &trace);
    bool checked = false;
    for (std::size_t i = 1; i + 1 < trace.size(); ++i) {
      if (trace[i].step == 1.0 && trace[i + 1].step == 1.0 &&
          trace[i].residual < 1e-3 && trace[i].residual > 1e-12 &&
          trace[i + 1].residual > 1e-15) {
        CHECK(trace[i + 1].residual <=
              1e6 * trace[i].residual * trace[i].residual);
        checked = true;
      }
    }
    CHECK(checked);
  }
  SUBCASE("iteration cap throws NewtonDiverged with trace") {
    const Mesh mesh = Mesh::structured(2);
    Problem problem = make_problem(mesh, mc);
    HybridState state = problem.initial_state(Variant::ClosedForm);
    SolverOptions opts = tight_options();
    opts.global.max_iter = 1;
    std::vector<NewtonTraceEntry> trace;
    CHECK_THROWS_AS(
        newton_solve(problem, Variant::ClosedForm, state, opts, &trace),
        NewtonDiverged);
    CHECK(trace.size() >= 2);
  }
}

TEST_CASE("conjugate-gradient hook solves the condensed system") {
  const Mesh mesh = Mesh::structured(2);
  Problem problem = make_problem(mesh, darcy_case());
  SolverOptions direct = tight_options();
  SolverOptions cg = tight_options();
  cg.linear = LinearSolverKind::ConjugateGradient;

  HybridState a = problem.initial_state(Variant::ClosedForm);
  HybridState b = problem.initial_state(Variant::ClosedForm);
  newton_solve(problem, Variant::ClosedForm, a, direct);
  newton_solve(problem, Variant::ClosedForm, b, cg);
  for (int e : mesh.interior_edges)
    CHECK(a.mu[e] == doctest::Approx(b.mu[e]).epsilon(1e-9));
}

TEST_CASE("warm start does not change the converged answer") {
  const Mesh mesh = Mesh::structured(2);
  Problem problem = make_problem(mesh, forchheimer_case());
  HybridState cold = problem.initial_state(Variant::Coupled);
  newton_solve(problem, Variant::Coupled, cold, tight_options());

  HybridState warm = cold;  // restart from the converged state
  newton_solve(problem, Variant::Coupled, warm, tight_options());
  for (int k = 0; k < mesh.num_triangles(); ++k)
    CHECK(warm.p[k] == doctest::Approx(cold.p[k]).epsilon(1e-8));
}

TEST_SUITE_END();
