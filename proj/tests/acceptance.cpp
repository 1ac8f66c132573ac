// Acceptance suite: each criterion prints one PASS/FAIL line; the exit
// code is the number of failed criteria. Thresholds are fixed here, not
// tunable from outside.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dafo/condense.hpp"
#include "dafo/equivcheck.hpp"
#include "dafo/globalsys.hpp"
#include "dafo/integrate.hpp"
#include "dafo/march.hpp"
#include "dafo/mms.hpp"
#include "dafo/mesh.hpp"

using namespace dafo;

namespace {

struct CriterionResult {
  int id;
  std::string label;
  bool pass = true;
  std::string detail;
  double seconds = 0.0;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

struct Check {
  bool pass = true;
  double worst = 0.0;
  std::string note;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!note.empty()) note += "; ";
      note += what;
    }
  }
  void track(double value) { worst = std::max(worst, std::abs(value)); }
  void bound(double value, double tol, const std::string& what) {
    track(value);
    require(std::abs(value) <= tol, what + " = " + std::to_string(value) +
                                        " exceeds " + std::to_string(tol));
  }
};

SolverOptions suite_options() {
  SolverOptions opts;
  opts.global.abs_tol = 1e-12;
  opts.global.max_iter = 25;
  opts.local.abs_tol = 1e-14;
  opts.local.max_iter = 25;
  return opts;
}

ManufacturedCase forchheimer_case() {
  ManufacturedCase mc;
  mc.alpha = 1.3;
  mc.beta = 0.8;
  mc.gamma = 1.1;
  mc.porosity = 0.4;
  mc.dt = 0.7;
  return mc;
}

Problem make_problem(const Mesh& mesh, const ManufacturedCase& mc) {
  std::vector<double> f_int = element_integrals(
      mesh, quad_points(5), [&](const Vec2& x) { return mc.source(x); });
  std::vector<double> g_mean = dirichlet_edge_means(
      mesh, [&](const Vec2& x) { return mc.pressure(x); });
  return Problem(mesh, mc.coefficients(mesh.num_triangles()),
                 std::move(f_int), std::move(g_mean));
}

// Criterion 6 collects the balance residuals of every converged solve the
// suite performs; criterion 9 collects the iteration counts.
struct SuiteLog {
  double worst_element_balance = 0.0;
  double worst_global_balance = 0.0;
  int worst_iterations = 0;
  int runs = 0;

  void record(const Problem& problem, const HybridState& state,
              const SolveReport& report) {
    worst_element_balance =
        std::max(worst_element_balance, max_element_balance(problem, state));
    worst_global_balance =
        std::max(worst_global_balance, global_balance(problem, state));
    worst_iterations = std::max(worst_iterations, report.iterations);
    ++runs;
  }
} suite_log;

SolveReport solve_logged(Problem& problem, Variant v, HybridState& state,
                         const SolverOptions& opts = suite_options()) {
  const SolveReport report = newton_solve(problem, v, state, opts);
  suite_log.record(problem, state, report);
  return report;
}

// ---------------------------------------------------------------- 1
Check criterion_roundtrips() {
  Check c;
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> coef(0.1, 10.0);
  std::uniform_real_distribution<double> comp(-10.0, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double alpha = coef(rng), beta = coef(rng);
    const Vec2 v(comp(rng), comp(rng));
    const Vec2 back = g_eval(g_inverse(v, alpha, beta), alpha, beta);
    const double rel = (back - v).norm() / std::max(v.norm(), 1e-300);
    c.track(rel);
    c.require(rel <= 1e-12, "G o G^-1 deviates");

    const double phi = coef(rng), gamma = coef(rng), dt = coef(rng);
    const CellLaw law(phi * gamma, dt);  // |K| folded into phi gamma
    const double p = comp(rng);
    const double back_p = law.inverse(law.eval(p));
    const double rel_p = std::abs(back_p - p) / std::max(std::abs(p), 1e-300);
    c.track(rel_p);
    c.require(rel_p <= 1e-12, "C_K^-1 o C_K deviates");
  }
  c.note = "max rel dev " + sci(c.worst);
  return c;
}

// ---------------------------------------------------------------- 2
Check criterion_derivatives() {
  Check c;
  std::mt19937 rng(103);
  std::uniform_real_distribution<double> coef(0.1, 10.0);
  std::uniform_real_distribution<double> comp(-3.0, 3.0);
  const double h = 1e-5;
  double worst = 0.0;
  auto rel_err = [](double got, double fd) {
    return std::abs(got - fd) / std::max({std::abs(fd), 1e-6});
  };

  // DG against finite differences of G
  for (int trial = 0; trial < 50; ++trial) {
    const double alpha = coef(rng), beta = coef(rng);
    Vec2 u(comp(rng), comp(rng));
    if (u.norm() < 0.1) u += Vec2(0.5, 0.5);
    const Mat2 dg = g_jacobian(u, alpha, beta);
    for (int col = 0; col < 2; ++col) {
      Vec2 du = Vec2::Zero();
      du[col] = h;
      const Vec2 fd =
          (g_eval(u + du, alpha, beta) - g_eval(u - du, alpha, beta)) /
          (2.0 * h);
      for (int row = 0; row < 2; ++row)
        worst = std::max(worst, rel_err(dg(row, col), fd[row]));
    }
  }

  // local Jacobians: D F_tilde, D F_bar, 4x4 D F_K
  const Mesh mesh = Mesh::structured(2);
  const ManufacturedCase mc = forchheimer_case();
  const Coefficients coeffs = mc.coefficients(mesh.num_triangles());
  for (int k : {0, 3, 6}) {
    const LocalElement elem(mesh, k, coeffs, quad_points(5));
    const Vec3 u(comp(rng), comp(rng), comp(rng));
    const Vec3 mu(comp(rng), comp(rng), comp(rng));
    const double f_int = comp(rng);
    const double p = 2.0 + coef(rng);

    const Mat3 dft = elem.flux_jacobian(u);
    const Mat3 dfb = elem.closed_form_jacobian(u, f_int);
    const Mat4 dfc = elem.coupled_jacobian(u, p);
    for (int col = 0; col < 3; ++col) {
      Vec3 du = Vec3::Zero();
      du[col] = h;
      const Vec3 fd_t = (elem.flux_residual(u + du, p, mu) -
                         elem.flux_residual(u - du, p, mu)) /
                        (2.0 * h);
      const Vec3 fd_b =
          (elem.flux_residual(u + du, elem.pressure_from_flux(u + du, f_int),
                              mu) -
           elem.flux_residual(u - du, elem.pressure_from_flux(u - du, f_int),
                              mu)) /
          (2.0 * h);
      for (int row = 0; row < 3; ++row) {
        worst = std::max(worst, rel_err(dft(row, col), fd_t[row]));
        worst = std::max(worst, rel_err(dfb(row, col), fd_b[row]));
      }
      // coupled: flux rows in u, balance row in u
      const double fd_bal =
          (elem.conservation_residual(u + du, p, f_int) -
           elem.conservation_residual(u - du, p, f_int)) /
          (2.0 * h);
      worst = std::max(worst, rel_err(dfc(3, col), fd_bal));
      for (int row = 0; row < 3; ++row)
        worst = std::max(worst, rel_err(dfc(row, col), fd_t[row]));
    }
    // coupled: p column
    const Vec3 fd_p = (elem.flux_residual(u, p + h, mu) -
                       elem.flux_residual(u, p - h, mu)) /
                      (2.0 * h);
    for (int row = 0; row < 3; ++row)
      worst = std::max(worst, rel_err(dfc(row, 3), fd_p[row]));
    const double fd_cp = (elem.conservation_residual(u, p + h, f_int) -
                          elem.conservation_residual(u, p - h, f_int)) /
                         (2.0 * h);
    worst = std::max(worst, rel_err(dfc(3, 3), fd_cp));
  }

  // 20 sampled global Jacobian entries per variant
  Problem problem = make_problem(mesh, mc);
  const NewtonConfig local{.abs_tol = 1e-14, .max_iter = 40};
  for (Variant v : {Variant::FluxOnly, Variant::ClosedForm, Variant::Coupled}) {
    HybridState state = problem.initial_state(v);
    solve_logged(problem, v, state);
    std::uniform_real_distribution<double> perturb(-0.05, 0.05);
    for (int e : mesh.interior_edges) state.mu[e] += perturb(rng);
    if (v == Variant::FluxOnly)
      for (double& p : state.p) p += perturb(rng);
    Eigen::VectorXd residual = assemble_residual(problem, state, local);
    const Eigen::MatrixXd jac =
        Eigen::MatrixXd(assemble_jacobian(problem, state, residual).matrix);

    const int nt = mesh.num_triangles();
    const int n = problem.num_unknowns(v);
    std::uniform_int_distribution<int> pick(0, n - 1);
    auto apply = [&](HybridState& s, int col, double delta) {
      if (v == Variant::FluxOnly && col < nt) s.p[col] += delta;
      else {
        const int e =
            mesh.interior_edges[v == Variant::FluxOnly ? col - nt : col];
        s.mu[e] += delta;
      }
    };
    int sampled = 0;
    while (sampled < 20) {
      const int col = pick(rng);
      HybridState plus = state, minus = state;
      apply(plus, col, h);
      apply(minus, col, -h);
      const Eigen::VectorXd fd = (assemble_residual(problem, plus, local) -
                                  assemble_residual(problem, minus, local)) /
                                 (2.0 * h);
      for (int row = 0; row < n && sampled < 20; ++row) {
        if (std::abs(fd[row]) < 1e-6) continue;  // entry structurally zero
        worst = std::max(worst, rel_err(jac(row, col), fd[row]));
        ++sampled;
      }
    }
  }

  c.worst = worst;
  c.require(worst <= 1e-5, "derivative mismatch vs finite differences");
  c.note = "max rel dev " + sci(worst);
  return c;
}

// ---------------------------------------------------------------- 3
Check criterion_determinant_identity() {
  Check c;
  const Mesh mesh = Mesh::structured(2);
  const Coefficients coeffs = forchheimer_case().coefficients(8);
  std::mt19937 rng(107);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  std::uniform_real_distribution<double> pval(0.3, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const LocalElement elem(mesh, trial % 8, coeffs, quad_points(5));
    const Vec3 u(val(rng), val(rng), val(rng));
    const double p = (trial % 2 ? 1.0 : -1.0) * pval(rng);
    const double ck_prime = elem.cell_law().deriv(p, 0.0);
    const Mat3 dft = elem.flux_jacobian(u);
    Mat4 coupled;
    coupled.topLeftCorner<3, 3>() = dft;
    coupled.topRightCorner<3, 1>() = Vec3::Constant(-1.0);
    coupled.bottomLeftCorner<1, 3>() = Eigen::RowVector3d::Ones();
    coupled(3, 3) = ck_prime;
    const Mat3 condensed = dft + (1.0 / ck_prime) * Mat3::Ones();
    const double lhs = coupled.determinant();
    const double rhs = ck_prime * condensed.determinant();
    const double rel = std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
    c.track(rel);
    c.require(rel <= 1e-10, "determinant identity violated");
  }
  c.note = "max rel dev " + sci(c.worst);
  return c;
}

// ---------------------------------------------------------------- 4
Check criterion_variant_equivalence() {
  Check c;
  const ManufacturedCase mc = forchheimer_case();
  double worst = 0.0;
  for (int n : {1, 2, 4}) {
    const Mesh mesh = Mesh::structured(n);
    Problem problem = make_problem(mesh, mc);
    HybridState fo = problem.initial_state(Variant::FluxOnly);
    HybridState cf = problem.initial_state(Variant::ClosedForm);
    HybridState cp = problem.initial_state(Variant::Coupled);
    solve_logged(problem, Variant::FluxOnly, fo);
    solve_logged(problem, Variant::ClosedForm, cf);
    solve_logged(problem, Variant::Coupled, cp);
    for (int k = 0; k < mesh.num_triangles(); ++k) {
      worst = std::max({worst, std::abs(fo.p[k] - cf.p[k]),
                        std::abs(cf.p[k] - cp.p[k])});
      for (int i = 0; i < 3; ++i)
        worst = std::max({worst, std::abs(fo.flux[k][i] - cf.flux[k][i]),
                          std::abs(cf.flux[k][i] - cp.flux[k][i])});
    }
    for (int e : mesh.interior_edges)
      worst = std::max({worst, std::abs(fo.mu[e] - cf.mu[e]),
                        std::abs(cf.mu[e] - cp.mu[e])});
  }
  c.worst = worst;
  c.require(worst <= 1e-8, "variants disagree");
  c.note = "max dof deviation " + sci(worst);
  return c;
}

// ---------------------------------------------------------------- 5
Check criterion_equivalence_checks() {
  Check c;
  for (double beta : {0.0, 0.8}) {
    ManufacturedCase mc = forchheimer_case();
    mc.beta = beta;
    for (int n : {2, 4}) {
      const Mesh mesh = Mesh::structured(n);
      Problem problem = make_problem(mesh, mc);
      HybridState state = problem.initial_state(Variant::ClosedForm);
      solve_logged(problem, Variant::ClosedForm, state);

      const MixedFormReport thm = verify_mixed_form(problem, state);
      const ReconstructionReport lem = verify_reconstruction(problem, state);
      c.bound(thm.worst() / thm.scale, 1e-8, "mixed-form residual (scaled)");
      c.bound(lem.worst() / lem.scale, 1e-8, "reconstruction residual (scaled)");

      // negative control: one multiplier off by 1e-3 must be flagged
      HybridState bad = state;
      bad.mu[mesh.interior_edges[0]] += 1e-3;
      assemble_residual(problem, bad, suite_options().local);
      const double flagged = std::max(verify_reconstruction(problem, bad).worst(),
                                      verify_mixed_form(problem, bad).worst());
      c.require(flagged > 1e-4, "perturbation control not flagged");
    }
  }
  c.note = "max scaled residual " + sci(c.worst);
  return c;
}

// ---------------------------------------------------------------- 7
Check criterion_mms(std::string& detail) {
  Check c;
  ManufacturedCase darcy = forchheimer_case();
  darcy.beta = 0.0;
  const MmsTable dt = mms_study(4, darcy, Variant::ClosedForm,
                                suite_options(), 4);
  auto absorb = [](const MmsTable& table) {
    for (const auto& row : table.rows) {
      suite_log.worst_iterations =
          std::max(suite_log.worst_iterations, row.newton_iterations);
      suite_log.worst_element_balance =
          std::max(suite_log.worst_element_balance, row.element_balance);
      suite_log.worst_global_balance =
          std::max(suite_log.worst_global_balance, row.global_balance);
      ++suite_log.runs;
    }
  };
  absorb(dt);
  const double order = dt.fitted_order(&MmsRow::err_p);
  c.require(order >= 0.8 && order <= 1.2,
            "Darcy pressure order " + std::to_string(order) +
                " outside 1.0 +- 0.2");

  const MmsTable ft =
      mms_study(4, forchheimer_case(), Variant::ClosedForm, suite_options(), 4);
  absorb(ft);
  for (std::size_t i = 0; i + 1 < ft.rows.size(); ++i) {
    c.require(ft.rows[i + 1].err_p < ft.rows[i].err_p,
              "Forchheimer pressure error not monotone");
    c.require(ft.rows[i + 1].err_u < ft.rows[i].err_u,
              "Forchheimer flux error not monotone");
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "Darcy p-order %.3f (u-order %.3f); Forchheimer errors "
                "decrease monotonically",
                order, dt.fitted_order(&MmsRow::err_u));
  detail = buf;
  return c;
}

// ---------------------------------------------------------------- 8
Check criterion_time_stepping(std::string& detail) {
  Check c;
  const Mesh mesh = Mesh::structured(2);
  const int nt = mesh.num_triangles();
  const Coefficients coeffs =
      Coefficients::constant(nt, 1.3, 0.8, 1.1, 0.4, 1.0);
  Problem problem(mesh, coeffs, std::vector<double>(nt, 0.0),
                  std::vector<double>(mesh.num_edges(), 0.0));
  TimeStepper stepper(
      problem, Variant::ClosedForm,
      [](const Vec2&, double) { return 0.1; },
      [](const Vec2& x, double) { return 1.0 + 0.2 * x.x(); },
      suite_options());

  // march to the steady state of the scheme
  TimeSchedule burn{1.0, 80, std::vector<double>(nt, 1.0)};
  const MarchResult burned = stepper.run(burn);
  for (const auto& report : burned.reports)
    suite_log.worst_iterations =
        std::max(suite_log.worst_iterations, report.iterations);
  const HybridState steady = burned.trajectory.back();
  double settle = 0.0;
  for (int k = 0; k < nt; ++k)
    settle = std::max(settle,
                      std::abs(steady.p[k] -
                               burned.trajectory[burned.trajectory.size() - 2]
                                   .p[k]));
  c.require(settle <= 1e-11, "pre-march did not settle");

  // ten further steps preserve the fixed point to 1e-9
  HybridState state = steady;
  double drift = 0.0;
  for (int k = 1; k <= 10; ++k) {
    SolveReport report;
    state = stepper.step(state, k, &report);
    suite_log.record(problem, state, report);
    for (int kk = 0; kk < nt; ++kk)
      drift = std::max(drift, std::abs(state.p[kk] - steady.p[kk]));
  }
  c.bound(drift, 1e-9, "fixed-point drift");

  // transient budget closure from a cold start
  TimeSchedule schedule{1.0, 10, std::vector<double>(nt, 1.0)};
  const MarchResult result = stepper.run(schedule);
  double worst_budget = 0.0;
  for (const auto& row : result.budget) {
    const double scale =
        std::max({std::abs(row.storage_change), std::abs(row.outflux),
                  std::abs(row.source), 1e-30});
    worst_budget = std::max(worst_budget, std::abs(row.residual) / scale);
  }
  c.require(worst_budget <= 1e-8, "mass budget residual " +
                                      std::to_string(worst_budget));
  char buf[120];
  std::snprintf(buf, sizeof buf,
                "fixed-point drift %.2e over 10 steps; worst budget %.2e",
                drift, worst_budget);
  detail = buf;
  return c;
}

// ---------------------------------------------------------------- 9
Check criterion_robustness(std::string& detail) {
  Check c;
  c.require(suite_log.worst_iterations <= 25,
            "a Newton run needed " +
                std::to_string(suite_log.worst_iterations) + " iterations");

  // global uniqueness probe: two random starts agree to 1e-10
  const Mesh mesh = Mesh::structured(2);
  Problem problem = make_problem(mesh, forchheimer_case());
  std::mt19937 rng(113);
  std::uniform_real_distribution<double> val(-0.5, 0.5);
  HybridState a = problem.initial_state(Variant::ClosedForm);
  HybridState b = problem.initial_state(Variant::ClosedForm);
  for (int e : mesh.interior_edges) {
    a.mu[e] = val(rng);
    b.mu[e] = val(rng);
  }
  solve_logged(problem, Variant::ClosedForm, a);
  solve_logged(problem, Variant::ClosedForm, b);
  double dev = 0.0;
  for (int e : mesh.interior_edges)
    dev = std::max(dev, std::abs(a.mu[e] - b.mu[e]));
  for (int k = 0; k < mesh.num_triangles(); ++k)
    dev = std::max(dev, std::abs(a.p[k] - b.p[k]));
  c.bound(dev, 1e-10, "global two-start deviation");

  // local uniqueness probes
  const Coefficients coeffs = forchheimer_case().coefficients(8);
  const LocalElement elem(mesh, 5, coeffs, quad_points(5));
  const NewtonConfig cfg{.abs_tol = 1e-13, .max_iter = 25};
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 mu(val(rng), val(rng), val(rng));
    const double p = val(rng);
    const Vec3 s1(val(rng), val(rng), val(rng));
    const Vec3 s2(val(rng), val(rng), val(rng));
    const double d =
        (elem.solve_flux_only(p, mu, cfg, s1) -
         elem.solve_flux_only(p, mu, cfg, s2))
            .norm();
    c.bound(d, 1e-10, "local two-start deviation");
  }
  char buf[120];
  std::snprintf(buf, sizeof buf,
                "max Newton iterations %d over %d runs; max two-start dev "
                "%.2e",
                suite_log.worst_iterations, suite_log.runs, c.worst);
  detail = buf;
  return c;
}

}  // namespace

int main() {
  std::vector<CriterionResult> results;
  auto run = [&](int id, const std::string& label, double budget_seconds,
                 const std::function<Check(std::string&)>& body) {
    CriterionResult r;
    r.id = id;
    r.label = label;
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    try {
      const Check c = body(detail);
      r.pass = c.pass;
      r.detail = detail.empty() ? c.note : detail;
      if (!c.pass && !c.note.empty()) r.detail = c.note;
    } catch (const std::exception& err) {
      r.pass = false;
      r.detail = std::string("exception: ") + err.what();
    }
    r.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    if (budget_seconds > 0.0 && r.seconds > budget_seconds) {
      r.pass = false;
      r.detail += "; exceeded " + std::to_string(budget_seconds) + " s budget";
    }
    results.push_back(r);
  };
  auto simple = [&](int id, const std::string& label, double budget_seconds,
                    const std::function<Check()>& body) {
    run(id, label, budget_seconds, [&](std::string&) { return body(); });
  };

  simple(1, "constitutive round-trips G and C_K", 1.0, criterion_roundtrips);
  simple(2, "derivative oracles vs central finite differences", 10.0,
         criterion_derivatives);
  simple(3, "determinant identity det(DF_K) = C_K' det(DFbar_K)", 1.0,
         criterion_determinant_identity);
  simple(4, "variant equivalence on n in {1,2,4}", 30.0,
         criterion_variant_equivalence);
  simple(5, "equivalence identities and negative control", 60.0,
         criterion_equivalence_checks);
  run(7, "manufactured-solution convergence", 300.0, criterion_mms);
  run(8, "implicit Euler fixed point and mass budget", 0.0,
      criterion_time_stepping);
  run(9, "Newton robustness and uniqueness probes", 0.0,
      criterion_robustness);

  // criterion 6 aggregates the balance residuals of every suite solve
  {
    CriterionResult r;
    r.id = 6;
    r.label = "conservation on every converged run";
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "worst element balance %.2e, global balance %.2e over %d "
                  "runs",
                  suite_log.worst_element_balance,
                  suite_log.worst_global_balance, suite_log.runs);
    r.detail = buf;
    r.pass = suite_log.worst_element_balance <= 1e-10 &&
             suite_log.worst_global_balance <= 1e-10 && suite_log.runs > 0;
    results.push_back(r);
  }

  std::sort(results.begin(), results.end(),
            [](const CriterionResult& a, const CriterionResult& b) {
              return a.id < b.id;
            });
  int failures = 0;
  for (const auto& r : results) {
    if (!r.pass) ++failures;
    std::printf("%s  criterion %d: %s (%s; %.2f s)\n",
                r.pass ? "PASS" : "FAIL", r.id, r.label.c_str(),
                r.detail.c_str(), r.seconds);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
              results.size());
  return failures;
}
