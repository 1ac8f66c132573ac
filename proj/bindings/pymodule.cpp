// Python bindings for the solver pipeline: steady solves, time marches,
// equivalence verification and the MMS study, all driven by the same
// config text the CLI consumes, plus the pointwise constitutive maps.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <utility>
#include <vector>

#include "dafo/config.hpp"
#include "dafo/constitutive.hpp"
#include "dafo/equivcheck.hpp"
#include "dafo/exportout.hpp"
#include "dafo/globalsys.hpp"
#include "dafo/integrate.hpp"
#include "dafo/march.hpp"
#include "dafo/mms.hpp"

namespace py = pybind11;

namespace {

struct SetupBundle {
  dafo::RunConfig config;
  dafo::RunSetup setup;
  dafo::SolverOptions opts;
};

SetupBundle make_setup(const std::string& config_text) {
  SetupBundle b{dafo::parse_config(config_text), {}, {}};
  b.setup = dafo::materialize(b.config);
  b.opts.global.abs_tol = b.config.abs_tol;
  b.opts.global.rel_tol = b.config.rel_tol;
  b.opts.global.max_iter = b.config.max_iter;
  b.opts.local.abs_tol = b.config.local_abs_tol;
  b.opts.local.max_iter = b.config.local_max_iter;
  b.opts.linear = b.setup.linear_direct
                      ? dafo::LinearSolverKind::Direct
                      : dafo::LinearSolverKind::ConjugateGradient;
  return b;
}

dafo::Problem make_problem(const dafo::RunSetup& setup, double t = 0.0) {
  auto f_int = dafo::element_integrals(
      setup.mesh, dafo::quad_points(5),
      [&](const dafo::Vec2& x) { return setup.f(x.x(), x.y(), t); });
  auto g_mean = dafo::dirichlet_edge_means(
      setup.mesh,
      [&](const dafo::Vec2& x) { return setup.g(x.x(), x.y(), t); });
  return dafo::Problem(setup.mesh, setup.coefficients, std::move(f_int),
                       std::move(g_mean), setup.law);
}

py::dict state_dict(const dafo::Problem& problem,
                    const dafo::HybridState& state,
                    const dafo::SolveReport& report) {
  const dafo::FieldOutput fields = dafo::recover_fields(problem, state);
  py::dict out;
  out["p"] = fields.cell_p;
  out["P"] = fields.cell_P;
  out["edge_flux"] = fields.edge_flux;
  out["mu"] = state.mu;
  out["iterations"] = report.iterations;
  out["residual"] = report.residual;
  out["flux_jump"] = dafo::max_flux_jump(problem, state);
  out["element_balance"] = dafo::max_element_balance(problem, state);
  out["global_balance"] = dafo::global_balance(problem, state);
  return out;
}

}  // namespace

PYBIND11_MODULE(dafo, m) {
  m.doc() =
      "Hybridized mixed finite element solver for Darcy-Forchheimer gas "
      "flow with static condensation and Newton linearization.";

  m.def(
      "g_eval",
      [](std::array<double, 2> u, double alpha, double beta) {
        const dafo::Vec2 g = dafo::g_eval({u[0], u[1]}, alpha, beta);
        return std::array<double, 2>{g.x(), g.y()};
      },
      py::arg("u"), py::arg("alpha"), py::arg("beta"),
      "Darcy-Forchheimer law G(u) = (alpha + beta |u|) u");
  m.def(
      "g_inverse",
      [](std::array<double, 2> v, double alpha, double beta, double tau_g) {
        const dafo::Vec2 u = dafo::g_inverse({v[0], v[1]}, alpha, beta, tau_g);
        return std::array<double, 2>{u.x(), u.y()};
      },
      py::arg("v"), py::arg("alpha"), py::arg("beta"),
      py::arg("tau_g") = 1e-2, "Exact inverse of G");

  m.def(
      "mesh_info",
      [](const std::string& source) {
        dafo::RunConfig config;
        config.mesh = source;
        const dafo::RunSetup setup = dafo::materialize(config);
        py::dict out;
        out["vertices"] = setup.mesh.num_vertices();
        out["triangles"] = setup.mesh.num_triangles();
        out["edges"] = setup.mesh.num_edges();
        out["interior_edges"] = setup.mesh.interior_edges.size();
        out["boundary_edges"] = setup.mesh.boundary_edges.size();
        return out;
      },
      py::arg("source"), "Counts for structured:N or file:PATH meshes");

  m.def(
      "solve_steady",
      [](const std::string& config_text) {
        SetupBundle b = make_setup(config_text);
        dafo::Problem problem = make_problem(b.setup);
        dafo::HybridState state = problem.initial_state(b.setup.variant);
        const dafo::SolveReport report =
            dafo::newton_solve(problem, b.setup.variant, state, b.opts);
        return state_dict(problem, state, report);
      },
      py::arg("config"),
      "Solve one stationary problem from config text; returns fields and "
      "diagnostics");

  m.def(
      "run_march",
      [](const std::string& config_text) {
        SetupBundle b = make_setup(config_text);
        dafo::Problem problem = make_problem(b.setup);
        dafo::TimeStepper stepper(
            problem, b.setup.variant,
            [&](const dafo::Vec2& x, double t) {
              return b.setup.f(x.x(), x.y(), t);
            },
            [&](const dafo::Vec2& x, double t) {
              return b.setup.g(x.x(), x.y(), t);
            },
            b.opts);
        dafo::TimeSchedule schedule;
        schedule.dt = b.config.dt;
        schedule.steps = b.config.steps;
        schedule.p0 = b.setup.initial_pressure();
        const dafo::MarchResult result = stepper.run(schedule);

        py::dict out = state_dict(problem, result.trajectory.back(),
                                  result.reports.back());
        std::vector<double> budget;
        for (const auto& row : result.budget) budget.push_back(row.residual);
        out["budget_residuals"] = budget;
        out["steps"] = b.config.steps;
        std::vector<std::vector<double>> pressures;
        for (const auto& s : result.trajectory) pressures.push_back(s.p);
        out["trajectory_p"] = pressures;
        return out;
      },
      py::arg("config"), "Implicit Euler march; returns the final fields, "
                         "per-step budget residuals and pressure history");

  m.def(
      "verify",
      [](const std::string& config_text, double rel_tol) {
        SetupBundle b = make_setup(config_text);
        dafo::Problem problem = make_problem(b.setup);
        dafo::HybridState state = problem.initial_state(b.setup.variant);
        dafo::newton_solve(problem, b.setup.variant, state, b.opts);
        const dafo::MixedFormReport thm =
            dafo::verify_mixed_form(problem, state);
        const dafo::ReconstructionReport lem = dafo::verify_reconstruction(problem, state);
        py::dict out;
        out["flux_jump"] = thm.flux_jump;
        out["mixed_flux_residual"] = thm.mixed_flux_residual;
        out["mixed_balance_residual"] = thm.mixed_balance_residual;
        out["flux_identity"] = lem.flux_identity;
        out["cr_residual"] = lem.cr_residual;
        out["bubble_residual"] = lem.bubble_residual;
        out["scale"] = std::max(thm.scale, lem.scale);
        out["pass"] = thm.pass(rel_tol) && lem.pass(rel_tol);
        return out;
      },
      py::arg("config"), py::arg("rel_tol") = 1e-8,
      "Solve, then verify the conforming mixed equations and the "
      "nonconforming reconstruction identities");

  m.def(
      "mms_study",
      [](const std::string& config_text, int levels, int base_n) {
        SetupBundle b = make_setup(config_text);
        dafo::ManufacturedCase mc;
        mc.alpha = b.setup.coefficients.alpha[0];
        mc.beta = b.setup.coefficients.beta[0];
        mc.gamma = b.setup.coefficients.gamma[0];
        mc.porosity = b.setup.coefficients.porosity[0];
        mc.dt = b.setup.coefficients.dt;
        const dafo::MmsTable table =
            dafo::mms_study(levels, mc, b.setup.variant, b.opts, base_n);
        py::list rows;
        for (const auto& row : table.rows) {
          py::dict r;
          r["n"] = row.n;
          r["err_p"] = row.err_p;
          r["err_p_proj"] = row.err_p_proj;
          r["err_u"] = row.err_u;
          r["err_flux_max"] = row.err_flux_max;
          r["newton_iterations"] = row.newton_iterations;
          rows.append(r);
        }
        py::dict out;
        out["rows"] = rows;
        out["fitted_order_p"] = table.fitted_order(&dafo::MmsRow::err_p);
        out["fitted_order_u"] = table.fitted_order(&dafo::MmsRow::err_u);
        return out;
      },
      py::arg("config"), py::arg("levels") = 4, py::arg("base_n") = 4,
      "Manufactured-solution convergence study on structured meshes");

  m.def("default_config",
        [] { return dafo::serialize_config(dafo::RunConfig{}); },
        "Canonical config text with all defaults");
}
