// Command-line driver: steady solves, implicit Euler marches, equivalence
// verification, manufactured-solution convergence studies and mesh
// inspection, all configured through the sectioned key=value format
// described in the README.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dafo/config.hpp"
#include "dafo/equivcheck.hpp"
#include "dafo/errors.hpp"
#include "dafo/exportout.hpp"
#include "dafo/globalsys.hpp"
#include "dafo/integrate.hpp"
#include "dafo/march.hpp"
#include "dafo/mms.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string mesh_override;
  std::string variant_override;
  std::string out_override;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path,
                  "config file (sectioned key=value)");
  cmd->add_option("--mesh", args.mesh_override,
                  "mesh source override (structured:N | file:PATH)");
  cmd->add_option("--variant", args.variant_override,
                  "condensation variant (flux-only | closed-form | coupled)");
  cmd->add_option("--out", args.out_override, "output directory override");
}

dafo::RunConfig load(const CommonArgs& args) {
  dafo::RunConfig config;
  if (!args.config_path.empty()) config = dafo::load_config(args.config_path);
  if (!args.mesh_override.empty()) config.mesh = args.mesh_override;
  if (!args.variant_override.empty()) config.variant = args.variant_override;
  if (!args.out_override.empty()) config.output_dir = args.out_override;
  dafo::parse_variant(config.variant);  // validate early
  return config;
}

std::string base_dir(const std::string& config_path) {
  const auto pos = config_path.find_last_of('/');
  return pos == std::string::npos ? std::string() : config_path.substr(0, pos);
}

dafo::SolverOptions solver_options(const dafo::RunConfig& config,
                                   const dafo::RunSetup& setup) {
  dafo::SolverOptions opts;
  opts.global.abs_tol = config.abs_tol;
  opts.global.rel_tol = config.rel_tol;
  opts.global.max_iter = config.max_iter;
  opts.local.abs_tol = config.local_abs_tol;
  opts.local.max_iter = config.local_max_iter;
  opts.linear = setup.linear_direct ? dafo::LinearSolverKind::Direct
                                    : dafo::LinearSolverKind::ConjugateGradient;
  return opts;
}

dafo::Problem make_problem(const dafo::RunSetup& setup, double t = 0.0) {
  const auto& rule = dafo::quad_points(5);
  auto f_int = dafo::element_integrals(
      setup.mesh, rule,
      [&](const dafo::Vec2& x) { return setup.f(x.x(), x.y(), t); });
  auto g_mean = dafo::dirichlet_edge_means(
      setup.mesh,
      [&](const dafo::Vec2& x) { return setup.g(x.x(), x.y(), t); });
  return dafo::Problem(setup.mesh, setup.coefficients, std::move(f_int),
                       std::move(g_mean), setup.law);
}

int cmd_steady(const CommonArgs& args) {
  const dafo::RunConfig config = load(args);
  const dafo::RunSetup setup =
      dafo::materialize(config, base_dir(args.config_path));
  dafo::Problem problem = make_problem(setup);
  dafo::HybridState state = problem.initial_state(setup.variant);
  const dafo::SolverOptions opts = solver_options(config, setup);

  std::vector<dafo::NewtonTraceEntry> trace;
  const dafo::SolveReport report =
      dafo::newton_solve(problem, setup.variant, state, opts, &trace);

  dafo::export_fields(problem, state, config.output_dir);
  dafo::export_convergence_log(trace, config.output_dir);
  if (config.vtk) dafo::export_vtk(problem, state, config.output_dir);

  std::printf("steady solve (%s): %d iterations, residual %.3e\n",
              dafo::variant_name(setup.variant), report.iterations,
              report.residual);
  std::printf("flux continuity %.3e, element balance %.3e, global balance %.3e\n",
              dafo::max_flux_jump(problem, state),
              dafo::max_element_balance(problem, state),
              dafo::global_balance(problem, state));
  std::printf("wrote %s/{p,flux,log}.csv\n", config.output_dir.c_str());
  return 0;
}

int cmd_march(const CommonArgs& args) {
  const dafo::RunConfig config = load(args);
  const dafo::RunSetup setup =
      dafo::materialize(config, base_dir(args.config_path));
  dafo::Problem problem = make_problem(setup);
  const dafo::SolverOptions opts = solver_options(config, setup);

  dafo::TimeStepper stepper(
      problem, setup.variant,
      [&](const dafo::Vec2& x, double t) { return setup.f(x.x(), x.y(), t); },
      [&](const dafo::Vec2& x, double t) { return setup.g(x.x(), x.y(), t); },
      opts);

  dafo::TimeSchedule schedule;
  schedule.dt = config.dt;
  schedule.steps = config.steps;
  schedule.p0 = setup.initial_pressure();

  const bool per_step = config.per_step;
  const std::string dir = config.output_dir;
  const dafo::MarchResult result = stepper.run(
      schedule, [&](int k, const dafo::HybridState& state) {
        if (!per_step) return;
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, "_%04d", k);
        dafo::export_fields(problem, state, dir, suffix);
        if (config.vtk) dafo::export_vtk(problem, state, dir, suffix);
      });

  dafo::export_fields(problem, result.trajectory.back(), dir);
  if (config.vtk) dafo::export_vtk(problem, result.trajectory.back(), dir);

  dafo::ensure_directory(dir);
  std::ofstream budget(dir + "/budget.csv");
  budget << "step,storage_change,outflux,source,residual\n";
  budget.precision(17);
  for (const auto& row : result.budget)
    budget << row.step << "," << row.storage_change << "," << row.outflux
           << "," << row.source << "," << row.residual << "\n";

  std::printf("march (%s): %d steps of dt %.3g\n",
              dafo::variant_name(setup.variant), config.steps, config.dt);
  for (const auto& row : result.budget)
    std::printf("  step %d: budget residual %.3e\n", row.step, row.residual);
  std::printf("wrote %s/{p,flux,budget}.csv\n", dir.c_str());
  return 0;
}

int cmd_verify(const CommonArgs& args, double rel_tol) {
  const dafo::RunConfig config = load(args);
  const dafo::RunSetup setup =
      dafo::materialize(config, base_dir(args.config_path));
  dafo::Problem problem = make_problem(setup);
  dafo::HybridState state = problem.initial_state(setup.variant);
  const dafo::SolverOptions opts = solver_options(config, setup);
  dafo::newton_solve(problem, setup.variant, state, opts);

  const dafo::MixedFormReport thm = dafo::verify_mixed_form(problem, state);
  const dafo::ReconstructionReport lem = dafo::verify_reconstruction(problem, state);

  std::cout << thm.to_text() << lem.to_text();
  dafo::ensure_directory(config.output_dir);
  std::ofstream(config.output_dir + "/verify_mixed.csv") << thm.to_csv();
  std::ofstream(config.output_dir + "/verify_nonconforming.csv")
      << lem.to_csv();

  const bool pass = thm.pass(rel_tol) && lem.pass(rel_tol);
  std::printf("verification %s (tolerance %.1e x field scale)\n",
              pass ? "PASSED" : "FAILED", rel_tol);
  return pass ? 0 : 1;
}

int cmd_mms(const CommonArgs& args, int levels, int base_n) {
  const dafo::RunConfig config = load(args);
  const dafo::RunSetup setup =
      dafo::materialize(config, base_dir(args.config_path));
  if (setup.coefficients.alpha.empty())
    throw dafo::ParseError("mms needs at least one element");

  // The study runs on its own structured meshes; it uses the (constant)
  // coefficients of the config.
  dafo::ManufacturedCase mc;
  mc.alpha = setup.coefficients.alpha[0];
  mc.beta = setup.coefficients.beta[0];
  mc.gamma = setup.coefficients.gamma[0];
  mc.porosity = setup.coefficients.porosity[0];
  mc.dt = setup.coefficients.dt;

  dafo::SolverOptions opts = solver_options(config, setup);
  const dafo::MmsTable table =
      dafo::mms_study(levels, mc, setup.variant, opts, base_n);

  std::cout << table.to_text();
  dafo::ensure_directory(config.output_dir);
  std::ofstream(config.output_dir + "/mms.csv") << table.to_csv();
  std::printf("wrote %s/mms.csv\n", config.output_dir.c_str());
  return 0;
}

int cmd_mesh_info(const CommonArgs& args) {
  const dafo::RunConfig config = load(args);
  const dafo::RunSetup setup =
      dafo::materialize(config, base_dir(args.config_path));
  const dafo::Mesh& mesh = setup.mesh;
  std::printf("vertices  %d\n", mesh.num_vertices());
  std::printf("triangles %d\n", mesh.num_triangles());
  std::printf("edges     %d (%zu interior, %zu boundary)\n", mesh.num_edges(),
              mesh.interior_edges.size(), mesh.boundary_edges.size());
  double area = 0.0, hmin = 1e300, hmax = 0.0;
  for (int k = 0; k < mesh.num_triangles(); ++k) area += mesh.tri_area[k];
  for (int e = 0; e < mesh.num_edges(); ++e) {
    hmin = std::min(hmin, mesh.edge_length(e));
    hmax = std::max(hmax, mesh.edge_length(e));
  }
  std::printf("area      %.17g\n", area);
  std::printf("h         [%.3e, %.3e]\n", hmin, hmax);
  std::printf("Euler V-E+T = %d\n",
              mesh.num_vertices() - mesh.num_edges() + mesh.num_triangles());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybridized mixed FEM solver for Darcy-Forchheimer gas flow"};
  app.require_subcommand(1);

  CommonArgs steady_args, march_args, verify_args, mms_args, info_args;
  double verify_tol = 1e-8;
  int mms_levels = 4, mms_base = 4;

  add_common(app.add_subcommand("steady", "solve one stationary problem"),
             steady_args);
  add_common(app.add_subcommand("march", "implicit Euler time march"),
             march_args);
  auto* verify = app.add_subcommand(
      "verify", "solve, then check the mixed-form and nonconforming "
                "reconstruction identities");
  add_common(verify, verify_args);
  verify->add_option("--tol", verify_tol, "pass threshold relative to scale");
  auto* mms = app.add_subcommand(
      "mms", "manufactured-solution convergence study");
  add_common(mms, mms_args);
  mms->add_option("--levels", mms_levels, "number of refinement levels");
  mms->add_option("--base", mms_base, "coarsest structured mesh n");
  add_common(app.add_subcommand("mesh-info", "print mesh statistics"),
             info_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("steady")) return cmd_steady(steady_args);
    if (app.got_subcommand("march")) return cmd_march(march_args);
    if (app.got_subcommand("verify")) return cmd_verify(verify_args, verify_tol);
    if (app.got_subcommand("mms")) return cmd_mms(mms_args, mms_levels, mms_base);
    if (app.got_subcommand("mesh-info")) return cmd_mesh_info(info_args);
  } catch (const dafo::NewtonDiverged& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
