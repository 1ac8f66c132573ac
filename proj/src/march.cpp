#include "dafo/march.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dafo/errors.hpp"

namespace dafo {

TimeStepper::TimeStepper(Problem& problem, Variant variant,
                         std::function<double(const Vec2&, double)> source,
                         std::function<double(const Vec2&, double)> dirichlet,
                         SolverOptions opts)
    : problem_(&problem),
      variant_(variant),
      source_(std::move(source)),
      dirichlet_(std::move(dirichlet)),
      opts_(opts) {}

std::vector<double> TimeStepper::source_integrals(double t) const {
  const QuadratureRule& rule = quad_points(problem_->quad_degree());
  return element_integrals(problem_->mesh(), rule,
                           [&](const Vec2& x) { return source_(x, t); });
}

HybridState TimeStepper::step(const HybridState& prev, int k,
                              SolveReport* report) {
  const Mesh& mesh = problem_->mesh();
  const double t = k * dt();

  // Augmented source f^k = f_tilde^k + (phi/dt) gamma^{k-1} R-term(p^{k-1});
  // gamma is time-constant here, so the previous cell law applies.
  std::vector<double> f_int = source_integrals(t);
  for (int kk = 0; kk < mesh.num_triangles(); ++kk)
    f_int[kk] = augmented_source(problem_->element(kk).cell_law(),
                                 prev.p[kk], f_int[kk]);
  problem_->set_source_integrals(std::move(f_int));
  problem_->set_dirichlet_means(dirichlet_edge_means(
      mesh, [&](const Vec2& x) { return dirichlet_(x, t); }));

  HybridState state = prev;  // warm start
  for (int e : mesh.boundary_edges) state.mu[e] = problem_->dirichlet_mean(e);
  state.time_index = k;
  try {
    const SolveReport rep = newton_solve(*problem_, variant_, state, opts_);
    if (report) *report = rep;
  } catch (const NewtonDiverged& err) {
    throw NewtonDiverged("time step " + std::to_string(k) + " (t = " +
                             std::to_string(t) + ") diverged: " + err.what() +
                             "; consider reducing dt",
                         err.last_residual, err.iterations);
  }
  return state;
}

MarchResult TimeStepper::run(
    const TimeSchedule& schedule,
    const std::function<void(int, const HybridState&)>& on_step) {
  const Mesh& mesh = problem_->mesh();
  if (static_cast<int>(schedule.p0.size()) != mesh.num_triangles())
    throw std::invalid_argument("initial pressure vector has wrong size");
  if (schedule.steps < 1)
    throw std::invalid_argument("schedule needs at least one step");
  if (schedule.dt != dt())
    throw std::invalid_argument(
        "schedule dt does not match the problem coefficients");

  MarchResult result;
  result.trajectory.reserve(schedule.steps + 1);

  HybridState init = problem_->initial_state(variant_);
  init.p = schedule.p0;
  result.trajectory.push_back(init);
  if (on_step) on_step(0, init);

  for (int k = 1; k <= schedule.steps; ++k) {
    SolveReport report;
    HybridState state = step(result.trajectory.back(), k, &report);

    MassBudgetRow row;
    row.step = k;
    const HybridState& prev = result.trajectory.back();
    for (int kk = 0; kk < mesh.num_triangles(); ++kk) {
      const CellLaw& law = problem_->element(kk).cell_law();
      row.storage_change += law.eval(state.p[kk]) - law.eval(prev.p[kk]);
    }
    row.outflux = boundary_outflux(*problem_, state);
    const std::vector<double> ftilde = source_integrals(k * dt());
    for (double v : ftilde) row.source += v;
    row.residual = row.storage_change + row.outflux - row.source;

    result.budget.push_back(row);
    result.reports.push_back(std::move(report));
    result.trajectory.push_back(std::move(state));
    if (on_step) on_step(k, result.trajectory.back());
  }
  return result;
}

}  // namespace dafo
