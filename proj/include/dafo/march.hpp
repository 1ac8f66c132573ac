#ifndef DAFO_MARCH_HPP
#define DAFO_MARCH_HPP

#include <functional>
#include <vector>

#include "dafo/globalsys.hpp"
#include "dafo/integrate.hpp"

namespace dafo {

/// Data of the implicit Euler march: step size (already stored in the
/// problem coefficients), step count, and the initial transformed
/// pressure p^0 = |P^0| P^0 per element.
struct TimeSchedule {
  double dt = 1.0;
  int steps = 1;
  std::vector<double> p0;
};

/// One row of the discrete mass budget: all terms are rates (the storage
/// map C_K carries the 1/dt factor), so at every step
/// storage_change + outflux - source = 0 up to solver tolerance.
struct MassBudgetRow {
  int step = 0;
  double storage_change = 0.0;  // sum_K [C_K(p^k) - C_K(p^{k-1})]
  double outflux = 0.0;         // boundary outflux at step k
  double source = 0.0;          // sum_K int_K f_tilde^k
  double residual = 0.0;        // closure defect
};

struct MarchResult {
  std::vector<HybridState> trajectory;  // length steps + 1, [0] = initial
  std::vector<SolveReport> reports;     // one per step
  std::vector<MassBudgetRow> budget;    // one per step
};

/// Implicit Euler driver: every step solves the stationary hybrid problem
/// with the augmented source built from the previous pressures, warm
/// starting Newton from the previous state.
class TimeStepper {
public:
  /// `source` is f_tilde(x, t), `dirichlet` is g(x, t); the step size is
  /// problem.coefficients().dt.
  TimeStepper(Problem& problem, Variant variant,
              std::function<double(const Vec2&, double)> source,
              std::function<double(const Vec2&, double)> dirichlet,
              SolverOptions opts = {});

  /// Advance the converged state at index k-1 to index k. On Newton
  /// failure rethrows NewtonDiverged with a step-size hint.
  HybridState step(const HybridState& prev, int k,
                   SolveReport* report = nullptr);

  /// March `steps` implicit Euler steps from p0; the per-step callback
  /// (when set) observes each converged state, e.g. for field export.
  MarchResult run(const TimeSchedule& schedule,
                  const std::function<void(int, const HybridState&)>&
                      on_step = nullptr);

  Problem& problem() { return *problem_; }
  double dt() const { return problem_->coefficients().dt; }

private:
  /// int_K f_tilde(., t) dx for all elements.
  std::vector<double> source_integrals(double t) const;

  Problem* problem_;
  Variant variant_;
  std::function<double(const Vec2&, double)> source_;
  std::function<double(const Vec2&, double)> dirichlet_;
  SolverOptions opts_;
};

}  // namespace dafo

#endif
