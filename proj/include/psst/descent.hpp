#pragma once

#include "psst/core.hpp"
#include "psst/min_norm.hpp"
#include "psst/preference.hpp"
#include "psst/problem.hpp"

namespace psst {

// Simplex weights of the min-norm solve, split by vector kind.
// omega covers the tasks; beta/gamma are the activated Q/R constraint weights
// (zero when the constraint was not included). All weights are >= 0 and sum
// to 1 up to solver tolerance.
struct Multipliers {
  Vector omega;
  double beta = 0.0;
  double gamma = 0.0;
};

struct DescentDirection {
  Vector d;            // joint descent direction; zero at stationarity
  double alpha = 0.0;  // max over included vectors v of v . d
  Multipliers multipliers;
  ActiveSets active;
  bool approx = false;  // min-norm solver hit its iteration cap
};

// Unconstrained multi-gradient direction: d is the negated min-norm point of
// the task-gradient hull. At a Pareto-stationary theta d == 0 and alpha == 0;
// otherwise alpha <= -0.5*||d||^2 and every task gradient g has g . d <= alpha
// (all up to the min-norm gap).
DescentDirection mgda_direction(const ProblemDefinition& problem,
                                const Vector& theta,
                                const SolverConfig& config);

// Same construction over hull{task gradients} u {activated constraint
// gradients} for one wedge.
DescentDirection constrained_direction(const ProblemDefinition& problem,
                                       const Vector& theta,
                                       const Subregion& region,
                                       const SolverConfig& config);

// Armijo backtracking on the worst per-task increase: accepts the largest
// eta = step_init * backtrack^j, j <= 60, with
//   max_m [L_m(theta + eta d) - L_m(theta)] <= armijo_c * eta * alpha
// and, when a region is given, no constraint inactive at theta ending beyond
// +active_eps. Requires alpha < 0. Throws LineSearchStall when the halvings
// are exhausted.
double line_search(const ProblemDefinition& problem, const Vector& theta,
                   const Vector& losses, const DescentDirection& dir,
                   const Subregion* region, const SolverConfig& config);

// Iterates direction + line search until ||d|| <= stationarity_tol, a stalled
// line search (treated as converged-as-is), or max_iters. With a region, any
// constraint violated beyond active_eps is first driven down by plain Armijo
// descent on its value before the joint direction takes over; those
// restoration steps count toward iters_used. Throws NonConvergence when
// max_iters is reached with stationarity still above 10x the tolerance.
// The returned point's kkt_weights/stationarity always certify against the
// task-gradient hull alone, so a wall-pinned iterate whose joint direction
// vanished reports an honestly large stationarity instead of a masked one.
ParetoPoint descend_to_pareto(const ProblemDefinition& problem,
                              const Vector& theta0, const Subregion* region,
                              const SolverConfig& config);

// Norm of the min-norm point of the task-gradient hull at theta.
double stationarity_measure(const ProblemDefinition& problem,
                            const Vector& theta, const SolverConfig& config);

}  // namespace psst
