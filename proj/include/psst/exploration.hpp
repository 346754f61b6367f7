#pragma once

#include "psst/core.hpp"
#include "psst/descent.hpp"
#include "psst/preference.hpp"
#include "psst/problem.hpp"

#include <functional>

namespace psst {

struct KrylovResult {
  Vector x;
  double rel_residual = 0.0;
  int iters = 0;
  bool converged = true;
};

// MINRES for a symmetric (possibly indefinite) operator given only through
// matrix-vector products. Stops at ||Ax - b|| <= tol * ||b||.
KrylovResult minres(const std::function<Vector(const Vector&)>& apply,
                    const Vector& b, double tol, int max_iters);

struct TangentSolve {
  Vector tangent;            // unit-norm direction; empty when null_tangent
  Vector beta;               // objective-space probe weights used
  double rel_residual = 0.0; // Krylov relative residual
  int iters = 0;
  bool null_tangent = false; // right-hand side vanished: no first-order motion
};

// Hessian-vector product of the lambda-weighted total loss. Uses the
// problem's exact product when available, else central differences with
// eps = 1e-5 * (1 + ||theta||) / (1 + ||v||).
Vector hessian_vector(const ProblemDefinition& problem, const Vector& theta,
                      const Vector& lambda, const Vector& v);

// First-order Pareto-set motion at a stationary point: solves
//   H(theta) t = sum_m beta_m grad L_m(theta),  H = sum_m lambda_m H_m
// with MINRES and returns t normalized. lambda comes from the point's KKT
// weights. A vanishing right-hand side is reported as null_tangent.
TangentSolve tangent_direction(const ProblemDefinition& problem,
                               const ParetoPoint& at, const Vector& beta,
                               const SolverConfig& config);

// Probe weights for expanding around a point: the main-task axis projected
// orthogonal to the KKT weights, normalized, and its negation. Falls back to
// the second axis when the KKT weights are parallel to the main axis.
std::vector<Vector> choose_betas(const Vector& kkt_weights);

// Per-region bookkeeping.
struct RegionStats {
  int region_index = -1;
  long descent_iters = 0;
  long tangent_solves = 0;
  int points_found = 0;
  bool failed = false;
};

// One expansion around `from`: for each probe beta, take a tangent step of
// length expand_step, correct with descend_to_pareto, and keep the result iff
// it is stationary within tolerance, inside the region (when given), and at
// objective distance >= novelty_delta from every point in `existing` and
// every point already accepted this call. Per-candidate failures are
// swallowed. Stops early once `max_new` points are accepted so no correction
// is spent on candidates the caller cannot keep. Returns 0..2 points in
// probe order.
std::vector<ParetoPoint> expand_point(const ProblemDefinition& problem,
                                      const ParetoPoint& from,
                                      const ParetoSet& existing,
                                      const Subregion* region,
                                      const SolverConfig& config,
                                      RegionStats& stats, int max_new = 2);

// Seed descent followed by FIFO breadth-first expansion until the queue
// drains or the set reaches `budget` points. A failed seed descent yields an
// empty set with the failed flag raised.
ParetoSet explore_region(const ProblemDefinition& problem, const Vector& seed,
                         const Subregion* region, int budget,
                         const SolverConfig& config, RegionStats& stats);

struct ExplorationReport {
  BalanceResult balance;
  std::vector<Subregion> regions;   // empty in the unrestricted ablation
  std::vector<ParetoSet> sets;      // ascending region index
  std::vector<RegionStats> stats;   // aligned with sets
  ParetoPoint best;
  bool best_valid = false;
  long total_descent_iters = 0;
  long total_tangent_solves = 0;
  int total_points = 0;
  double wall_seconds = 0.0;  // measured; excluded from serialized artifacts
};

// Full pipeline: balance point from the master seed, preference vectors at
// the balance angle, one exploration per wedge from fresh per-region seeds
// (or the balance point with warm_start). With use_regions = false a single
// unrestricted exploration of k_regions * region_budget points runs from the
// balance point instead. Regions may run on `threads` workers; results merge
// in region order, so output is independent of thread count.
// Per-region failures are recorded in the report and the run continues;
// NoSolution is thrown only when every region came back empty.
ExplorationReport psst_run(const ProblemDefinition& problem,
                           const SolverConfig& config, int threads = 1);

// Lowest main-task loss across all sets; ties resolve to the lower region
// index, then earlier insertion. Throws NoSolution when every set is empty.
const ParetoPoint& select_best(const std::vector<ParetoSet>& sets);

}  // namespace psst
