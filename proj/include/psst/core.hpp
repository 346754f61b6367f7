#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace psst {

using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mismatched vector lengths or task counts.
struct DimensionError : Error {
  using Error::Error;
};

// Inputs outside the domain of an operation (all-zero losses, empty hulls, ...).
struct DegenerateInput : Error {
  using Error::Error;
};

// Invalid solver configuration or CLI arguments.
struct ConfigError : Error {
  using Error::Error;
};

// Backtracking line search exhausted its halvings without an admissible step.
// Descent loops treat the current iterate as converged-as-is.
struct LineSearchStall : Error {
  using Error::Error;
};

// Requested result does not exist (e.g. analytic front of the MLP problem).
struct NoSolution : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Solver configuration
// ---------------------------------------------------------------------------

struct SolverConfig {
  // Armijo backtracking.
  double step_init = 1.0;
  double armijo_c = 1e-4;
  double backtrack = 0.5;

  // Descent loop.
  double stationarity_tol = 1e-6;
  int max_iters = 5000;

  // Preference-region constraint activation band, in cos units.
  double active_eps = 1e-3;

  // Frank-Wolfe min-norm solver.
  double fw_tol = 1e-9;
  int fw_max_iters = 500;

  // Krylov (MINRES) tangent solve.
  double krylov_tol = 1e-6;
  int krylov_max_iters = 50;

  // Front exploration.
  double expand_step = 0.1;
  double novelty_delta = 1e-3;
  int k_regions = 5;
  int region_budget = 20;

  std::uint64_t master_seed = 0;
  bool warm_start = false;  // seed each region from the balance point
  bool use_regions = true;  // false: unrestricted exploration ablation

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Points and point sets
// ---------------------------------------------------------------------------

struct ParetoPoint {
  Vector theta;
  Vector losses;       // one loss per task, task 0 is the main task
  Vector kkt_weights;  // simplex weights over tasks at convergence
  double angle = 0.0;  // objective_angle(losses)
  double stationarity = 0.0;  // norm of the final descent direction
  int iters_used = 0;         // accepted descent steps
  int region_index = -1;      // -1: no region attached
};

struct ParetoSet {
  int region_index = -1;
  std::vector<ParetoPoint> points;  // insertion order
  bool failed = false;              // descent of the region seed failed
};

// Hit max_iters while still far from stationarity; carries the best iterate.
struct NonConvergence : Error {
  NonConvergence(const std::string& what, ParetoPoint best_iterate)
      : Error(what), best(std::move(best_iterate)) {}
  ParetoPoint best;
};

// ---------------------------------------------------------------------------
// Objective-space operations
// ---------------------------------------------------------------------------

// Strict Pareto dominance: a_m <= b_m for all m and a != b.
bool dominates(const Vector& a, const Vector& b);

// Main-to-auxiliary loss ratio L_0 / sum_{m>=1} L_m.
// Throws DegenerateInput when the auxiliary sum vanishes.
double rho(const Vector& losses);

// Angle of the loss vector against the main-task axis:
//   atan2(||(L_1..L_{M-1})||_2, L_0), in [0, pi/2] for non-negative losses.
// Throws DegenerateInput on an all-zero loss vector.
double objective_angle(const Vector& losses);

// ---------------------------------------------------------------------------
// Deterministic RNG helpers
// ---------------------------------------------------------------------------
// Distributions are hand-rolled on mt19937_64 output so streams do not depend
// on the standard library's distribution implementations.

std::uint64_t split_mix64(std::uint64_t x);

// Seed for region i derived from the master seed.
std::uint64_t region_seed(std::uint64_t master_seed, int region_index);

// Uniform double in [0, 1) with 53 random bits.
double uniform_unit(std::mt19937_64& rng);

// Vector with i.i.d. uniform entries in [lo, hi).
Vector uniform_vector(std::mt19937_64& rng, int n, double lo, double hi);

}  // namespace psst
