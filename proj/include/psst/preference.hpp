#pragma once

#include "psst/core.hpp"
#include "psst/problem.hpp"

#include <utility>

namespace psst {

// A preference direction in the (main, auxiliary) objective plane.
struct PreferenceVector {
  double angle = 0.0;       // in [pi0, pi/2]
  Eigen::Vector2d u{0, 0};  // (cos angle, sin angle)
};

// Angular wedge [lo, hi] between two adjacent preference vectors.
struct Subregion {
  int index = 0;
  double lo = 0.0;
  double hi = 0.0;
};

// Which of a subregion's two constraints are within the activation band.
struct ActiveSets {
  bool q_active = false;  // lower-angle constraint Q
  bool r_active = false;  // upper-angle constraint R
};

struct BalanceResult {
  ParetoPoint point;        // unconstrained Pareto-stationary point
  double pi0 = 0.0;         // objective angle at the balance point
  Eigen::Vector2d u0{0, 0};
};

// K+1 angles evenly spaced from pi0 to pi/2 inclusive; the last entry is
// exactly pi/2. Requires k >= 1 and pi0 in [0, pi/2).
std::vector<PreferenceVector> make_preference_vectors(double pi0, int k);

// The K wedges between consecutive preference vectors.
std::vector<Subregion> make_subregions(const std::vector<PreferenceVector>& pv);

// Constraint values (Q, R) of a loss vector against a wedge:
//   Q = cos(objective_angle) - cos(lo),  R = cos(hi) - cos(objective_angle).
// Both are <= 0 exactly when the angle lies in [lo, hi].
std::pair<double, double> constraint_values(const Vector& losses,
                                            const Subregion& region);

// Gradient of cos(objective_angle(L)) with respect to the losses.
Vector cos_angle_gradient(const Vector& losses);

struct ConstraintGradients {
  Vector q;
  Vector r;  // always -q
};

// Chain rule through the losses: grad Q = sum_m dcos/dL_m * grad L_m.
// The wedge bounds are constants, so the gradient is region-independent.
ConstraintGradients constraint_gradients(const std::vector<Vector>& task_gradients,
                                         const Vector& losses);

// Convenience overload that evaluates the task gradients itself.
ConstraintGradients constraint_gradients(const ProblemDefinition& problem,
                                         const Vector& theta);

// Constraints with value >= -active_eps count as activated.
ActiveSets activated_sets(const Vector& losses, const Subregion& region,
                          double active_eps);

// Lowest-index region whose closed wedge contains the angle; -1 if none.
int region_of(double angle, const std::vector<Subregion>& regions);

// Unconstrained descent to a Pareto-stationary point, then the objective
// angle there. Propagates NonConvergence from the descent.
BalanceResult find_balance_point(const ProblemDefinition& problem,
                                 const Vector& theta0,
                                 const SolverConfig& config);

}  // namespace psst
