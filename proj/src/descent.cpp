#include "psst/descent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace psst {

namespace {

constexpr int kMaxHalvings = 60;

// The min-norm solve must resolve hull points well below the stationarity
// tolerance, so the descent loop tightens the gap target beyond the
// reporting tolerance fw_tol.
double inner_fw_tol(const SolverConfig& config) {
  return std::min(config.fw_tol,
                  0.25 * config.stationarity_tol * config.stationarity_tol);
}

std::vector<Vector> task_gradients(const ProblemDefinition& problem,
                                   const Vector& theta) {
  std::vector<Vector> grads(static_cast<size_t>(problem.tasks()));
  for (int m = 0; m < problem.tasks(); ++m)
    grads[static_cast<size_t>(m)] = problem.gradient(theta, m);
  return grads;
}

DescentDirection assemble_direction(const std::vector<Vector>& vectors,
                                    int tasks, ActiveSets active,
                                    const SolverConfig& config) {
  const MinNormResult mn =
      min_norm_in_hull(vectors, inner_fw_tol(config), config.fw_max_iters);
  DescentDirection dir;
  dir.d = -mn.point;
  double alpha = -std::numeric_limits<double>::infinity();
  for (const auto& v : vectors) alpha = std::max(alpha, v.dot(dir.d));
  dir.alpha = alpha;
  dir.active = active;
  dir.approx = mn.gap > config.fw_tol;
  dir.multipliers.omega = mn.weights.head(tasks);
  int next = tasks;
  if (active.q_active) dir.multipliers.beta = mn.weights(next++);
  if (active.r_active) dir.multipliers.gamma = mn.weights(next++);
  return dir;
}

Vector kkt_from(const Multipliers& mult) {
  const double s = mult.omega.sum();
  if (s > 1e-12) return mult.omega / s;
  return Vector::Constant(mult.omega.size(), 1.0 / mult.omega.size());
}

// The joint direction can vanish while a wall multiplier carries weight, so
// the reported certificate is always re-derived from the task hull alone:
// kkt_weights and stationarity then witness Pareto stationarity itself, not
// just constrained stationarity. Without constraints the two coincide.
ParetoPoint make_point(const ProblemDefinition& problem, Vector theta,
                       Vector losses, const DescentDirection& dir,
                       double stationarity, int iters, const Subregion* region,
                       const SolverConfig& config) {
  ParetoPoint p;
  p.theta = std::move(theta);
  p.losses = std::move(losses);
  if (region == nullptr) {
    p.kkt_weights = kkt_from(dir.multipliers);
    p.stationarity = stationarity;
  } else {
    const MinNormResult mn =
        min_norm_in_hull(task_gradients(problem, p.theta), inner_fw_tol(config),
                         config.fw_max_iters);
    p.kkt_weights = mn.weights;
    p.stationarity = mn.point.norm();
  }
  p.angle = objective_angle(p.losses);
  p.iters_used = iters;
  p.region_index = region ? region->index : -1;
  return p;
}

// Armijo backtracking on a scalar constraint value along its negative
// gradient. Returns the accepted trial point, or nothing on a stall.
bool restoration_step(const ProblemDefinition& problem, Vector& theta,
                      double value, const Vector& grad, bool use_q,
                      const Subregion& region, const SolverConfig& config) {
  const double slope = -grad.squaredNorm();
  if (!(slope < 0)) return false;
  double eta = config.step_init;
  for (int j = 0; j <= kMaxHalvings; ++j, eta *= config.backtrack) {
    const Vector trial = theta - eta * grad;
    double trial_value;
    try {
      const Vector tl = problem.evaluate(trial);
      if (!tl.allFinite()) continue;
      const auto [tq, tr] = constraint_values(tl, region);
      trial_value = use_q ? tq : tr;
    } catch (const Error&) {
      continue;
    }
    if (trial_value - value <= config.armijo_c * eta * slope) {
      theta = trial;
      return true;
    }
  }
  return false;
}

}  // namespace

DescentDirection mgda_direction(const ProblemDefinition& problem,
                                const Vector& theta,
                                const SolverConfig& config) {
  return assemble_direction(task_gradients(problem, theta), problem.tasks(),
                            ActiveSets{}, config);
}

DescentDirection constrained_direction(const ProblemDefinition& problem,
                                       const Vector& theta,
                                       const Subregion& region,
                                       const SolverConfig& config) {
  std::vector<Vector> vectors = task_gradients(problem, theta);
  const Vector losses = problem.evaluate(theta);
  const ActiveSets active = activated_sets(losses, region, config.active_eps);
  if (active.q_active || active.r_active) {
    const ConstraintGradients cg = constraint_gradients(vectors, losses);
    if (active.q_active) vectors.push_back(cg.q);
    if (active.r_active) vectors.push_back(cg.r);
  }
  return assemble_direction(vectors, problem.tasks(), active, config);
}

double line_search(const ProblemDefinition& problem, const Vector& theta,
                   const Vector& losses, const DescentDirection& dir,
                   const Subregion* region, const SolverConfig& config) {
  if (!(dir.alpha < 0))
    throw DegenerateInput("line_search: needs a negative alpha");
  // Constraints inactive at theta must stay below +active_eps after the step.
  bool guard_q = false, guard_r = false;
  if (region) {
    const ActiveSets active =
        activated_sets(losses, *region, config.active_eps);
    guard_q = !active.q_active;
    guard_r = !active.r_active;
  }
  double eta = config.step_init;
  for (int j = 0; j <= kMaxHalvings; ++j, eta *= config.backtrack) {
    const Vector trial = theta + eta * dir.d;
    Vector tl;
    try {
      tl = problem.evaluate(trial);
    } catch (const Error&) {
      continue;
    }
    if (!tl.allFinite()) continue;
    const double worst = (tl - losses).maxCoeff();
    if (worst > config.armijo_c * eta * dir.alpha) continue;
    if (region && (guard_q || guard_r)) {
      const auto [tq, tr] = constraint_values(tl, *region);
      if (guard_q && tq > config.active_eps) continue;
      if (guard_r && tr > config.active_eps) continue;
    }
    return eta;
  }
  throw LineSearchStall("line_search: no admissible step after " +
                        std::to_string(kMaxHalvings) + " halvings");
}

ParetoPoint descend_to_pareto(const ProblemDefinition& problem,
                              const Vector& theta0, const Subregion* region,
                              const SolverConfig& config) {
  config.validate();
  if (theta0.size() != problem.dim())
    throw DimensionError("descend_to_pareto: parameter length mismatch");

  Vector theta = theta0;
  int accepted = 0;
  bool restoration_blocked = false;

  for (;;) {
    const Vector losses = problem.evaluate(theta);

    // Drive strictly violated wedge constraints down before the joint
    // direction takes over; without this, a seed that reaches the front
    // outside its wedge is already task-stationary and can never enter it.
    if (region && !restoration_blocked && accepted < config.max_iters) {
      const auto [q, r] = constraint_values(losses, *region);
      if (q > config.active_eps || r > config.active_eps) {
        const bool use_q = q > config.active_eps;
        const ConstraintGradients cg =
            constraint_gradients(task_gradients(problem, theta), losses);
        if (restoration_step(problem, theta, use_q ? q : r,
                             use_q ? cg.q : cg.r, use_q, *region, config)) {
          ++accepted;
          continue;
        }
        restoration_blocked = true;
      }
    }

    const DescentDirection dir =
        region ? constrained_direction(problem, theta, *region, config)
               : mgda_direction(problem, theta, config);
    const double stat = dir.d.norm();

    if (stat <= config.stationarity_tol)
      return make_point(problem, theta, losses, dir, stat, accepted, region, config);

    if (accepted >= config.max_iters) {
      ParetoPoint p = make_point(problem, theta, losses, dir, stat, accepted, region, config);
      if (stat > 10.0 * config.stationarity_tol)
        throw NonConvergence("descend_to_pareto: max_iters reached at "
                             "stationarity " + std::to_string(stat),
                             std::move(p));
      return p;
    }

    if (!(dir.alpha < 0))  // min-norm noise floor; cannot certify descent
      return make_point(problem, theta, losses, dir, stat, accepted, region, config);

    double eta;
    try {
      eta = line_search(problem, theta, losses, dir, region, config);
    } catch (const LineSearchStall&) {
      return make_point(problem, theta, losses, dir, stat, accepted, region, config);
    }
    theta += eta * dir.d;
    ++accepted;
  }
}

double stationarity_measure(const ProblemDefinition& problem,
                            const Vector& theta, const SolverConfig& config) {
  return min_norm_in_hull(task_gradients(problem, theta), inner_fw_tol(config),
                          config.fw_max_iters)
      .point.norm();
}

}  // namespace psst
