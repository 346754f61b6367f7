#include "psst/preference.hpp"

#include "psst/descent.hpp"

#include <cmath>

namespace psst {

std::vector<PreferenceVector> make_preference_vectors(double pi0, int k) {
  if (k < 1) throw ConfigError("make_preference_vectors: k must be >= 1");
  constexpr double kHalfPi = 1.5707963267948966;
  if (!(pi0 >= 0.0) || !(pi0 < kHalfPi))
    throw DegenerateInput("make_preference_vectors: pi0 outside [0, pi/2)");
  std::vector<PreferenceVector> pv(static_cast<size_t>(k) + 1);
  for (int i = 0; i <= k; ++i) {
    // The top angle is pinned to exactly pi/2.
    const double a =
        i == k ? kHalfPi : pi0 + (kHalfPi - pi0) * static_cast<double>(i) / k;
    pv[static_cast<size_t>(i)].angle = a;
    pv[static_cast<size_t>(i)].u = Eigen::Vector2d(std::cos(a), std::sin(a));
  }
  return pv;
}

std::vector<Subregion> make_subregions(const std::vector<PreferenceVector>& pv) {
  if (pv.size() < 2)
    throw DegenerateInput("make_subregions: need at least two vectors");
  std::vector<Subregion> out(pv.size() - 1);
  for (size_t i = 0; i + 1 < pv.size(); ++i)
    out[i] = Subregion{static_cast<int>(i), pv[i].angle, pv[i + 1].angle};
  return out;
}

std::pair<double, double> constraint_values(const Vector& losses,
                                            const Subregion& region) {
  const double s = losses.norm();
  if (!(s > 0)) throw DegenerateInput("constraint_values: zero loss vector");
  const double cos_phi = losses(0) / s;
  return {cos_phi - std::cos(region.lo), std::cos(region.hi) - cos_phi};
}

Vector cos_angle_gradient(const Vector& losses) {
  if (losses.size() < 2)
    throw DimensionError("cos_angle_gradient: need at least two tasks");
  const double s2 = losses.squaredNorm();
  if (!(s2 > 0)) throw DegenerateInput("cos_angle_gradient: zero loss vector");
  const double s3 = s2 * std::sqrt(s2);
  const double main = losses(0);
  const double aux2 = s2 - main * main;
  Vector g(losses.size());
  g(0) = aux2 / s3;
  for (Eigen::Index m = 1; m < losses.size(); ++m)
    g(m) = -main * losses(m) / s3;
  return g;
}

ConstraintGradients constraint_gradients(
    const std::vector<Vector>& task_gradients, const Vector& losses) {
  if (static_cast<Eigen::Index>(task_gradients.size()) != losses.size())
    throw DimensionError("constraint_gradients: gradient/loss count mismatch");
  const Vector coeff = cos_angle_gradient(losses);
  Vector gq = Vector::Zero(task_gradients[0].size());
  for (size_t m = 0; m < task_gradients.size(); ++m)
    gq += coeff(static_cast<Eigen::Index>(m)) * task_gradients[m];
  return ConstraintGradients{gq, -gq};
}

ConstraintGradients constraint_gradients(const ProblemDefinition& problem,
                                         const Vector& theta) {
  std::vector<Vector> grads(static_cast<size_t>(problem.tasks()));
  for (int m = 0; m < problem.tasks(); ++m)
    grads[static_cast<size_t>(m)] = problem.gradient(theta, m);
  return constraint_gradients(grads, problem.evaluate(theta));
}

ActiveSets activated_sets(const Vector& losses, const Subregion& region,
                          double active_eps) {
  const auto [q, r] = constraint_values(losses, region);
  return ActiveSets{q >= -active_eps, r >= -active_eps};
}

int region_of(double angle, const std::vector<Subregion>& regions) {
  for (const auto& reg : regions)
    if (angle >= reg.lo && angle <= reg.hi) return reg.index;
  return -1;
}

BalanceResult find_balance_point(const ProblemDefinition& problem,
                                 const Vector& theta0,
                                 const SolverConfig& config) {
  BalanceResult res;
  res.point = descend_to_pareto(problem, theta0, nullptr, config);
  res.pi0 = objective_angle(res.point.losses);
  res.u0 = Eigen::Vector2d(std::cos(res.pi0), std::sin(res.pi0));
  return res;
}

}  // namespace psst
