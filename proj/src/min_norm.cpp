#include "psst/min_norm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace psst {

namespace {

// Hull point for a weight vector.
Vector hull_point(const std::vector<Vector>& vs, const Vector& w) {
  Vector p = Vector::Zero(vs[0].size());
  for (size_t i = 0; i < vs.size(); ++i)
    if (w(static_cast<Eigen::Index>(i)) != 0.0)
      p += w(static_cast<Eigen::Index>(i)) * vs[i];
  return p;
}

// Replace w by the minimizer of ||Sum w_i v_i|| over the affine hull of the
// current support, walking to the simplex boundary and dropping a vertex
// whenever the affine solution leaves it (Wolfe's inner cycle). Each pass
// removes a vertex, so at most k passes run. Never increases the norm.
void correct_support(const Eigen::MatrixXd& gram, Vector& w) {
  const int k = static_cast<int>(w.size());
  for (int pass = 0; pass < k; ++pass) {
    std::vector<int> s;
    for (int i = 0; i < k; ++i)
      if (w(i) > 0.0) s.push_back(i);
    const int m = static_cast<int>(s.size());
    if (m <= 1) return;

    // KKT system of: minimize u^T G u subject to sum u = 1.
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) kkt(i, j) = gram(s[i], s[j]);
    kkt.col(m).head(m).setOnes();
    kkt.row(m).head(m).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
    rhs(m) = 1.0;
    // A duplicate vertex makes the system singular; the minimum-norm
    // least-squares solution is still an affine minimizer and is unique.
    const Eigen::VectorXd u =
        kkt.completeOrthogonalDecomposition().solve(rhs).head(m);

    if (u.minCoeff() >= 0.0) {
      for (int i = 0; i < m; ++i) w(s[i]) = u(i);
      return;
    }
    // Walk from w toward u until the first coordinate vanishes.
    int drop = -1;
    double tau = 1.0;
    for (int i = 0; i < m; ++i) {
      if (u(i) >= 0.0) continue;
      const double ti = w(s[i]) / (w(s[i]) - u(i));
      if (ti < tau) {
        tau = ti;
        drop = i;
      }
    }
    if (drop < 0) return;
    for (int i = 0; i < m; ++i)
      w(s[i]) = i == drop ? 0.0 : (1.0 - tau) * w(s[i]) + tau * u(i);
  }
}

}  // namespace

MinNormResult min_norm_in_hull(const std::vector<Vector>& vs, double fw_tol,
                               int fw_max_iters) {
  const int k = static_cast<int>(vs.size());
  if (k == 0) throw DegenerateInput("min_norm_in_hull: empty vector list");
  const Eigen::Index n = vs[0].size();
  for (const auto& v : vs)
    if (v.size() != n)
      throw DimensionError("min_norm_in_hull: mixed vector lengths");
  if (!(fw_tol > 0) || fw_max_iters < 1)
    throw ConfigError("min_norm_in_hull: bad tolerance or iteration cap");

  MinNormResult res;
  if (k == 1) {
    res.weights = Vector::Ones(1);
    res.point = vs[0];
    res.gap = 0.0;
    return res;
  }

  if (k == 2) {
    // Exact projection of the origin onto the segment [v0, v1].
    const Vector diff = vs[0] - vs[1];
    const double len2 = diff.squaredNorm();
    double gamma = len2 > 0 ? vs[0].dot(diff) / len2 : 0.0;
    gamma = std::clamp(gamma, 0.0, 1.0);
    res.weights = Vector(2);
    res.weights << 1.0 - gamma, gamma;
    res.point = hull_point(vs, res.weights);
    const double pp = res.point.squaredNorm();
    res.gap = std::max(0.0, pp - std::min(vs[0].dot(res.point),
                                          vs[1].dot(res.point)));
    res.converged = res.gap <= fw_tol;
    return res;
  }

  Eigen::MatrixXd gram(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) gram(i, j) = gram(j, i) = vs[i].dot(vs[j]);

  // Start at the shortest vertex, lowest index on ties.
  int start = 0;
  for (int i = 1; i < k; ++i)
    if (gram(i, i) < gram(start, start)) start = i;
  Vector w = Vector::Zero(k);
  w(start) = 1.0;

  // Each iteration: a pairwise step moves weight from the heaviest-ascent
  // support vertex onto the best descent vertex (exact segment minimizer),
  // then the support is polished to its exact affine minimizer. The pairwise
  // step alone crawls at rate 1 - O(margin^2) when the support is nearly
  // collinear; the polish makes every pass land on a support-optimal point,
  // so termination is finite rather than merely linear.
  int iter = 0;
  for (; iter < fw_max_iters; ++iter) {
    const Vector gw = gram * w;   // gw(i) = v_i . p
    const double pp = w.dot(gw);  // ||p||^2
    int t = 0;
    for (int i = 1; i < k; ++i)
      if (gw(i) < gw(t)) t = i;
    if (std::max(0.0, pp - gw(t)) <= fw_tol) break;
    int a = -1;
    for (int i = 0; i < k; ++i)
      if (w(i) > 0.0 && (a < 0 || gw(i) > gw(a))) a = i;
    if (a < 0 || a == t) break;
    // Exact minimizer of ||p + g (v_t - v_a)|| over g in [0, w_a].
    const double denom = gram(t, t) - 2.0 * gram(t, a) + gram(a, a);
    if (denom > 0.0) {
      const double gamma = std::min((gw(a) - gw(t)) / denom, w(a));
      if (gamma <= 0.0) break;
      w(t) += gamma;
      w(a) = gamma == w(a) ? 0.0 : w(a) - gamma;
    }
    correct_support(gram, w);
  }

  // Final quantities recomputed from the weights.
  const Vector gw = gram * w;
  const double pp = w.dot(gw);
  res.gap = std::max(0.0, pp - gw.minCoeff());
  res.weights = w;
  res.point = hull_point(vs, w);
  res.iters = iter;
  res.converged = res.gap <= fw_tol;
  return res;
}

}  // namespace psst
