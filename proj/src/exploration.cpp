#include "psst/exploration.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <thread>

namespace psst {

KrylovResult minres(const std::function<Vector(const Vector&)>& apply,
                    const Vector& b, double tol, int max_iters) {
  KrylovResult res;
  const Eigen::Index n = b.size();
  res.x = Vector::Zero(n);
  const double beta1 = b.norm();
  if (beta1 == 0.0) {
    res.rel_residual = 0.0;
    return res;
  }

  // Lanczos pair and the off-diagonal coupling them (beta_1 = 0).
  Vector v_prev = Vector::Zero(n);
  Vector v = b / beta1;
  double beta = 0.0;
  // Last two Givens rotations.
  double c1 = 1.0, s1 = 0.0, c2 = 1.0, s2 = 0.0;
  // Last two solution-update directions.
  Vector d_prev = Vector::Zero(n), d_prev2 = Vector::Zero(n);
  double phibar = beta1;

  int j = 0;
  for (; j < max_iters; ++j) {
    Vector w = apply(v);
    if (w.size() != n) throw DimensionError("minres: operator changed size");
    const double alpha = v.dot(w);
    w -= alpha * v + beta * v_prev;
    const double beta_next = w.norm();

    // Apply the two previous rotations to the new tridiagonal column.
    const double eps_j = s2 * beta;
    const double delta = c2 * beta;
    const double delta_hat = c1 * delta + s1 * alpha;
    const double gamma_bar = -s1 * delta + c1 * alpha;
    const double gamma = std::hypot(gamma_bar, beta_next);
    if (gamma == 0.0) break;  // exact breakdown: b lies in an invariant space
    const double c = gamma_bar / gamma;
    const double s = beta_next / gamma;

    const Vector d = (v - delta_hat * d_prev - eps_j * d_prev2) / gamma;
    res.x += c * phibar * d;
    phibar = -s * phibar;

    d_prev2 = d_prev;
    d_prev = d;
    c2 = c1;
    s2 = s1;
    c1 = c;
    s1 = s;

    if (std::abs(phibar) <= tol * beta1) {
      ++j;
      break;
    }
    if (beta_next == 0.0) {
      ++j;
      break;  // Krylov space exhausted
    }
    v_prev = v;
    v = w / beta_next;
    beta = beta_next;
  }

  res.iters = j;
  res.rel_residual = std::abs(phibar) / beta1;
  res.converged = res.rel_residual <= tol;
  return res;
}

Vector hessian_vector(const ProblemDefinition& problem, const Vector& theta,
                      const Vector& lambda, const Vector& v) {
  if (lambda.size() != problem.tasks())
    throw DimensionError("hessian_vector: weight length mismatch");
  if (v.size() != problem.dim() || theta.size() != problem.dim())
    throw DimensionError("hessian_vector: vector length mismatch");
  if (problem.has_hvp()) return problem.hvp(theta, lambda, v);

  const double vnorm = v.norm();
  if (vnorm == 0.0) return Vector::Zero(problem.dim());
  const double eps = 1e-5 * (1.0 + theta.norm()) / (1.0 + vnorm);
  auto weighted_grad = [&](const Vector& at) {
    Vector g = Vector::Zero(problem.dim());
    for (int m = 0; m < problem.tasks(); ++m)
      if (lambda(m) != 0.0) g += lambda(m) * problem.gradient(at, m);
    return g;
  };
  return (weighted_grad(theta + eps * v) - weighted_grad(theta - eps * v)) /
         (2.0 * eps);
}

TangentSolve tangent_direction(const ProblemDefinition& problem,
                               const ParetoPoint& at, const Vector& beta,
                               const SolverConfig& config) {
  if (beta.size() != problem.tasks())
    throw DimensionError("tangent_direction: beta length mismatch");
  TangentSolve ts;
  ts.beta = beta;

  double scale = 0.0;
  Vector rhs = Vector::Zero(problem.dim());
  for (int m = 0; m < problem.tasks(); ++m) {
    const Vector g = problem.gradient(at.theta, m);
    scale = std::max(scale, g.norm());
    rhs += beta(m) * g;
  }
  // Below this, beta excites no objective motion resolvable above the
  // stationarity noise of the point itself.
  const double null_tol =
      10.0 * std::sqrt(problem.tasks()) * at.stationarity +
      1e-12 * std::max(1.0, scale);
  if (rhs.norm() <= null_tol) {
    ts.null_tangent = true;
    return ts;
  }

  const KrylovResult kr = minres(
      [&](const Vector& v) {
        return hessian_vector(problem, at.theta, at.kkt_weights, v);
      },
      rhs, config.krylov_tol, config.krylov_max_iters);
  ts.rel_residual = kr.rel_residual;
  ts.iters = kr.iters;
  const double tn = kr.x.norm();
  if (tn <= 1e-14) {
    ts.null_tangent = true;
    return ts;
  }
  ts.tangent = kr.x / tn;
  return ts;
}

std::vector<Vector> choose_betas(const Vector& kkt_weights) {
  const Eigen::Index m = kkt_weights.size();
  if (m < 2) throw DimensionError("choose_betas: need at least two tasks");
  const double norm = kkt_weights.norm();
  if (!(norm > 0)) throw DegenerateInput("choose_betas: zero KKT weights");
  const Vector lhat = kkt_weights / norm;
  for (Eigen::Index axis = 0; axis < 2; ++axis) {
    Vector b = Vector::Zero(m);
    b(axis) = 1.0;
    b -= lhat(axis) * lhat;
    const double bn = b.norm();
    if (bn > 1e-9) {
      b /= bn;
      return {b, -b};
    }
  }
  throw DegenerateInput("choose_betas: weights aligned with both probe axes");
}

namespace {

bool inside_region(const Vector& losses, const Subregion& region,
                   double active_eps) {
  const auto [q, r] = constraint_values(losses, region);
  if (q > active_eps || r > active_eps) return false;
  // The cos-unit band is wider than the angular one by 1/sin(phi), so points
  // passing the constraint test could still sit more than active_eps of angle
  // below the wedge; the band promised to consumers is angular.
  const double phi = objective_angle(losses);
  return phi >= region.lo - active_eps && phi <= region.hi + active_eps;
}

bool novel(const Vector& losses, const ParetoSet& existing,
           const std::vector<ParetoPoint>& fresh, double delta) {
  for (const auto& p : existing.points)
    if ((p.losses - losses).norm() < delta) return false;
  for (const auto& p : fresh)
    if ((p.losses - losses).norm() < delta) return false;
  return true;
}

}  // namespace

std::vector<ParetoPoint> expand_point(const ProblemDefinition& problem,
                                      const ParetoPoint& from,
                                      const ParetoSet& existing,
                                      const Subregion* region,
                                      const SolverConfig& config,
                                      RegionStats& stats, int max_new) {
  std::vector<ParetoPoint> out;
  for (const Vector& beta : choose_betas(from.kkt_weights)) {
    if (static_cast<int>(out.size()) >= max_new) break;
    ++stats.tangent_solves;
    TangentSolve ts;
    try {
      ts = tangent_direction(problem, from, beta, config);
    } catch (const Error&) {
      continue;
    }
    if (ts.null_tangent) continue;

    const Vector start = from.theta + config.expand_step * ts.tangent;
    ParetoPoint p;
    try {
      p = descend_to_pareto(problem, start, region, config);
    } catch (const NonConvergence& e) {
      stats.descent_iters += e.best.iters_used;
      continue;
    } catch (const Error&) {
      continue;
    }
    stats.descent_iters += p.iters_used;

    if (p.stationarity > config.stationarity_tol) continue;
    if (region && !inside_region(p.losses, *region, config.active_eps))
      continue;
    if (!novel(p.losses, existing, out, config.novelty_delta)) continue;
    out.push_back(std::move(p));
  }
  return out;
}

ParetoSet explore_region(const ProblemDefinition& problem, const Vector& seed,
                         const Subregion* region, int budget,
                         const SolverConfig& config, RegionStats& stats) {
  if (budget < 1) throw ConfigError("explore_region: budget must be >= 1");
  stats.region_index = region ? region->index : -1;
  ParetoSet set;
  set.region_index = stats.region_index;

  ParetoPoint seed_point;
  try {
    seed_point = descend_to_pareto(problem, seed, region, config);
  } catch (const NonConvergence& e) {
    stats.descent_iters += e.best.iters_used;
    stats.failed = set.failed = true;
    return set;
  }
  stats.descent_iters += seed_point.iters_used;
  if (seed_point.stationarity > config.stationarity_tol ||
      (region &&
       !inside_region(seed_point.losses, *region, config.active_eps))) {
    stats.failed = set.failed = true;
    return set;
  }

  set.points.push_back(std::move(seed_point));
  std::deque<size_t> queue{0};
  while (!queue.empty() && static_cast<int>(set.points.size()) < budget) {
    const size_t at = queue.front();
    queue.pop_front();
    const int room = budget - static_cast<int>(set.points.size());
    std::vector<ParetoPoint> fresh =
        expand_point(problem, set.points[at], set, region, config, stats, room);
    for (auto& p : fresh) {
      if (static_cast<int>(set.points.size()) >= budget) break;
      set.points.push_back(std::move(p));
      queue.push_back(set.points.size() - 1);
    }
  }
  stats.points_found = static_cast<int>(set.points.size());
  return set;
}

ExplorationReport psst_run(const ProblemDefinition& problem,
                           const SolverConfig& config, int threads) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();

  ExplorationReport rep;
  std::mt19937_64 rng(config.master_seed);
  const Vector theta0 = problem.initial_point(rng);
  rep.balance = find_balance_point(problem, theta0, config);
  rep.total_descent_iters += rep.balance.point.iters_used;

  if (config.use_regions) {
    const int k = config.k_regions;
    rep.regions = make_subregions(make_preference_vectors(rep.balance.pi0, k));
    rep.sets.resize(static_cast<size_t>(k));
    rep.stats.resize(static_cast<size_t>(k));

    auto run_region = [&](int i) {
      std::mt19937_64 r(region_seed(config.master_seed, i));
      const Vector seed = config.warm_start ? rep.balance.point.theta
                                            : problem.initial_point(r);
      rep.sets[static_cast<size_t>(i)] = explore_region(
          problem, seed, &rep.regions[static_cast<size_t>(i)],
          config.region_budget, config, rep.stats[static_cast<size_t>(i)]);
    };

    const int workers = std::min(std::max(1, threads), k);
    if (workers <= 1) {
      for (int i = 0; i < k; ++i) run_region(i);
    } else {
      // Regions are independent; slots are disjoint, merge order is by index.
      std::atomic<int> next{0};
      auto drain = [&] {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= k) return;
          run_region(i);
        }
      };
      std::vector<std::thread> pool;
      pool.reserve(static_cast<size_t>(workers));
      for (int t = 0; t < workers; ++t) pool.emplace_back(drain);
      for (auto& th : pool) th.join();
    }
  } else {
    // Ablation: one unrestricted exploration from the balance point with the
    // same total point budget.
    rep.sets.resize(1);
    rep.stats.resize(1);
    rep.sets[0] =
        explore_region(problem, rep.balance.point.theta, nullptr,
                       config.k_regions * config.region_budget, config,
                       rep.stats[0]);
  }

  for (const auto& st : rep.stats) {
    rep.total_descent_iters += st.descent_iters;
    rep.total_tangent_solves += st.tangent_solves;
    rep.total_points += st.points_found;
  }
  rep.best = select_best(rep.sets);  // NoSolution when every region is empty
  rep.best_valid = true;
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

const ParetoPoint& select_best(const std::vector<ParetoSet>& sets) {
  const ParetoPoint* best = nullptr;
  for (const auto& set : sets)
    for (const auto& p : set.points)
      if (!best || p.losses(0) < best->losses(0)) best = &p;
  if (!best) throw NoSolution("select_best: every set is empty");
  return *best;
}

}  // namespace psst
