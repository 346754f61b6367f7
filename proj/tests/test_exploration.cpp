#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>
#include <vector>

#include "oracles.hpp"
#include "psst/core.hpp"
#include "psst/descent.hpp"
#include "psst/exploration.hpp"
#include "psst/preference.hpp"
#include "psst/problems.hpp"

using psst::Vector;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Hides an exact curvature product so the differencing path gets exercised.
struct NoHvp : psst::ProblemDefinition {
  const psst::ProblemDefinition& inner;
  explicit NoHvp(const psst::ProblemDefinition& p) : inner(p) {}
  int dim() const override { return inner.dim(); }
  int tasks() const override { return inner.tasks(); }
  std::string name() const override { return inner.name(); }
  Vector evaluate(const Vector& t) const override { return inner.evaluate(t); }
  Vector gradient(const Vector& t, int m) const override {
    return inner.gradient(t, m);
  }
};

// Both losses shifted up by one: the attainable objective angle is bounded
// away from pi/2, so wedges near the top are unreachable.
struct ShiftedQuadratic : psst::ProblemDefinition {
  psst::QuadraticProblem inner;
  explicit ShiftedQuadratic(int n) : inner(psst::QuadraticProblem::symmetric(n)) {}
  int dim() const override { return inner.dim(); }
  int tasks() const override { return inner.tasks(); }
  std::string name() const override { return "shifted-quadratic"; }
  Vector evaluate(const Vector& t) const override {
    return inner.evaluate(t) + Vector::Constant(2, 1.0);
  }
  Vector gradient(const Vector& t, int m) const override {
    return inner.gradient(t, m);
  }
  bool has_hvp() const override { return true; }
  Vector hvp(const Vector& t, const Vector& lambda,
             const Vector& v) const override {
    return inner.hvp(t, lambda, v);
  }
};

psst::ParetoPoint front_point(const psst::QuadraticProblem& problem, double t,
                              const psst::SolverConfig& config) {
  const auto& c = problem.centers();
  const Vector theta = (1 - t) * c[0] + t * c[1];
  return psst::descend_to_pareto(problem, theta, nullptr, config);
}

}  // namespace

TEST_CASE("minres: isotropic operator converges in one step") {
  const Vector b = vec({3.0, -1.0, 2.0});
  auto apply = [](const Vector& v) { return Vector(4.0 * v); };
  const auto r = psst::minres(apply, b, 1e-12, 10);
  CHECK(r.converged);
  CHECK(r.iters <= 2);
  CHECK((r.x - b / 4.0).norm() <= 1e-12);
}

TEST_CASE("minres: solves random positive-definite systems") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 12;
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        B(i, j) = 2.0 * psst::uniform_unit(rng) - 1.0;
    const Eigen::MatrixXd A =
        B.transpose() * B + Eigen::MatrixXd::Identity(n, n);
    const Vector b = psst::uniform_vector(rng, n, -1.0, 1.0);
    auto apply = [&](const Vector& v) { return Vector(A * v); };
    const auto r = psst::minres(apply, b, 1e-10, 200);
    CHECK(r.converged);
    CHECK((A * r.x - b).norm() <= 1e-9 * b.norm());
    // Cross-check against a dense direct solve.
    const Vector direct = A.ldlt().solve(b);
    CHECK((r.x - direct).norm() <= 1e-7 * direct.norm());
  }
}

TEST_CASE("minres: handles indefinite diagonal operators") {
  const int n = 8;
  Vector diag(n);
  for (int i = 0; i < n; ++i) diag(i) = (i % 2 == 0) ? double(i + 1) : -double(i + 1);
  std::mt19937_64 rng(57);
  const Vector b = psst::uniform_vector(rng, n, -1.0, 1.0);
  auto apply = [&](const Vector& v) { return Vector(diag.asDiagonal() * v); };
  const auto r = psst::minres(apply, b, 1e-12, 100);
  CHECK(r.converged);
  CHECK((diag.asDiagonal() * r.x - b).norm() <= 1e-10 * b.norm());
}

TEST_CASE("minres: zero right-hand side and honest iteration cap") {
  auto apply = [](const Vector& v) { return Vector(2.0 * v); };
  const auto z = psst::minres(apply, Vector::Zero(5), 1e-10, 10);
  CHECK(z.converged);
  CHECK(z.x.norm() == 0.0);

  // An ill-conditioned system with a 2-iteration budget cannot finish.
  std::mt19937_64 rng(59);
  const int n = 30;
  Vector diag(n);
  for (int i = 0; i < n; ++i) diag(i) = 1.0 + 1000.0 * i;
  const Vector b = psst::uniform_vector(rng, n, 0.5, 1.0);
  auto hard = [&](const Vector& v) { return Vector(diag.asDiagonal() * v); };
  const auto r = psst::minres(hard, b, 1e-14, 2);
  CHECK_FALSE(r.converged);
  CHECK(r.rel_residual > 1e-14);
  CHECK(r.iters == 2);
}

TEST_CASE("hessian_vector: exact product and differencing path agree") {
  const auto quad = psst::QuadraticProblem::symmetric(6);
  const NoHvp hidden(quad);
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector theta = psst::uniform_vector(rng, 6, -2.0, 2.0);
    const Vector v = psst::uniform_vector(rng, 6, -1.0, 1.0);
    const Vector lambda = psst::uniform_vector(rng, 2, 0.1, 1.0);
    const Vector exact = psst::hessian_vector(quad, theta, lambda, v);
    CHECK((exact - (2.0 / 6.0) * lambda.sum() * v).norm() <= 1e-12);
    const Vector fd = psst::hessian_vector(hidden, theta, lambda, v);
    CHECK((fd - exact).norm() / exact.norm() <= 1e-6);
  }
  // Zero direction short-circuits to zero.
  const Vector z = psst::hessian_vector(quad, Vector::Zero(6),
                                        vec({0.5, 0.5}), Vector::Zero(6));
  CHECK(z.norm() == 0.0);
}

TEST_CASE("hessian_vector: differencing is stable under step halving") {
  // Independent recomputation at eps and eps/2 brackets the library value.
  const psst::ToyMlpProblem problem(4, 8, 64);
  std::mt19937_64 rng(63);
  const Vector theta = problem.initial_point(rng);
  const Vector v = psst::uniform_vector(rng, problem.dim(), -1.0, 1.0);
  const Vector lambda = vec({0.5, 0.5});
  const Vector lib = psst::hessian_vector(problem, theta, lambda, v);

  auto fd_at = [&](double eps) {
    Vector gp = Vector::Zero(problem.dim());
    Vector gm = Vector::Zero(problem.dim());
    for (int m = 0; m < 2; ++m) {
      gp += lambda(m) * problem.gradient(theta + eps * v, m);
      gm += lambda(m) * problem.gradient(theta - eps * v, m);
    }
    return Vector((gp - gm) / (2.0 * eps));
  };
  const double eps = 1e-5 * (1.0 + theta.norm()) / (1.0 + v.norm());
  const Vector at_eps = fd_at(eps);
  const Vector at_half = fd_at(eps / 2.0);
  CHECK((lib - at_eps).norm() / at_eps.norm() <= 1e-12);
  CHECK((at_half - at_eps).norm() / at_eps.norm() <= 1e-3);
}

TEST_CASE("tangent_direction: moves along the analytic Pareto set") {
  psst::SolverConfig config;
  const auto problem = psst::QuadraticProblem::symmetric(10);
  const auto& c = problem.centers();
  const Vector segment = (c[1] - c[0]).normalized();
  const auto at = front_point(problem, 0.4, config);
  REQUIRE(at.stationarity <= config.stationarity_tol);

  const auto betas = psst::choose_betas(at.kkt_weights);
  REQUIRE(betas.size() == 2);
  for (const auto& beta : betas) {
    const auto ts = psst::tangent_direction(problem, at, beta, config);
    REQUIRE_FALSE(ts.null_tangent);
    CHECK(ts.tangent.norm() == doctest::Approx(1.0).epsilon(1e-12));
    // Parallel to the segment to within 1e-3 radians.
    const double cosang = std::abs(ts.tangent.dot(segment));
    CHECK(std::acos(std::min(1.0, cosang)) <= 1e-3);
    CHECK(ts.rel_residual <= config.krylov_tol);
  }
}

TEST_CASE("tangent_direction: KKT-aligned probe has no first-order motion") {
  psst::SolverConfig config;
  const auto problem = psst::QuadraticProblem::symmetric(10);
  const auto at = front_point(problem, 0.5, config);
  const Vector aligned = at.kkt_weights.normalized();
  const auto ts = psst::tangent_direction(problem, at, aligned, config);
  CHECK(ts.null_tangent);
}

TEST_CASE("choose_betas: symmetric weights give the frozen probe pair") {
  const auto betas = psst::choose_betas(vec({0.5, 0.5}));
  REQUIRE(betas.size() == 2);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK((betas[0] - vec({s, -s})).norm() <= 1e-12);
  CHECK((betas[1] + betas[0]).norm() <= 1e-15);
}

TEST_CASE("choose_betas: main-axis weights fall back to the second axis") {
  const auto betas = psst::choose_betas(vec({1.0, 0.0}));
  REQUIRE(betas.size() == 2);
  CHECK((betas[0] - vec({0.0, 1.0})).norm() <= 1e-12);
}

TEST_CASE("choose_betas: probes are orthogonal to the weights") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + int(rng() % 3);
    const Vector w = psst::uniform_vector(rng, m, 0.0, 1.0);
    if (w.norm() < 1e-9) continue;
    const auto betas = psst::choose_betas(w);
    for (const auto& b : betas) {
      CHECK(std::abs(b.dot(w.normalized())) <= 1e-12);
      CHECK(b.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(psst::choose_betas(vec({0.0, 0.0})), psst::DegenerateInput);
}

TEST_CASE("expand_point: an interior point grows both ways") {
  psst::SolverConfig config;
  const auto problem = psst::QuadraticProblem::symmetric(10);
  const auto at = front_point(problem, 0.5, config);
  psst::ParetoSet existing;
  existing.points.push_back(at);
  psst::RegionStats stats;
  const auto grown =
      psst::expand_point(problem, at, existing, nullptr, config, stats);
  REQUIRE(grown.size() == 2);
  CHECK(stats.tangent_solves >= 2);
  // One neighbor on each side in objective space.
  const double a0 = grown[0].angle - at.angle;
  const double a1 = grown[1].angle - at.angle;
  CHECK(a0 * a1 < 0.0);
  for (const auto& p : grown) {
    CHECK(p.stationarity <= config.stationarity_tol);
    CHECK((p.losses - at.losses).norm() >= config.novelty_delta);
  }
}

TEST_CASE("expand_point: novelty gate and capacity are honored") {
  psst::SolverConfig config;
  const auto problem = psst::QuadraticProblem::symmetric(10);
  const auto at = front_point(problem, 0.5, config);
  psst::ParetoSet existing;
  existing.points.push_back(at);

  psst::SolverConfig picky = config;
  picky.novelty_delta = 100.0;  // nothing is ever novel enough
  psst::RegionStats s1;
  CHECK(psst::expand_point(problem, at, existing, nullptr, picky, s1).empty());

  psst::RegionStats s2;
  const auto capped =
      psst::expand_point(problem, at, existing, nullptr, config, s2, 1);
  CHECK(capped.size() == 1);
  CHECK(s2.tangent_solves == 1);  // second probe never attempted
}

TEST_CASE("explore_region: budget one returns just the corrected seed") {
  psst::SolverConfig config;
  const auto problem = psst::QuadraticProblem::symmetric(10);
  std::mt19937_64 rng(77);
  psst::RegionStats stats;
  const auto set = psst::explore_region(problem, problem.initial_point(rng),
                                        nullptr, 1, config, stats);
  CHECK_FALSE(set.failed);
  REQUIRE(set.points.size() == 1);
  CHECK(set.points[0].stationarity <= config.stationarity_tol);
  CHECK(stats.points_found == 1);
}

TEST_CASE("explore_region: fills a wedge with stationary in-band points") {
  psst::SolverConfig config;
  const auto problem = psst::QuadraticProblem::symmetric(10);
  const auto pv = psst::make_preference_vectors(kPi / 4, 5);
  const auto regions = psst::make_subregions(pv);
  std::mt19937_64 rng(79);
  psst::RegionStats stats;
  stats.region_index = regions[1].index;
  const auto set = psst::explore_region(problem, problem.initial_point(rng),
                                        &regions[1], 10, config, stats);
  CHECK_FALSE(set.failed);
  CHECK(set.points.size() >= 3);
  CHECK(set.points.size() <= 10);
  for (const auto& p : set.points) {
    CHECK(p.stationarity <= config.stationarity_tol);
    const auto [q, r] = psst::constraint_values(p.losses, regions[1]);
    CHECK(q <= config.active_eps);
    CHECK(r <= config.active_eps);
    CHECK(p.region_index == regions[1].index);
  }
  // Pairwise novelty in objective space.
  for (size_t i = 0; i < set.points.size(); ++i)
    for (size_t j = i + 1; j < set.points.size(); ++j)
      CHECK((set.points[i].losses - set.points[j].losses).norm() >=
            config.novelty_delta * 0.999);
}

TEST_CASE("explore_region: unreachable wedge fails without fabricating points") {
  psst::SolverConfig config;
  const ShiftedQuadratic problem(8);
  // With both losses >= 1 the angle cannot approach pi/2.
  psst::Subregion region{3, 1.45, kPi / 2};
  std::mt19937_64 rng(81);
  psst::RegionStats stats;
  const auto set = psst::explore_region(problem, problem.inner.initial_point(rng),
                                        &region, 5, config, stats);
  CHECK(set.failed);
  CHECK(set.points.empty());
  CHECK_THROWS_AS(
      psst::explore_region(problem, Vector::Zero(8), nullptr, 0, config, stats),
      psst::ConfigError);
}

TEST_CASE("psst_run: regions are disjointly indexed and the best is real") {
  psst::SolverConfig config;
  config.k_regions = 4;
  config.region_budget = 5;
  config.master_seed = 3;
  const auto problem = psst::QuadraticProblem::symmetric(10);
  const auto report = psst::psst_run(problem, config);

  REQUIRE(report.sets.size() == 4);
  REQUIRE(report.stats.size() == 4);
  REQUIRE(report.regions.size() == 4);
  CHECK(report.best_valid);
  CHECK(report.wall_seconds >= 0.0);

  int total = 0;
  for (int i = 0; i < 4; ++i) {
    CHECK(report.sets[i].region_index == i);
    CHECK(report.stats[i].region_index == i);
    CHECK(int(report.sets[i].points.size()) <= config.region_budget);
    CHECK(report.stats[i].points_found ==
          int(report.sets[i].points.size()));
    total += int(report.sets[i].points.size());
  }
  CHECK(report.total_points == total);
  CHECK(report.total_descent_iters > 0);

  // Best agrees with a direct scan.
  const auto& direct = psst::select_best(report.sets);
  CHECK(report.best.losses(0) == direct.losses(0));
  // And it never loses to the balance point on the main task.
  CHECK(report.best.losses(0) <=
        report.balance.point.losses(0) + 1e-6);
}

TEST_CASE("psst_run: identical seeds give identical reports") {
  psst::SolverConfig config;
  config.k_regions = 3;
  config.region_budget = 4;
  config.master_seed = 11;
  const auto problem = psst::QuadraticProblem::symmetric(8);
  const auto a = psst::psst_run(problem, config);
  const auto b = psst::psst_run(problem, config);
  REQUIRE(a.sets.size() == b.sets.size());
  for (size_t i = 0; i < a.sets.size(); ++i) {
    REQUIRE(a.sets[i].points.size() == b.sets[i].points.size());
    for (size_t j = 0; j < a.sets[i].points.size(); ++j) {
      CHECK((a.sets[i].points[j].theta - b.sets[i].points[j].theta).norm() ==
            0.0);
      CHECK((a.sets[i].points[j].losses - b.sets[i].points[j].losses).norm() ==
            0.0);
    }
  }
  CHECK(a.balance.pi0 == b.balance.pi0);
}

TEST_CASE("psst_run: thread count does not change the outcome") {
  psst::SolverConfig config;
  config.k_regions = 4;
  config.region_budget = 4;
  config.master_seed = 19;
  const auto problem = psst::QuadraticProblem::symmetric(8);
  const auto serial = psst::psst_run(problem, config, 1);
  const auto wide = psst::psst_run(problem, config, 4);
  REQUIRE(serial.sets.size() == wide.sets.size());
  for (size_t i = 0; i < serial.sets.size(); ++i) {
    REQUIRE(serial.sets[i].points.size() == wide.sets[i].points.size());
    for (size_t j = 0; j < serial.sets[i].points.size(); ++j)
      CHECK((serial.sets[i].points[j].theta -
             wide.sets[i].points[j].theta).norm() == 0.0);
  }
  CHECK(serial.total_descent_iters == wide.total_descent_iters);
}

TEST_CASE("psst_run: unrestricted ablation uses one pooled budget") {
  psst::SolverConfig config;
  config.k_regions = 3;
  config.region_budget = 4;
  config.master_seed = 23;
  config.use_regions = false;
  const auto problem = psst::QuadraticProblem::symmetric(8);
  const auto report = psst::psst_run(problem, config);
  REQUIRE(report.sets.size() == 1);
  CHECK(report.regions.empty());
  CHECK(int(report.sets[0].points.size()) <= 12);  // k * budget pooled
  CHECK(report.sets[0].points.size() >= 1);
  for (const auto& p : report.sets[0].points)
    CHECK(p.stationarity <= config.stationarity_tol);
}

TEST_CASE("select_best: lowest main loss, ties to lower region then insertion") {
  auto mk = [](double l0, int region) {
    psst::ParetoPoint p;
    p.theta = vec({0.0});
    p.losses = vec({l0, 1.0});
    p.region_index = region;
    return p;
  };
  std::vector<psst::ParetoSet> sets(2);
  sets[0].region_index = 0;
  sets[1].region_index = 1;
  sets[0].points.push_back(mk(0.5, 0));
  sets[0].points.push_back(mk(0.3, 0));
  sets[1].points.push_back(mk(0.3, 1));
  sets[1].points.push_back(mk(0.2, 1));

  const auto& best = psst::select_best(sets);
  CHECK(best.losses(0) == 0.2);
  CHECK(best.region_index == 1);

  // Exact tie across regions: the lower region index wins.
  sets[1].points[1].losses(0) = 0.3;
  const auto& tied = psst::select_best(sets);
  CHECK(tied.region_index == 0);

  std::vector<psst::ParetoSet> empty(2);
  CHECK_THROWS_AS(psst::select_best(empty), psst::NoSolution);
}
