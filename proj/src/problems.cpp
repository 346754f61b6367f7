#include "psst/problems.hpp"

#include <algorithm>
#include <cmath>

namespace psst {

// ---------------------------------------------------------------------------
// QuadraticProblem
// ---------------------------------------------------------------------------

QuadraticProblem::QuadraticProblem(int dim, std::vector<Vector> centers)
    : dim_(dim), centers_(std::move(centers)) {
  if (dim_ < 1) throw ConfigError("quadratic: dim must be >= 1");
  if (centers_.size() < 2)
    throw ConfigError("quadratic: need at least two centers");
  for (const auto& c : centers_)
    if (c.size() != dim_)
      throw DimensionError("quadratic: center length != dim");
}

QuadraticProblem QuadraticProblem::symmetric(int dim) {
  if (dim < 1) throw ConfigError("quadratic: dim must be >= 1");
  const double a = 2.0 / std::sqrt(static_cast<double>(dim));
  std::vector<Vector> centers;
  centers.push_back(Vector::Constant(dim, -a));
  centers.push_back(Vector::Constant(dim, a));
  return QuadraticProblem(dim, std::move(centers));
}

Vector QuadraticProblem::evaluate(const Vector& theta) const {
  check_theta(theta);
  Vector losses(tasks());
  for (int m = 0; m < tasks(); ++m)
    losses(m) = (theta - centers_[static_cast<size_t>(m)]).squaredNorm() / dim_;
  return losses;
}

Vector QuadraticProblem::gradient(const Vector& theta, int task) const {
  check_theta(theta);
  check_task(task);
  return 2.0 / dim_ * (theta - centers_[static_cast<size_t>(task)]);
}

Vector QuadraticProblem::hvp(const Vector& theta, const Vector& lambda,
                             const Vector& v) const {
  check_theta(theta);
  if (lambda.size() != tasks())
    throw DimensionError("quadratic: weight length mismatch");
  if (v.size() != dim_) throw DimensionError("quadratic: hvp vector length");
  return 2.0 / dim_ * lambda.sum() * v;
}

Vector QuadraticProblem::initial_point(std::mt19937_64& rng) const {
  return uniform_vector(rng, dim_, -0.02, 0.02);
}

// ---------------------------------------------------------------------------
// TwoPeakProblem
// ---------------------------------------------------------------------------

TwoPeakProblem::TwoPeakProblem(int dim) : dim_(dim) {
  if (dim_ < 1) throw ConfigError("twopeak: dim must be >= 1");
  v_ = Vector::Constant(dim_, 1.0 / std::sqrt(static_cast<double>(dim_)));
}

Vector TwoPeakProblem::evaluate(const Vector& theta) const {
  check_theta(theta);
  Vector losses(2);
  losses(0) = 1.0 - std::exp(-(theta - v_).squaredNorm());
  losses(1) = 1.0 - std::exp(-(theta + v_).squaredNorm());
  return losses;
}

Vector TwoPeakProblem::gradient(const Vector& theta, int task) const {
  check_theta(theta);
  check_task(task);
  const Vector u = task == 0 ? Vector(theta - v_) : Vector(theta + v_);
  return 2.0 * std::exp(-u.squaredNorm()) * u;
}

Vector TwoPeakProblem::hvp(const Vector& theta, const Vector& lambda,
                           const Vector& v) const {
  check_theta(theta);
  if (lambda.size() != 2) throw DimensionError("twopeak: weight length");
  if (v.size() != dim_) throw DimensionError("twopeak: hvp vector length");
  Vector out = Vector::Zero(dim_);
  for (int m = 0; m < 2; ++m) {
    const Vector u = m == 0 ? Vector(theta - v_) : Vector(theta + v_);
    const double e = std::exp(-u.squaredNorm());
    out += lambda(m) * e * (2.0 * v - 4.0 * u.dot(v) * u);
  }
  return out;
}

Vector TwoPeakProblem::initial_point(std::mt19937_64& rng) const {
  return uniform_vector(rng, dim_, -0.02, 0.02);
}

// ---------------------------------------------------------------------------
// ToyMlpProblem
// ---------------------------------------------------------------------------

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One single-head teacher network evaluated on all samples.
Eigen::VectorXd teacher_outputs(const Eigen::MatrixXd& x, int hidden,
                                std::mt19937_64& rng) {
  const int input = static_cast<int>(x.cols());
  const double ws = 1.5 / std::sqrt(static_cast<double>(input));
  const double hs = 1.5 / std::sqrt(static_cast<double>(hidden));
  RowMat w1(hidden, input);
  for (int i = 0; i < hidden; ++i)
    for (int j = 0; j < input; ++j)
      w1(i, j) = ws * (2.0 * psst::uniform_unit(rng) - 1.0);
  Eigen::VectorXd b1 = psst::uniform_vector(rng, hidden, -ws, ws);
  Eigen::VectorXd w2 = psst::uniform_vector(rng, hidden, -hs, hs);
  const double b2 = hs * (2.0 * psst::uniform_unit(rng) - 1.0);
  const Eigen::MatrixXd h =
      ((x * w1.transpose()).rowwise() + b1.transpose()).array().tanh();
  return (h * w2).array() + b2;
}

}  // namespace

struct ToyMlpProblem::Forward {
  Eigen::MatrixXd h;  // samples x hidden, post-tanh
  Eigen::VectorXd y;  // samples, requested head only
};

ToyMlpProblem::ToyMlpProblem(int input_dim, int hidden, int samples,
                             std::uint64_t data_seed)
    : input_(input_dim), hidden_(hidden), samples_(samples) {
  if (input_ < 1 || hidden_ < 1 || samples_ < 1)
    throw ConfigError("mlp: input, hidden and samples must be >= 1");
  n_params_ = shared_size() + 2 * head_size();

  std::mt19937_64 rng(data_seed);
  x_.resize(samples_, input_);
  for (int i = 0; i < samples_; ++i)
    for (int j = 0; j < input_; ++j)
      x_(i, j) = 2.0 * uniform_unit(rng) - 1.0;
  targets_.resize(samples_, 2);
  targets_.col(0) = teacher_outputs(x_, hidden_, rng);
  targets_.col(1) = teacher_outputs(x_, hidden_, rng);
}

ToyMlpProblem::Forward ToyMlpProblem::forward(const Vector& theta) const {
  // Head evaluation is done by the callers; here only the shared trunk.
  Forward f;
  const Eigen::Map<const RowMat> w1(theta.data(), hidden_, input_);
  const auto b1 = theta.segment(hidden_ * input_, hidden_);
  f.h = ((x_ * w1.transpose()).rowwise() + b1.transpose()).array().tanh();
  return f;
}

Vector ToyMlpProblem::evaluate(const Vector& theta) const {
  check_theta(theta);
  const Forward f = forward(theta);
  Vector losses(2);
  for (int m = 0; m < 2; ++m) {
    const auto w = theta.segment(head_offset(m), hidden_);
    const double b = theta(head_offset(m) + hidden_);
    const Eigen::VectorXd y = (f.h * w).array() + b;
    losses(m) = (y - targets_.col(m)).squaredNorm() / samples_;
  }
  return losses;
}

Vector ToyMlpProblem::gradient(const Vector& theta, int task) const {
  check_theta(theta);
  check_task(task);
  const Forward f = forward(theta);
  const auto w = theta.segment(head_offset(task), hidden_);
  const double b = theta(head_offset(task) + hidden_);
  const Eigen::VectorXd y = (f.h * w).array() + b;
  const Eigen::VectorXd dy =
      2.0 / samples_ * (y - targets_.col(task));  // dL/dy per sample

  Vector grad = Vector::Zero(n_params_);
  grad.segment(head_offset(task), hidden_) = f.h.transpose() * dy;
  grad(head_offset(task) + hidden_) = dy.sum();

  // Back through the head into the trunk: dPre = (dy w^T) o (1 - h^2).
  const Eigen::MatrixXd dpre =
      (dy * w.transpose()).array() * (1.0 - f.h.array().square());
  Eigen::Map<RowMat>(grad.data(), hidden_, input_) = dpre.transpose() * x_;
  grad.segment(hidden_ * input_, hidden_) = dpre.colwise().sum();
  return grad;
}

Vector ToyMlpProblem::initial_point(std::mt19937_64& rng) const {
  const double ts = 1.0 / std::sqrt(static_cast<double>(input_));
  const double hs = 1.0 / std::sqrt(static_cast<double>(hidden_));
  Vector theta(n_params_);
  theta.head(shared_size()) = uniform_vector(rng, shared_size(), -ts, ts);
  theta.tail(2 * head_size()) =
      uniform_vector(rng, 2 * head_size(), -hs, hs);
  return theta;
}

// ---------------------------------------------------------------------------
// Oracles and sweeps
// ---------------------------------------------------------------------------

Vector finite_diff_gradient(const ProblemDefinition& problem,
                            const Vector& theta, int task, double eps) {
  if (theta.size() != problem.dim())
    throw DimensionError("finite_diff_gradient: theta length");
  Vector g(problem.dim());
  Vector t = theta;
  for (int i = 0; i < problem.dim(); ++i) {
    const double h = eps * (1.0 + std::abs(theta(i)));
    t(i) = theta(i) + h;
    const double up = problem.evaluate(t)(task);
    t(i) = theta(i) - h;
    const double dn = problem.evaluate(t)(task);
    t(i) = theta(i);
    g(i) = (up - dn) / (2.0 * h);
  }
  return g;
}

std::vector<Vector> analytic_front(const ProblemDefinition& problem,
                                   int count) {
  if (count < 2) throw ConfigError("analytic_front: count must be >= 2");
  std::vector<Vector> front;
  front.reserve(static_cast<size_t>(count));

  if (const auto* q = dynamic_cast<const QuadraticProblem*>(&problem)) {
    if (q->tasks() != 2)
      throw NoSolution("analytic_front: quadratic front needs two tasks");
    const double d =
        (q->centers()[1] - q->centers()[0]).squaredNorm() / q->dim();
    for (int i = 0; i < count; ++i) {
      const double t = static_cast<double>(i) / (count - 1);
      Vector l(2);
      l(0) = t * t * d;
      l(1) = (1.0 - t) * (1.0 - t) * d;
      front.push_back(std::move(l));
    }
    return front;
  }
  if (dynamic_cast<const TwoPeakProblem*>(&problem) != nullptr) {
    // Same traversal convention as the quadratic: task 0's minimizer first.
    for (int i = 0; i < count; ++i) {
      const double t = static_cast<double>(i) / (count - 1);
      Vector l(2);
      l(0) = 1.0 - std::exp(-4.0 * t * t);
      l(1) = 1.0 - std::exp(-4.0 * (1.0 - t) * (1.0 - t));
      front.push_back(std::move(l));
    }
    return front;
  }
  throw NoSolution("analytic_front: no closed form for " + problem.name());
}

std::vector<ScalarizedResult> scalarization_sweep(
    const ProblemDefinition& problem, const std::vector<Vector>& weight_grid,
    const SolverConfig& config, std::uint64_t seed) {
  config.validate();
  std::vector<ScalarizedResult> out;
  out.reserve(weight_grid.size());

  for (size_t wi = 0; wi < weight_grid.size(); ++wi) {
    Vector w = weight_grid[wi];
    if (w.size() != problem.tasks())
      throw DimensionError("scalarization_sweep: weight length");
    if (w.minCoeff() < 0.0 || !(w.sum() > 0.0))
      throw DegenerateInput("scalarization_sweep: weights must be a simplex");
    w /= w.sum();

    std::mt19937_64 rng(seed ^ split_mix64(static_cast<std::uint64_t>(wi) + 1));
    Vector theta = problem.initial_point(rng);

    auto scalar = [&](const Vector& at) {
      return w.dot(problem.evaluate(at));
    };
    auto scalar_grad = [&](const Vector& at) {
      Vector g = Vector::Zero(problem.dim());
      for (int m = 0; m < problem.tasks(); ++m)
        if (w(m) != 0.0) g += w(m) * problem.gradient(at, m);
      return g;
    };

    ScalarizedResult res;
    double f = scalar(theta);
    Vector g = scalar_grad(theta);
    int iters = 0;
    for (; iters < config.max_iters; ++iters) {
      if (g.norm() <= config.stationarity_tol) {
        res.converged = true;
        break;
      }
      const double slope = -g.squaredNorm();
      double eta = config.step_init;
      bool accepted = false;
      for (int h = 0; h < 60; ++h) {
        const Vector trial = theta - eta * g;
        const double ft = scalar(trial);
        if (std::isfinite(ft) && ft <= f + config.armijo_c * eta * slope) {
          theta = trial;
          f = ft;
          accepted = true;
          break;
        }
        eta *= config.backtrack;
      }
      if (!accepted) break;  // stalled; report the point as-is
      g = scalar_grad(theta);
    }
    if (g.norm() <= config.stationarity_tol) res.converged = true;

    res.point.theta = theta;
    res.point.losses = problem.evaluate(theta);
    res.point.kkt_weights = w;
    res.point.angle = objective_angle(res.point.losses);
    res.point.stationarity = g.norm();
    res.point.iters_used = iters;
    out.push_back(std::move(res));
  }
  return out;
}

std::vector<Vector> weight_grid_2d(int count) {
  if (count < 1) throw ConfigError("weight_grid_2d: count must be >= 1");
  std::vector<Vector> grid;
  grid.reserve(static_cast<size_t>(count));
  if (count == 1) {
    grid.push_back(Vector::Constant(2, 0.5));
    return grid;
  }
  for (int i = 0; i < count; ++i) {
    Vector w(2);
    w(0) = static_cast<double>(i) / (count - 1);
    w(1) = 1.0 - w(0);
    grid.push_back(std::move(w));
  }
  return grid;
}

std::unique_ptr<ProblemDefinition> make_problem(const std::string& name,
                                                int dim, int hidden,
                                                int samples) {
  if (name == "quadratic")
    return std::make_unique<QuadraticProblem>(QuadraticProblem::symmetric(dim));
  if (name == "twopeak") return std::make_unique<TwoPeakProblem>(dim);
  if (name == "mlp")
    return std::make_unique<ToyMlpProblem>(8, hidden, samples);
  throw ConfigError("unknown problem '" + name +
                    "' (expected quadratic, twopeak or mlp)");
}

}  // namespace psst
