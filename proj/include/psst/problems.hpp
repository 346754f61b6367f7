#pragma once

#include "psst/core.hpp"
#include "psst/problem.hpp"

#include <memory>

namespace psst {

// M isotropic quadratic bowls: L_m = ||theta - c_m||^2 / dim.
// The Pareto set for two tasks is the segment [c_0, c_1].
class QuadraticProblem : public ProblemDefinition {
 public:
  QuadraticProblem(int dim, std::vector<Vector> centers);

  // Two centers at +/- 2/sqrt(dim) * ones: symmetric about the origin.
  static QuadraticProblem symmetric(int dim);

  int dim() const override { return dim_; }
  int tasks() const override { return static_cast<int>(centers_.size()); }
  std::string name() const override { return "quadratic"; }

  Vector evaluate(const Vector& theta) const override;
  Vector gradient(const Vector& theta, int task) const override;
  bool has_hvp() const override { return true; }
  Vector hvp(const Vector& theta, const Vector& lambda,
             const Vector& v) const override;
  Vector initial_point(std::mt19937_64& rng) const override;

  const std::vector<Vector>& centers() const { return centers_; }

 private:
  int dim_;
  std::vector<Vector> centers_;
};

// Two inverted Gaussian wells at +/- v, v = ones/sqrt(dim):
//   L_0 = 1 - exp(-||theta - v||^2),  L_1 = 1 - exp(-||theta + v||^2).
// Nonconvex; the Pareto set is {t v : t in [-1, 1]}.
class TwoPeakProblem : public ProblemDefinition {
 public:
  explicit TwoPeakProblem(int dim);

  int dim() const override { return dim_; }
  int tasks() const override { return 2; }
  std::string name() const override { return "twopeak"; }

  Vector evaluate(const Vector& theta) const override;
  Vector gradient(const Vector& theta, int task) const override;
  bool has_hvp() const override { return true; }
  Vector hvp(const Vector& theta, const Vector& lambda,
             const Vector& v) const override;
  Vector initial_point(std::mt19937_64& rng) const override;

  const Vector& peak() const { return v_; }

 private:
  int dim_;
  Vector v_;
};

// Two-task regression on a shared tanh layer with per-task linear heads.
// Targets come from two fixed random teacher networks of the same shape, so
// the tasks genuinely conflict. Parameters are stored flat:
//   [W1 (hidden x input, row-major) | b1 | w_head0 | b_head0 | w_head1 | b_head1]
// Gradients are hand-derived backprop; no exact Hessian product is provided.
class ToyMlpProblem : public ProblemDefinition {
 public:
  ToyMlpProblem(int input_dim = 8, int hidden = 16, int samples = 256,
                std::uint64_t data_seed = 0x5eed5eedULL);

  int dim() const override { return n_params_; }
  int tasks() const override { return 2; }
  std::string name() const override { return "mlp"; }

  Vector evaluate(const Vector& theta) const override;
  Vector gradient(const Vector& theta, int task) const override;
  Vector initial_point(std::mt19937_64& rng) const override;

  int input_dim() const { return input_; }
  int hidden() const { return hidden_; }
  int samples() const { return samples_; }
  // Flat-layout descriptor.
  int shared_size() const { return hidden_ * input_ + hidden_; }
  int head_size() const { return hidden_ + 1; }
  int head_offset(int task) const { return shared_size() + task * head_size(); }

 private:
  struct Forward;
  Forward forward(const Vector& theta) const;

  int input_, hidden_, samples_, n_params_;
  Eigen::MatrixXd x_;        // samples x input
  Eigen::MatrixXd targets_;  // samples x 2
};

// Central-difference gradient of one task, step eps * (1 + |theta_i|).
Vector finite_diff_gradient(const ProblemDefinition& problem,
                            const Vector& theta, int task, double eps = 1e-6);

// `count` loss vectors sampled uniformly in the parameterization of the
// problem's closed-form Pareto set. Throws NoSolution for problems without
// one (the MLP).
std::vector<Vector> analytic_front(const ProblemDefinition& problem, int count);

struct ScalarizedResult {
  ParetoPoint point;  // kkt_weights = the scalarization weights
  bool converged = false;
};

// Plain gradient descent on sum_m w_m L_m for each weight vector, using the
// same Armijo constants and stopping tolerance as the multi-gradient descent.
// Initial iterates derive from `seed` per weight index.
std::vector<ScalarizedResult> scalarization_sweep(
    const ProblemDefinition& problem, const std::vector<Vector>& weight_grid,
    const SolverConfig& config, std::uint64_t seed);

// Evenly spaced two-task weight grid {(i/(count-1), 1 - i/(count-1))};
// count 1 degenerates to the single equal-weight vector.
std::vector<Vector> weight_grid_2d(int count);

// Factory for the bundled problems: "quadratic", "twopeak", "mlp".
// hidden/samples apply to the MLP only.
std::unique_ptr<ProblemDefinition> make_problem(const std::string& name,
                                                int dim, int hidden = 16,
                                                int samples = 256);

}  // namespace psst
