#pragma once

#include "psst/core.hpp"

namespace psst {

// Differentiable multi-task problem over a flat parameter vector.
// Losses are finite and non-negative; task 0 is the main task.
// Implementations must be immutable after construction so a single instance
// can be evaluated from several threads.
class ProblemDefinition {
 public:
  virtual ~ProblemDefinition() = default;

  virtual int dim() const = 0;
  virtual int tasks() const = 0;
  virtual std::string name() const = 0;

  // Loss vector of length tasks().
  virtual Vector evaluate(const Vector& theta) const = 0;

  // Gradient of one task's loss.
  virtual Vector gradient(const Vector& theta, int task) const = 0;

  // Exact Hessian-vector product of sum_m lambda_m L_m when available.
  // Callers fall back to finite differences when has_hvp() is false.
  virtual bool has_hvp() const { return false; }
  virtual Vector hvp(const Vector& theta, const Vector& lambda,
                     const Vector& v) const;

  // Draws an initial iterate; the scale is problem-specific.
  virtual Vector initial_point(std::mt19937_64& rng) const;

 protected:
  void check_theta(const Vector& theta) const;
  void check_task(int task) const;
};

}  // namespace psst
