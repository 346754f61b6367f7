#include "psst/problem.hpp"

namespace psst {

Vector ProblemDefinition::hvp(const Vector&, const Vector&, const Vector&) const {
  throw Error(name() + ": no exact Hessian-vector product");
}

Vector ProblemDefinition::initial_point(std::mt19937_64& rng) const {
  return uniform_vector(rng, dim(), -1.0, 1.0);
}

void ProblemDefinition::check_theta(const Vector& theta) const {
  if (theta.size() != dim())
    throw DimensionError(name() + ": parameter vector has length " +
                         std::to_string(theta.size()) + ", expected " +
                         std::to_string(dim()));
}

void ProblemDefinition::check_task(int task) const {
  if (task < 0 || task >= tasks())
    throw DimensionError(name() + ": task index " + std::to_string(task) +
                         " out of range");
}

}  // namespace psst
