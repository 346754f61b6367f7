#pragma once

#include "psst/core.hpp"

namespace psst {

struct MinNormResult {
  Vector weights;     // simplex weights over the input vectors
  Vector point;       // minimum-norm point of the convex hull
  double gap = 0.0;   // final Frank-Wolfe duality gap
  int iters = 0;
  bool converged = true;  // gap <= fw_tol was reached
};

// Minimum-norm point of conv{vs[0], ..., vs[k-1]}.
//
// Frank-Wolfe in pairwise form: each iteration projects exactly onto the
// segment between the best descent vertex and the heaviest ascent vertex of
// the current support; a capped or stalled step falls back to the exact
// affine minimizer over the support, so near-collinear vertex sets still
// converge in finitely many steps. One and two vector inputs are solved in
// closed form. The duality gap certifies variational optimality: for every
// input v, v . point >= ||point||^2 - gap. Ties between vertices resolve to
// the lowest index. If fw_max_iters is hit first, the best iterate is
// returned with converged = false.
//
// Throws DegenerateInput on an empty list and DimensionError on mixed lengths.
MinNormResult min_norm_in_hull(const std::vector<Vector>& vs, double fw_tol,
                               int fw_max_iters);

}  // namespace psst
