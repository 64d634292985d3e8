#pragma once

// Frisch-Newton primal-dual interior point solver for linear quantile
// regression. Solves the bounded dual LP
//   max y^T a  s.t.  X^T a = (1 - tau) X^T 1,  0 <= a <= 1
// whose equality multipliers are the regression coefficients.

#include "rosets/core.hpp"

namespace rosets {

struct QuantileIpmResult {
  Vector coefficients;
  double duality_gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

QuantileIpmResult quantile_regression_ipm(const Matrix& features, const Vector& labels, double tau,
                                          double gap_tol = 1e-11, int max_iterations = 200);

}  // namespace rosets
