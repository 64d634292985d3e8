#pragma once

// Dense two-phase tableau simplex for small linear programs
//   maximize c^T x  subject to  A x <= b,  x >= 0.
// Bland's rule keeps it finite on degenerate instances.

#include "rosets/core.hpp"

namespace rosets::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Result {
  Status status = Status::iteration_limit;
  Vector x;
  double objective = 0.0;
  int pivots = 0;
};

Result maximize(const Vector& c, const Matrix& a, const Vector& b, int max_pivots = 50000);

const char* to_string(Status s);

}  // namespace rosets::lp
