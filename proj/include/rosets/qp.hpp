#pragma once

// Goldfarb-Idnani dual active-set method for strictly convex QPs
//   minimize 1/2 x^T H x + g^T x  subject to  n_i^T x >= b_i.
// Constraints are pulled from an oracle that reports the most violated one,
// so a constraint family can be generated lazily (e.g. box vertices).

#include "rosets/core.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rosets::qp {

struct Constraint {
  Vector normal;
  double rhs = 0.0;
  /// Caller-assigned tag, carried through to Result::active.
  int id = -1;

  double slack(const Vector& x) const { return normal.dot(x) - rhs; }
};

/// Returns the most violated constraint at x, or nullopt if x is feasible
/// within the oracle's tolerance.
using ViolationOracle = std::function<std::optional<Constraint>(const Vector& x)>;

enum class Status { optimal, infeasible, iteration_limit };

struct Result {
  Status status = Status::iteration_limit;
  Vector x;
  double objective = 0.0;
  std::vector<Constraint> active;
  Vector multipliers;
  int iterations = 0;
  std::string message;
};

struct Options {
  int max_iterations = 10000;
  double zero_tol = 1e-13;
};

/// H must be symmetric positive definite.
Result solve(const Matrix& hessian, const Vector& linear, const ViolationOracle& oracle,
             const Options& options = {});

/// Oracle over an explicit list: rows of `normals` with right-hand sides.
ViolationOracle explicit_oracle(Matrix normals, Vector rhs, double tol);

const char* to_string(Status s);

}  // namespace rosets::qp
