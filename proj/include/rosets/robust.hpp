#pragma once

// Robust minimum-variance portfolio: exact box counterpart, scenario
// counterpart, the nominal problem, and samplers for scenario generation.

#include "rosets/core.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace rosets {

enum class SolveStatus { optimal, infeasible, max_iter };

const char* to_string(SolveStatus s);

struct RobustSolution {
  Vector weights;
  double objective = 0.0;
  SolveStatus status = SolveStatus::max_iter;
  double kkt_residual = 0.0;
  int iterations = 0;
  /// Infeasibility certificate or numerical notes (e.g. a ridge was added).
  std::string message;
};

/// min pi^T Sigma pi s.t. 1^T pi = 1 and y^T pi >= c for every y in the box.
/// Worst-case vertices are generated lazily inside a dual active-set QP, so
/// only the vertices that become active are ever materialized.
RobustSolution solve_box_robust(const PortfolioProblem& problem, const BoxUncertaintySet& box);

/// Same objective with one return constraint per scenario row.
RobustSolution solve_scenario_robust(const PortfolioProblem& problem, const Matrix& scenarios);

RobustSolution solve_nominal(const PortfolioProblem& problem, const Vector& returns);

/// `count` x m matrix of i.i.d. uniform points in the box.
Matrix sample_uniform_box(const BoxUncertaintySet& box, std::size_t count, std::uint64_t seed);

using MembershipOracle = std::function<bool(const Vector&)>;

struct HitAndRunOptions {
  double chord_tol = 1e-10;
  double initial_step = 1.0;
  int max_doublings = 64;
  int max_redraws = 1000;
};

/// Hit-and-run walk on a bounded convex set given by `member`. Discards
/// `burn_in` steps, then keeps every `thin`-th step until `count` rows.
Matrix hit_and_run(const MembershipOracle& member, const Vector& start, std::size_t count,
                   std::size_t burn_in, std::size_t thin, std::uint64_t seed,
                   const HitAndRunOptions& options = {});

}  // namespace rosets
