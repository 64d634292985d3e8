#pragma once

// Empirical risk minimization over the norm-bounded linear class:
// least squares, pinball-loss quantile regression and the symmetric
// interval set-function learner.

#include "rosets/core.hpp"

#include <cstdint>

namespace rosets {

enum class StepRule { fixed, inverse_sqrt };

struct FitConfig {
  int max_iters = 4000;
  StepRule step_rule = StepRule::inverse_sqrt;
  double init_step = 1.0;
  double tolerance = 1e-8;
  std::uint64_t seed = 0;
  int restarts = 4;
};

/// Loss attached to a linear model: squared (y - b(x))^2 or pinball at tau.
struct Loss {
  enum class Kind { squared, pinball };
  Kind kind = Kind::squared;
  double tau = 0.5;

  static Loss squared() { return {Kind::squared, 0.5}; }
  static Loss pinball(double tau);

  double operator()(double prediction, double label) const;
  /// Lipschitz constant in the prediction over |prediction - label| <= range.
  double lipschitz(double range) const;
};

/// tau * r for r >= 0, (tau - 1) * r otherwise.
double pinball_loss(double residual, double tau);

double empirical_loss(const LinearModel& model, const Dataset& data, const Loss& loss);
/// Fraction of examples whose label falls outside the interval at x.
double empirical_loss(const IntervalFunction& ifun, const Dataset& data);

/// Minimizer of the mean squared loss over ||b|| <= norm_bound.
LinearModel fit_least_squares(const Dataset& data, double norm_bound, const FitConfig& cfg = {});

/// Minimizer of the mean pinball loss over ||b|| <= norm_bound. The
/// unconstrained LP is solved by interior point; when its solution leaves the
/// norm ball, projected subgradient descent takes over.
LinearModel fit_quantile(const Dataset& data, double tau, double norm_bound,
                         const FitConfig& cfg = {});

/// Projected subgradient descent with iterate averaging and random restarts.
/// `start`, when non-empty, seeds the first restart.
LinearModel fit_quantile_subgradient(const Dataset& data, double tau, double norm_bound,
                                     const FitConfig& cfg, const Vector& start = Vector());

/// Median model plus the smallest half-width whose training miss rate is at
/// most target_miss.
IntervalFunction fit_interval_function(const Dataset& data, double target_miss, double norm_bound,
                                       const FitConfig& cfg = {});

/// Euclidean projection onto {||b|| <= radius}.
Vector project_to_ball(const Vector& v, double radius);

}  // namespace rosets
