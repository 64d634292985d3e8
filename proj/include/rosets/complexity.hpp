#pragma once

// Rademacher complexity: Monte Carlo estimation of the empirical average for
// the norm-bounded linear class, contraction, and closed-form class bounds.

#include "rosets/core.hpp"

#include <cstdint>

namespace rosets {

enum class RademacherMethod { monte_carlo, analytic_linear, analytic_kernel };

struct RademacherEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int draws = 0;
  RademacherMethod method = RademacherMethod::analytic_linear;
};

/// Monte Carlo estimate of E_sigma[(B/n) ||sum_i sigma_i x_i||_2], the exact
/// inner supremum for {x -> b^T x : ||b|| <= B}.
///
/// Draws are split into `partitions` contiguous blocks, each with its own
/// random stream derived from `seed`; per-draw values are merged in draw
/// order, so the result depends only on (seed, draws, partitions).
RademacherEstimate empirical_rademacher_linear(const Dataset& data, double norm_bound, int draws,
                                               std::uint64_t seed, int partitions = 1,
                                               Execution exec = Execution::parallel);

/// R(l o F) <= 2 L R(F) applied to an estimate.
RademacherEstimate contraction_bound(double lipschitz, const RademacherEstimate& base);

struct LinearClassBounds {
  double r_base = 0.0;     // X_b B_b / sqrt(n)
  double r_sq_loss = 0.0;  // 8 (X_b B_b)^2 / sqrt(n)
};

LinearClassBounds linear_class_bounds(double max_feature_norm, double norm_bound, std::size_t n);

/// 2 L (B_b / n) sqrt(sum_i k(x_i, x_i)).
double kernel_class_bound(const Vector& gram_diagonal, double norm_bound, double lipschitz,
                          std::size_t n);

/// Bound on the empirical Rademacher average of the miss-indicator class
/// {(x, y) -> 1[|y - b^T x| > w]}. That class is a union of two halfspace
/// classes in (x, y), so Sauer's lemma and Massart's finite-class lemma give
/// sqrt(2 (log 2 + 2 v log(e n / v)) / n) with v = dim + 2, capped at 1.
double interval_miss_class_bound(std::size_t n, std::size_t dim);

/// Population average from the empirical one: R <= R_S + M sqrt(log(1/delta)/(2n)).
double population_rademacher(double empirical, double loss_range, double delta, std::size_t n);

const char* to_string(RademacherMethod m);

}  // namespace rosets
