#pragma once

// CDFs from regularized incomplete gamma/beta functions, and quantiles found
// by bisection on those CDFs.

#include <functional>

namespace rosets::dist {

inline constexpr double kQuantileTol = 1e-10;

double normal_cdf(double x);
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
/// Regularized incomplete beta I_x(a, b).
double regularized_beta(double x, double a, double b);

double chi_squared_cdf(double x, double dof);
double chi_squared_quantile(double p, double dof);

double f_cdf(double x, double dof_num, double dof_den);
double f_quantile(double p, double dof_num, double dof_den);

/// Smallest x (to `tol`) with cdf(x) >= p, given cdf(lo) <= p. The upper end
/// of the bracket is grown geometrically from `hi` when needed.
double bisect_quantile(const std::function<double(double)>& cdf, double p, double lo, double hi,
                       double tol = kQuantileTol);

}  // namespace rosets::dist
