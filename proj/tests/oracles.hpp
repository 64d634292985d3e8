#pragma once

// Independent reference computations used as test oracles. None of these
// share code paths with the library routines they check.

#include "rosets/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

using rosets::Matrix;
using rosets::Vector;

/// Exact E_sigma[(B/n) ||sum sigma_i x_i||] by enumerating all 2^n patterns.
inline double rademacher_linear_exact(const Matrix& x, double b) {
  const int n = static_cast<int>(x.rows());
  double total = 0.0;
  for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
    Vector acc = Vector::Zero(x.cols());
    for (int i = 0; i < n; ++i) acc += ((mask >> i) & 1UL ? 1.0 : -1.0) * x.row(i).transpose();
    total += b / n * acc.norm();
  }
  return total / static_cast<double>(1UL << n);
}

/// Set of tau-quantile minimizers of sum rho_tau(y_i - q) over q: the closed
/// interval between the order statistics at ranks floor(n tau) and ceil(n tau).
inline std::pair<double, double> sample_quantile_range(std::vector<double> y, double tau) {
  std::sort(y.begin(), y.end());
  const double nt = tau * static_cast<double>(y.size());
  const auto lo = static_cast<std::size_t>(std::max(1.0, std::ceil(nt)));
  const auto hi = static_cast<std::size_t>(std::min(static_cast<double>(y.size()), std::floor(nt) + 1.0));
  return {y[lo - 1], y[std::max(lo, hi) - 1]};
}

/// min over b of sum rho_tau(y - X b) by enumerating all d-subsets of rows
/// that interpolate (an optimal basic solution always exists).
inline double quantile_loss_bruteforce(const Matrix& x, const Vector& y, double tau) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> idx(d);
  for (int i = 0; i < d; ++i) idx[i] = i;
  for (;;) {
    Matrix a(d, d);
    Vector rhs(d);
    for (int k = 0; k < d; ++k) {
      a.row(k) = x.row(idx[k]);
      rhs[k] = y[idx[k]];
    }
    Eigen::FullPivLU<Matrix> lu(a);
    if (lu.isInvertible()) {
      const Vector b = lu.solve(rhs);
      double loss = 0.0;
      for (int i = 0; i < n; ++i) {
        const double r = y[i] - x.row(i).dot(b);
        loss += r >= 0 ? tau * r : (tau - 1.0) * r;
      }
      best = std::min(best, loss / n);
    }
    int k = d - 1;
    while (k >= 0 && idx[k] == n - d + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < d; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best;
}

/// max q^T b over {b : ||X b - y||^2 / n <= t} by projected gradient ascent;
/// the projection onto the ellipsoid is found by bisection on its multiplier,
/// evaluated in the eigenbasis of X^T X.
inline double squared_sup_projected_ascent(const Matrix& x, const Vector& y, double t,
                                           const Vector& q, int iters = 20000) {
  const double n = static_cast<double>(x.rows());
  const Matrix g = x.transpose() * x;
  const Vector center = x.colPivHouseholderQr().solve(y);
  const double radius = n * t - (x * center - y).squaredNorm();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  const Matrix& v = eig.eigenvectors();
  const Vector& lam = eig.eigenvalues();
  // In eigen-coordinates w = V^T (b - center) the set is sum lam_k w_k^2 <= radius.
  auto quad = [&](const Vector& w) { return (lam.array() * w.array().square()).sum(); };
  auto project = [&](const Vector& w) -> Vector {
    if (quad(w) <= radius) return w;
    auto at = [&](double mu) -> Vector { return (w.array() / (1.0 + mu * lam.array())).matrix(); };
    double lo = 0.0, hi = 1.0;
    while (quad(at(hi)) > radius) hi *= 2.0;
    for (int k = 0; k < 200 && hi - lo > 1e-300; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (quad(at(mid)) <= radius ? hi : lo) = mid;
    }
    return at(hi);
  };
  const Vector qw = v.transpose() * q;
  const double step = std::sqrt(std::max(radius, 0.0) / lam.maxCoeff()) / std::max(qw.norm(), 1e-300);
  Vector w = Vector::Zero(center.size());
  double best = 0.0;
  for (int k = 0; k < iters; ++k) {
    const Vector next = project(w + step * qw);
    best = std::max(best, qw.dot(next));
    if ((next - w).norm() <= 1e-15 * std::max(1.0, w.norm())) break;
    w = next;
  }
  return q.dot(center) + best;
}

/// min pi^T S pi s.t. 1^T pi = 1, A pi >= b, by enumerating active sets and
/// solving each equality-constrained KKT system; the best feasible stationary
/// point over all faces is the optimum of the convex problem.
inline std::pair<Vector, double> qp_bruteforce(const Matrix& s, const Matrix& a, const Vector& b,
                                               bool& feasible) {
  const int m = static_cast<int>(s.rows());
  const int k = static_cast<int>(a.rows());
  feasible = false;
  Vector best_pi;
  double best = std::numeric_limits<double>::infinity();
  for (unsigned long mask = 0; mask < (1UL << k); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < k; ++i) {
      if ((mask >> i) & 1UL) act.push_back(i);
    }
    const int q = static_cast<int>(act.size()) + 1;
    if (q > m) continue;
    Matrix kkt = Matrix::Zero(m + q, m + q);
    Vector rhs = Vector::Zero(m + q);
    kkt.topLeftCorner(m, m) = 2.0 * s;
    kkt.block(0, m, m, 1) = Vector::Ones(m);
    kkt.block(m, 0, 1, m) = Vector::Ones(m).transpose();
    rhs[m] = 1.0;
    for (int r = 0; r < q - 1; ++r) {
      kkt.block(0, m + 1 + r, m, 1) = a.row(act[r]).transpose();
      kkt.block(m + 1 + r, 0, 1, m) = a.row(act[r]);
      rhs[m + 1 + r] = b[act[r]];
    }
    Eigen::FullPivLU<Matrix> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Vector sol = lu.solve(rhs);
    const Vector pi = sol.head(m);
    if (((a * pi - b).array() < -1e-10).any()) continue;
    const double obj = pi.dot(s * pi);
    if (obj < best) {
      best = obj;
      best_pi = pi;
      feasible = true;
    }
  }
  return {best_pi, best};
}

}  // namespace oracle
