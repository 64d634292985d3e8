#include "rosets/lp.hpp"

#include <cmath>
#include <vector>

namespace rosets::lp {

namespace {

constexpr double kPivotEps = 1e-11;

class Tableau {
 public:
  Tableau(Eigen::Index rows, Eigen::Index cols) : t_(Matrix::Zero(rows + 1, cols + 1)), basis_(rows) {}

  Matrix& table() { return t_; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index cols() const { return t_.cols() - 1; }
  double& rhs(Eigen::Index i) { return t_(i, cols()); }
  double& cost(Eigen::Index j) { return t_(rows(), j); }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  // Runs simplex iterations on the objective row; columns >= `entering_limit`
  // may not enter the basis.
  Status run(Eigen::Index entering_limit, int max_pivots, int& pivots) {
    const double scale = 1.0 + t_.cwiseAbs().maxCoeff();
    const double eps = kPivotEps * scale;
    while (pivots < max_pivots) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < entering_limit; ++j) {
        if (cost(j) < -eps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::optimal;
      Eigen::Index leave = -1;
      double best = 0.0;
      for (Eigen::Index i = 0; i < rows(); ++i) {
        const double a = t_(i, enter);
        if (a <= eps) continue;
        const double ratio = rhs(i) / a;
        if (leave < 0 || ratio < best - eps ||
            (std::abs(ratio - best) <= eps &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return Status::unbounded;
      pivot(leave, enter);
      ++pivots;
    }
    return Status::iteration_limit;
  }

  void price_out() {
    for (Eigen::Index i = 0; i < rows(); ++i) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      const double f = cost(b);
      if (f != 0.0) t_.row(rows()) -= f * t_.row(i);
    }
  }

 private:
  Matrix t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

Result maximize(const Vector& c, const Matrix& a, const Vector& b, int max_pivots) {
  require(a.rows() == b.size() && a.cols() == c.size(), "lp dimension mismatch");
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();

  std::vector<Eigen::Index> negative_rows;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (b[i] < 0.0) negative_rows.push_back(i);
  }
  const Eigen::Index k = static_cast<Eigen::Index>(negative_rows.size());
  const Eigen::Index slack0 = n;
  const Eigen::Index art0 = n + m;

  Tableau tab(m, n + m + k);
  Matrix& t = tab.table();
  Eigen::Index next_art = art0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    t.row(i).head(n) = sign * a.row(i);
    t(i, slack0 + i) = sign;
    tab.rhs(i) = sign * b[i];
    if (sign < 0.0) {
      t(i, next_art) = 1.0;
      tab.basis()[static_cast<std::size_t>(i)] = next_art++;
    } else {
      tab.basis()[static_cast<std::size_t>(i)] = slack0 + i;
    }
  }

  Result result;
  if (k > 0) {
    for (Eigen::Index j = art0; j < art0 + k; ++j) tab.cost(j) = 1.0;
    tab.price_out();
    const Status s = tab.run(art0 + k, max_pivots, result.pivots);
    if (s == Status::iteration_limit) return result;
    if (tab.rhs(m) < -1e-9 * (1.0 + b.cwiseAbs().maxCoeff())) {
      result.status = Status::infeasible;
      return result;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (Eigen::Index i = 0; i < m; ++i) {
      if (tab.basis()[static_cast<std::size_t>(i)] < art0) continue;
      for (Eigen::Index j = 0; j < art0; ++j) {
        if (std::abs(t(i, j)) > kPivotEps) {
          tab.pivot(i, j);
          break;
        }
      }
    }
    t.row(m).setZero();
  }

  for (Eigen::Index j = 0; j < n; ++j) tab.cost(j) = -c[j];
  tab.price_out();
  result.status = tab.run(art0, max_pivots, result.pivots);
  if (result.status != Status::optimal) return result;

  result.x = Vector::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index bv = tab.basis()[static_cast<std::size_t>(i)];
    if (bv < n) result.x[bv] = tab.rhs(i);
  }
  result.objective = c.dot(result.x);
  return result;
}

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

}  // namespace rosets::lp
