#pragma once

// Domain types shared by every module: labeled samples, linear predictors,
// interval set-functions, box uncertainty sets and the decision-problem
// contract instantiated by the minimum-variance portfolio.

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rosets {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kKktTol = 1e-6;
inline constexpr double kNormSlack = 1e-9;

/// Selects the OpenMP kernel or its serial reference. Both produce identical
/// results; the serial path exists for testing and benchmarking.
enum class Execution { serial, parallel };

/// Labeled sample S: row i of `features` pairs with `labels[i]`.
class Dataset {
 public:
  Dataset(Matrix features, Vector labels);

  const Matrix& features() const { return features_; }
  const Vector& labels() const { return labels_; }
  std::size_t size() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }

  /// Largest row norm; the X_b of the linear-class complexity bounds.
  double max_row_norm() const;

 private:
  Matrix features_;
  Vector labels_;
};

/// Feature vectors whose labels feed the decision problem.
class QueryBatch {
 public:
  explicit QueryBatch(Matrix features);

  const Matrix& features() const { return features_; }
  std::size_t size() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }

 private:
  Matrix features_;
};

/// Appends a constant 1 column so an intercept stays a plain coefficient.
Dataset with_intercept(const Dataset& data);
QueryBatch with_intercept(const QueryBatch& queries);

/// x -> coefficients^T x with ||coefficients||_2 <= norm_bound.
class LinearModel {
 public:
  LinearModel(Vector coefficients, double norm_bound);

  const Vector& coefficients() const { return coefficients_; }
  double norm_bound() const { return norm_bound_; }
  std::size_t dim() const { return static_cast<std::size_t>(coefficients_.size()); }

  double predict(const Eigen::Ref<const Vector>& x) const;
  Vector predict_rows(const Matrix& rows) const;

 private:
  Vector coefficients_;
  double norm_bound_;
};

struct Interval {
  double lower;
  double upper;

  bool contains(double y) const { return y >= lower && y <= upper; }
  double width() const { return upper - lower; }
};

/// Symmetric interval set-function x -> [center(x) - w, center(x) + w].
class IntervalFunction {
 public:
  IntervalFunction(LinearModel center, double half_width, double miss_rate = 0.0);

  const LinearModel& center() const { return center_; }
  double half_width() const { return half_width_; }
  /// Empirical miss rate on the sample it was fit on.
  double miss_rate() const { return miss_rate_; }

  Interval evaluate(const Eigen::Ref<const Vector>& x) const;

 private:
  LinearModel center_;
  double half_width_;
  double miss_rate_;
};

/// Product of m closed intervals [lower_j, upper_j].
class BoxUncertaintySet {
 public:
  BoxUncertaintySet(Vector lower, Vector upper);

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  std::size_t dim() const { return static_cast<std::size_t>(lower_.size()); }

  bool contains(const Eigen::Ref<const Vector>& u, double tol = 0.0) const;
  /// True when `other` lies inside this box coordinatewise.
  bool contains(const BoxUncertaintySet& other, double tol = 0.0) const;
  Vector center() const { return 0.5 * (lower_ + upper_); }

 private:
  Vector lower_;
  Vector upper_;
};

/// min_pi f(pi, u) s.t. F(pi, u) in K, with a hook for the box counterpart.
class DecisionProblem {
 public:
  virtual ~DecisionProblem() = default;

  virtual std::size_t dimension() const = 0;
  virtual double objective(const Vector& decision, const Vector& u) const = 0;
  virtual bool feasible(const Vector& decision, const Vector& u, double tol) const = 0;
  /// Feasibility for every u in the box (exact robust counterpart check).
  virtual bool robust_feasible(const Vector& decision, const BoxUncertaintySet& box,
                               double tol) const = 0;
};

/// min pi^T Sigma pi  s.t.  1^T pi = 1,  y^T pi >= c  (and pi >= 0 if long_only).
class PortfolioProblem final : public DecisionProblem {
 public:
  PortfolioProblem(Matrix covariance, double min_return, bool long_only = false);

  const Matrix& covariance() const { return covariance_; }
  double min_return() const { return min_return_; }
  bool long_only() const { return long_only_; }

  std::size_t dimension() const override {
    return static_cast<std::size_t>(covariance_.rows());
  }
  double objective(const Vector& weights, const Vector& returns) const override;
  bool feasible(const Vector& weights, const Vector& returns, double tol) const override;
  bool robust_feasible(const Vector& weights, const BoxUncertaintySet& box,
                       double tol) const override;

  /// min over y in box of y^T weights.
  static double worst_case_return(const Vector& weights, const BoxUncertaintySet& box);

 private:
  Matrix covariance_;
  double min_return_;
  bool long_only_;
};

bool portfolio_feasible(const PortfolioProblem& problem, const Vector& weights,
                        const Vector& returns, double tol = kFeasibilityTol);

// Throws std::invalid_argument with `what` when the condition fails.
inline void require(bool condition, const std::string& what) {
  if (!condition) throw std::invalid_argument(what);
}

}  // namespace rosets
