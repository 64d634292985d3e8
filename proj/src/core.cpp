#include "rosets/core.hpp"

#include <cmath>

namespace rosets {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

Dataset::Dataset(Matrix features, Vector labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  require(features_.rows() >= 1, "dataset needs at least one example");
  require(features_.cols() >= 1, "dataset needs at least one feature");
  require(features_.rows() == labels_.size(), "features and labels disagree on n");
  require(all_finite(features_) && labels_.allFinite(), "dataset contains non-finite values");
}

double Dataset::max_row_norm() const { return features_.rowwise().norm().maxCoeff(); }

QueryBatch::QueryBatch(Matrix features) : features_(std::move(features)) {
  require(features_.rows() >= 1, "query batch needs at least one row");
  require(features_.cols() >= 1, "query batch needs at least one feature");
  require(all_finite(features_), "query batch contains non-finite values");
}

namespace {

Matrix append_ones(const Matrix& x) {
  Matrix out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x;
  out.col(x.cols()).setOnes();
  return out;
}

}  // namespace

Dataset with_intercept(const Dataset& data) {
  return Dataset(append_ones(data.features()), data.labels());
}

QueryBatch with_intercept(const QueryBatch& queries) {
  return QueryBatch(append_ones(queries.features()));
}

LinearModel::LinearModel(Vector coefficients, double norm_bound)
    : coefficients_(std::move(coefficients)), norm_bound_(norm_bound) {
  require(coefficients_.size() >= 1, "model needs at least one coefficient");
  require(norm_bound_ > 0.0, "norm bound must be positive");
  require(coefficients_.allFinite(), "model coefficients must be finite");
  require(coefficients_.norm() <= norm_bound_ + kNormSlack,
          "model coefficients exceed the norm bound");
}

double LinearModel::predict(const Eigen::Ref<const Vector>& x) const {
  require(x.size() == coefficients_.size(), "feature dimension mismatch");
  return coefficients_.dot(x);
}

Vector LinearModel::predict_rows(const Matrix& rows) const {
  require(rows.cols() == coefficients_.size(), "feature dimension mismatch");
  return rows * coefficients_;
}

IntervalFunction::IntervalFunction(LinearModel center, double half_width, double miss_rate)
    : center_(std::move(center)), half_width_(half_width), miss_rate_(miss_rate) {
  require(half_width_ >= 0.0 && std::isfinite(half_width_), "half width must be finite and >= 0");
  require(miss_rate_ >= 0.0 && miss_rate_ <= 1.0, "miss rate must lie in [0, 1]");
}

Interval IntervalFunction::evaluate(const Eigen::Ref<const Vector>& x) const {
  const double c = center_.predict(x);
  return {c - half_width_, c + half_width_};
}

BoxUncertaintySet::BoxUncertaintySet(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  require(lower_.size() >= 1, "box needs at least one coordinate");
  require(lower_.size() == upper_.size(), "box bounds disagree on dimension");
  require(lower_.allFinite() && upper_.allFinite(), "box bounds must be finite");
  require((lower_.array() <= upper_.array()).all(), "box lower bound exceeds upper bound");
}

bool BoxUncertaintySet::contains(const Eigen::Ref<const Vector>& u, double tol) const {
  require(u.size() == lower_.size(), "box dimension mismatch");
  return ((u.array() >= lower_.array() - tol) && (u.array() <= upper_.array() + tol)).all();
}

bool BoxUncertaintySet::contains(const BoxUncertaintySet& other, double tol) const {
  require(other.dim() == dim(), "box dimension mismatch");
  return ((other.lower_.array() >= lower_.array() - tol) &&
          (other.upper_.array() <= upper_.array() + tol))
      .all();
}

PortfolioProblem::PortfolioProblem(Matrix covariance, double min_return, bool long_only)
    : covariance_(std::move(covariance)), min_return_(min_return), long_only_(long_only) {
  require(covariance_.rows() >= 1 && covariance_.rows() == covariance_.cols(),
          "covariance must be square");
  require(covariance_.allFinite() && std::isfinite(min_return_),
          "portfolio data must be finite");
  require((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() <= 1e-10,
          "covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance_, Eigen::EigenvaluesOnly);
  require(eig.eigenvalues().minCoeff() >= -1e-10, "covariance must be positive semidefinite");
}

double PortfolioProblem::objective(const Vector& weights, const Vector&) const {
  require(weights.size() == covariance_.rows(), "weight dimension mismatch");
  return weights.dot(covariance_ * weights);
}

bool PortfolioProblem::feasible(const Vector& weights, const Vector& returns, double tol) const {
  require(weights.size() == covariance_.rows() && returns.size() == covariance_.rows(),
          "portfolio dimension mismatch");
  if (std::abs(weights.sum() - 1.0) > tol) return false;
  if (returns.dot(weights) < min_return_ - tol) return false;
  if (long_only_ && (weights.array() < -tol).any()) return false;
  return true;
}

double PortfolioProblem::worst_case_return(const Vector& weights, const BoxUncertaintySet& box) {
  require(weights.size() == static_cast<Eigen::Index>(box.dim()), "box dimension mismatch");
  double total = 0.0;
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    total += weights[j] >= 0.0 ? box.lower()[j] * weights[j] : box.upper()[j] * weights[j];
  }
  return total;
}

bool PortfolioProblem::robust_feasible(const Vector& weights, const BoxUncertaintySet& box,
                                       double tol) const {
  require(weights.size() == covariance_.rows(), "weight dimension mismatch");
  if (std::abs(weights.sum() - 1.0) > tol) return false;
  if (long_only_ && (weights.array() < -tol).any()) return false;
  return worst_case_return(weights, box) >= min_return_ - tol;
}

bool portfolio_feasible(const PortfolioProblem& problem, const Vector& weights,
                        const Vector& returns, double tol) {
  return problem.feasible(weights, returns, tol);
}

}  // namespace rosets
