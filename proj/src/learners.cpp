#include "rosets/learners.hpp"

#include "rosets/quantile_ipm.hpp"
#include "rosets/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace rosets {

Loss Loss::pinball(double tau) {
  require(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1)");
  return {Kind::pinball, tau};
}

double Loss::operator()(double prediction, double label) const {
  const double r = label - prediction;
  return kind == Kind::squared ? r * r : pinball_loss(r, tau);
}

double Loss::lipschitz(double range) const {
  return kind == Kind::squared ? 2.0 * range : std::max(tau, 1.0 - tau);
}

double pinball_loss(double residual, double tau) {
  require(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1)");
  return residual >= 0.0 ? tau * residual : (tau - 1.0) * residual;
}

double empirical_loss(const LinearModel& model, const Dataset& data, const Loss& loss) {
  require(model.dim() == data.dim(), "model and data disagree on dimension");
  const Vector pred = model.predict_rows(data.features());
  double total = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) total += loss(pred[i], data.labels()[i]);
  return total / static_cast<double>(data.size());
}

double empirical_loss(const IntervalFunction& ifun, const Dataset& data) {
  require(ifun.center().dim() == data.dim(), "interval function and data disagree on dimension");
  const Vector pred = ifun.center().predict_rows(data.features());
  std::size_t misses = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (std::abs(data.labels()[i] - pred[i]) > ifun.half_width()) ++misses;
  }
  return static_cast<double>(misses) / static_cast<double>(data.size());
}

Vector project_to_ball(const Vector& v, double radius) {
  const double norm = v.norm();
  if (norm <= radius) return v;
  return v * (radius / norm);
}

LinearModel fit_least_squares(const Dataset& data, double norm_bound, const FitConfig&) {
  require(norm_bound > 0.0, "norm bound must be positive");
  const double n = static_cast<double>(data.size());
  const Matrix gram = data.features().transpose() * data.features() / n;
  const Vector moment = data.features().transpose() * data.labels() / n;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector& lambda = eig.eigenvalues();
  const Vector proj = eig.eigenvectors().transpose() * moment;
  const double cutoff = 1e-12 * std::max(1.0, lambda.maxCoeff());

  auto solution = [&](double mu) {
    Vector coef = Vector::Zero(proj.size());
    for (Eigen::Index k = 0; k < proj.size(); ++k) {
      if (lambda[k] > cutoff || mu > 0.0) coef[k] = proj[k] / (std::max(lambda[k], 0.0) + mu);
    }
    return Vector(eig.eigenvectors() * coef);
  };

  Vector beta = solution(0.0);
  if (beta.norm() > norm_bound) {
    // ||b(mu)|| decreases in mu; bracket then bisect for ||b(mu)|| = B.
    double lo = 0.0;
    double hi = std::max(1e-12, proj.norm() / norm_bound);
    while (solution(hi).norm() > norm_bound) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (solution(mid).norm() > norm_bound ? lo : hi) = mid;
    }
    beta = project_to_ball(solution(hi), norm_bound);
  }
  return LinearModel(std::move(beta), norm_bound);
}

namespace {

// Subgradient of the mean pinball loss at beta.
Vector pinball_subgradient(const Dataset& data, const Vector& beta, double tau) {
  const Vector resid = data.labels() - data.features() * beta;
  Vector weight(resid.size());
  for (Eigen::Index i = 0; i < resid.size(); ++i) {
    weight[i] = resid[i] > 0.0 ? tau : (resid[i] < 0.0 ? tau - 1.0 : 0.0);
  }
  return -(data.features().transpose() * weight) / static_cast<double>(data.size());
}

double mean_pinball(const Dataset& data, const Vector& beta, double tau) {
  const Vector resid = data.labels() - data.features() * beta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < resid.size(); ++i) total += pinball_loss(resid[i], tau);
  return total / static_cast<double>(data.size());
}

}  // namespace

LinearModel fit_quantile_subgradient(const Dataset& data, double tau, double norm_bound,
                                     const FitConfig& cfg, const Vector& start) {
  require(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1)");
  require(norm_bound > 0.0, "norm bound must be positive");
  require(cfg.max_iters >= 1 && cfg.tolerance > 0.0, "invalid fit configuration");
  const Eigen::Index d = static_cast<Eigen::Index>(data.dim());
  Rng rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Scale steps to the geometry of the class: radius over gradient bound.
  const double step_scale = cfg.init_step * norm_bound / std::max(1e-12, data.max_row_norm());

  Vector best = Vector::Zero(d);
  double best_loss = mean_pinball(data, best, tau);
  const int restarts = std::max(1, cfg.restarts);
  for (int rs = 0; rs < restarts; ++rs) {
    Vector beta(d);
    if (rs == 0 && start.size() == d) {
      beta = project_to_ball(start, norm_bound);
    } else if (rs == 0) {
      beta.setZero();
    } else {
      for (Eigen::Index k = 0; k < d; ++k) beta[k] = gauss(rng);
      beta = project_to_ball(beta, norm_bound * 0.5);
    }
    Vector avg = beta;
    double prev = mean_pinball(data, beta, tau);
    for (int t = 1; t <= cfg.max_iters; ++t) {
      const Vector g = pinball_subgradient(data, beta, tau);
      if (g.norm() < cfg.tolerance) break;
      const double eta = cfg.step_rule == StepRule::fixed ? step_scale
                                                          : step_scale / std::sqrt(static_cast<double>(t));
      beta = project_to_ball(beta - eta * g, norm_bound);
      avg += (beta - avg) / static_cast<double>(t + 1);
      if (t % 100 == 0) {
        const double cur = mean_pinball(data, avg, tau);
        if (std::abs(prev - cur) < cfg.tolerance * (1.0 + std::abs(cur))) break;
        prev = cur;
      }
    }
    for (const Vector* cand : {&beta, &avg}) {
      const double loss = mean_pinball(data, *cand, tau);
      if (loss < best_loss) {
        best_loss = loss;
        best = *cand;
      }
    }
  }
  return LinearModel(project_to_ball(best, norm_bound), norm_bound);
}

LinearModel fit_quantile(const Dataset& data, double tau, double norm_bound, const FitConfig& cfg) {
  require(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1)");
  require(norm_bound > 0.0, "norm bound must be positive");
  const QuantileIpmResult ipm = quantile_regression_ipm(data.features(), data.labels(), tau);
  if (ipm.coefficients.allFinite() && ipm.coefficients.norm() <= norm_bound + kNormSlack) {
    return LinearModel(project_to_ball(ipm.coefficients, norm_bound), norm_bound);
  }
  const Vector start = ipm.coefficients.allFinite() ? ipm.coefficients : Vector();
  return fit_quantile_subgradient(data, tau, norm_bound, cfg, start);
}

IntervalFunction fit_interval_function(const Dataset& data, double target_miss, double norm_bound,
                                       const FitConfig& cfg) {
  require(target_miss >= 0.0 && target_miss < 1.0, "target miss rate must lie in [0, 1)");
  LinearModel center = fit_quantile(data, 0.5, norm_bound, cfg);
  const Vector pred = center.predict_rows(data.features());
  std::vector<double> magnitude(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    magnitude[i] = std::abs(data.labels()[static_cast<Eigen::Index>(i)] - pred[static_cast<Eigen::Index>(i)]);
  }
  std::sort(magnitude.begin(), magnitude.end());
  const std::size_t n = magnitude.size();
  // At most `allowed` examples may sit strictly outside [-w, w].
  const auto allowed = static_cast<std::size_t>(
      std::floor(target_miss * static_cast<double>(n) * (1.0 + 1e-12)));
  const double width = magnitude[n - 1 - std::min(allowed, n - 1)];
  IntervalFunction provisional(center, width);
  const double miss = empirical_loss(provisional, data);
  return IntervalFunction(std::move(center), width, miss);
}

}  // namespace rosets
