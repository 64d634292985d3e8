#include "oracles.hpp"
#include "rosets/learners.hpp"
#include "rosets/rng.hpp"
#include "rosets/synth.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

using namespace rosets;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Dataset gaussian_line(std::size_t n, std::uint64_t seed) {
  SynthSpec spec;
  spec.d = 2;
  spec.true_coefficients = Vector::Ones(2);
  spec.noise_scale = 0.5;
  spec.seed = seed;
  spec.append_constant = true;
  return generate(spec, n);
}

}  // namespace

TEST_CASE("pinball loss values") {
  CHECK(pinball_loss(2.0, 0.9) == Catch::Approx(1.8));
  CHECK(pinball_loss(-2.0, 0.9) == Catch::Approx(0.2));
  CHECK(pinball_loss(0.0, 0.3) == 0.0);
  CHECK(Loss::pinball(0.25)(1.0, 3.0) == Catch::Approx(0.5));
  CHECK(Loss::squared()(1.0, 3.0) == Catch::Approx(4.0));
  CHECK_THROWS_AS(Loss::pinball(1.0), std::invalid_argument);
}

TEST_CASE("least squares matches the normal equations") {
  const Dataset data = gaussian_line(500, 3);
  const Matrix& x = data.features();
  const Vector expect = (x.transpose() * x).ldlt().solve(x.transpose() * data.labels());
  const LinearModel fit = fit_least_squares(data, 100.0);
  CHECK((fit.coefficients() - expect).norm() < 1e-8);
}

TEST_CASE("least squares respects a binding norm constraint") {
  const Dataset data = gaussian_line(500, 4);
  const LinearModel fit = fit_least_squares(data, 0.5);
  CHECK_THAT(fit.coefficients().norm(), WithinAbs(0.5, 1e-6));
  // KKT: the negative gradient is parallel to b on the sphere.
  const Matrix& x = data.features();
  const Vector grad = x.transpose() * (x * fit.coefficients() - data.labels());
  const double cosine = -grad.dot(fit.coefficients()) / (grad.norm() * fit.coefficients().norm());
  CHECK(cosine > 1.0 - 1e-6);
}

TEST_CASE("constant-feature quantile fit lands on the sample quantile") {
  Rng rng = make_rng(9, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 401;
  Vector y(n);
  std::vector<double> ys(n);
  for (int i = 0; i < n; ++i) ys[i] = y[i] = g(rng);
  const Dataset data(Matrix::Ones(n, 1), y);
  std::vector<double> sorted = ys;
  std::sort(sorted.begin(), sorted.end());
  for (double tau : {0.05, 0.5, 0.95}) {
    const auto [lo, hi] = oracle::sample_quantile_range(ys, tau);
    const double q = fit_quantile(data, tau, 100.0).coefficients()[0];
    // Within one order-statistic step of the minimizer interval.
    const auto pos = std::lower_bound(sorted.begin(), sorted.end(), lo) - sorted.begin();
    const double below = sorted[std::max<long>(pos - 1, 0)];
    const auto pos_hi = std::upper_bound(sorted.begin(), sorted.end(), hi) - sorted.begin();
    const double above = sorted[std::min<long>(pos_hi, n - 1)];
    CHECK(q >= below - 1e-9);
    CHECK(q <= above + 1e-9);
  }
}

TEST_CASE("quantile fit attains the brute-force minimum") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset data = gaussian_line(30, 100 + seed);
    for (double tau : {0.1, 0.5, 0.9}) {
      const double expect = oracle::quantile_loss_bruteforce(data.features(), data.labels(), tau);
      const LinearModel fit = fit_quantile(data, tau, 100.0);
      const double got = empirical_loss(fit, data, Loss::pinball(tau));
      CHECK(got >= expect - 1e-9);
      CHECK(got <= expect + 1e-6);
    }
  }
}

TEST_CASE("quantile fit under a binding norm is feasible and no worse than scaling") {
  const Dataset data = gaussian_line(300, 11);
  const double bound = 0.4;
  const LinearModel fit = fit_quantile(data, 0.7, bound);
  CHECK(fit.coefficients().norm() <= bound + 1e-9);
  const Vector free = fit_quantile(data, 0.7, 100.0).coefficients();
  const LinearModel scaled(project_to_ball(free, bound), bound);
  const Loss loss = Loss::pinball(0.7);
  CHECK(empirical_loss(fit, data, loss) <= empirical_loss(scaled, data, loss) + 1e-6);
}

TEST_CASE("quantile fit recovers y = 2x") {
  const int n = 50;
  Matrix x(n, 1);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 0.1 * (i + 1);
    y[i] = 2.0 * x(i, 0);
  }
  const Dataset data(x, y);
  for (double tau : {0.2, 0.5, 0.8}) {
    CHECK_THAT(fit_quantile(data, tau, 10.0).coefficients()[0], WithinAbs(2.0, 1e-6));
  }
}

TEST_CASE("interval function with zero target covers every training point") {
  const Dataset data = gaussian_line(200, 12);
  const IntervalFunction f = fit_interval_function(data, 0.0, 100.0);
  const Vector resid = data.labels() - f.center().predict_rows(data.features());
  CHECK_THAT(f.half_width(), WithinAbs(resid.cwiseAbs().maxCoeff(), 1e-12));
  CHECK(f.miss_rate() == 0.0);
  CHECK(empirical_loss(f, data) == 0.0);
}

TEST_CASE("interval half-width under normal noise tracks the residual quantile") {
  SynthSpec spec;
  spec.d = 1;
  spec.true_coefficients = Vector::Ones(1);
  spec.noise_scale = 1.0;
  spec.seed = 13;
  spec.append_constant = true;
  const Dataset data = generate(spec, 4000);
  const IntervalFunction f = fit_interval_function(data, 0.1, 100.0);
  CHECK(f.miss_rate() <= 0.1);
  // Two-sided 90% normal half-width is 1.645; the empirical one sits near it.
  const Vector abs_resid =
      (data.labels() - f.center().predict_rows(data.features())).cwiseAbs();
  const auto inside = (abs_resid.array() <= f.half_width()).count();
  const double frac = static_cast<double>(inside) / 4000.0;
  CHECK(frac >= 0.89);
  CHECK(frac <= 0.91);
  CHECK_THAT(f.half_width(), WithinRel(1.645, 0.08));
}

TEST_CASE("interval half-width shrinks as the target miss grows") {
  const Dataset data = gaussian_line(500, 14);
  double prev = std::numeric_limits<double>::infinity();
  for (double target : {0.0, 0.05, 0.1, 0.2, 0.4}) {
    const IntervalFunction f = fit_interval_function(data, target, 100.0);
    CHECK(f.half_width() <= prev + 1e-12);
    CHECK(f.miss_rate() <= target + 1e-12);
    prev = f.half_width();
  }
}

TEST_CASE("subgradient fallback approaches the interior-point optimum") {
  const Dataset data = gaussian_line(200, 15);
  const double best = empirical_loss(fit_quantile(data, 0.5, 100.0), data, Loss::pinball(0.5));
  FitConfig cfg;
  cfg.max_iters = 20000;
  const double sub =
      empirical_loss(fit_quantile_subgradient(data, 0.5, 100.0, cfg), data, Loss::pinball(0.5));
  CHECK(sub >= best - 1e-9);
  CHECK(sub <= best + 1e-2);
}

TEST_CASE("projection onto the ball") {
  Vector v(2);
  v << 3, 4;
  CHECK_THAT(project_to_ball(v, 1.0).norm(), WithinAbs(1.0, 1e-15));
  CHECK(project_to_ball(v, 10.0) == v);
}
