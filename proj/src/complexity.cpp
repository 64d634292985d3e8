#include "rosets/complexity.hpp"

#include "rosets/rng.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace rosets {

namespace {

// Fills values[begin, end) using one random stream.
void rademacher_block(const Matrix& x, double scale, std::uint64_t seed, std::uint64_t block,
                      int begin, int end, std::vector<double>& values) {
  Rng rng = make_rng(seed, block);
  const Eigen::Index n = x.rows();
  Vector acc(x.cols());
  for (int k = begin; k < end; ++k) {
    acc.setZero();
    std::uint64_t bits = 0;
    int left = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (left == 0) {
        bits = rng();
        left = 64;
      }
      if (bits & 1U) {
        acc += x.row(i).transpose();
      } else {
        acc -= x.row(i).transpose();
      }
      bits >>= 1U;
      --left;
    }
    values[static_cast<std::size_t>(k)] = scale * acc.norm();
  }
}

}  // namespace

RademacherEstimate empirical_rademacher_linear(const Dataset& data, double norm_bound, int draws,
                                               std::uint64_t seed, int partitions, Execution exec) {
  require(draws >= 1, "need at least one Rademacher draw");
  require(partitions >= 1, "need at least one partition");
  require(norm_bound > 0.0, "norm bound must be positive");
  const Matrix& x = data.features();
  const double scale = norm_bound / static_cast<double>(data.size());
  std::vector<double> values(static_cast<std::size_t>(draws));
  const int parts = std::min(partitions, draws);

  auto run_block = [&](int p) {
    const int begin = static_cast<int>(static_cast<long long>(draws) * p / parts);
    const int end = static_cast<int>(static_cast<long long>(draws) * (p + 1) / parts);
    rademacher_block(x, scale, seed, static_cast<std::uint64_t>(p), begin, end, values);
  };

  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int p = 0; p < parts; ++p) run_block(p);
  } else {
    for (int p = 0; p < parts; ++p) run_block(p);
  }

  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / draws;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = draws > 1 ? std::sqrt(ss / (draws - 1)) : 0.0;
  return {mean, sd / std::sqrt(static_cast<double>(draws)), draws, RademacherMethod::monte_carlo};
}

RademacherEstimate contraction_bound(double lipschitz, const RademacherEstimate& base) {
  require(lipschitz > 0.0, "Lipschitz constant must be positive");
  RademacherEstimate out = base;
  out.value = 2.0 * lipschitz * base.value;
  out.std_error = 2.0 * lipschitz * base.std_error;
  return out;
}

LinearClassBounds linear_class_bounds(double max_feature_norm, double norm_bound, std::size_t n) {
  require(max_feature_norm > 0.0 && norm_bound > 0.0 && n >= 1, "invalid linear class bound inputs");
  const double xb = max_feature_norm * norm_bound;
  const double root_n = std::sqrt(static_cast<double>(n));
  return {xb / root_n, 8.0 * xb * xb / root_n};
}

double kernel_class_bound(const Vector& gram_diagonal, double norm_bound, double lipschitz,
                          std::size_t n) {
  require(n >= 1, "n must be positive");
  require((gram_diagonal.array() >= 0.0).all(), "kernel diagonal entries must be nonnegative");
  return 2.0 * lipschitz * (norm_bound / static_cast<double>(n)) * std::sqrt(gram_diagonal.sum());
}

double interval_miss_class_bound(std::size_t n, std::size_t dim) {
  require(n >= 1, "n must be positive");
  const double v = static_cast<double>(dim + 2);
  const double nn = static_cast<double>(n);
  // Growth function of one halfspace class: 2^n below v, (e n / v)^v above.
  const double log_growth = nn <= v ? nn * std::numbers::ln2 : v * std::log(std::numbers::e * nn / v);
  const double bound = std::sqrt(2.0 * (std::numbers::ln2 + 2.0 * log_growth) / nn);
  return std::min(1.0, bound);
}

double population_rademacher(double empirical, double loss_range, double delta, std::size_t n) {
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  return empirical + loss_range * std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
}

const char* to_string(RademacherMethod m) {
  switch (m) {
    case RademacherMethod::monte_carlo: return "monte_carlo";
    case RademacherMethod::analytic_linear: return "analytic_linear";
    case RademacherMethod::analytic_kernel: return "analytic_kernel";
  }
  return "unknown";
}

}  // namespace rosets
