#include "rosets/synth.hpp"

#include "rosets/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace rosets {

SynthKind parse_synth_kind(const std::string& name) {
  if (name == "linear_gaussian") return SynthKind::linear_gaussian;
  if (name == "heteroscedastic") return SynthKind::heteroscedastic;
  if (name == "bimodal") return SynthKind::bimodal;
  throw std::invalid_argument("unknown data kind '" + name +
                              "' (expected linear_gaussian, heteroscedastic or bimodal)");
}

const char* to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::linear_gaussian: return "linear_gaussian";
    case SynthKind::heteroscedastic: return "heteroscedastic";
    case SynthKind::bimodal: return "bimodal";
  }
  return "unknown";
}

void SynthSpec::validate() const {
  require(d >= 1, "d must be at least 1");
  require(true_coefficients.size() == d, "true coefficients must have d entries");
  require(true_coefficients.allFinite(), "true coefficients must be finite");
  require(noise_scale >= 0.0 && std::isfinite(noise_scale), "noise scale must be >= 0");
  require(std::isfinite(intercept) && std::isfinite(offset), "intercept and offset must be finite");
}

namespace {

double noise_sd(const SynthSpec& spec, const Eigen::Ref<const Vector>& raw) {
  return spec.kind == SynthKind::heteroscedastic ? spec.noise_scale * (1.0 + raw.norm())
                                                 : spec.noise_scale;
}

}  // namespace

Matrix draw_features(const SynthSpec& spec, std::size_t count, Rng& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Matrix x(static_cast<Eigen::Index>(count), spec.feature_dim());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < spec.d; ++j) x(i, j) = unit(rng);
    if (spec.append_constant) x(i, spec.d) = 1.0;
  }
  return x;
}

double draw_label(const SynthSpec& spec, const Eigen::Ref<const Vector>& features, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto raw = features.head(spec.d);
  double y = spec.intercept + spec.true_coefficients.dot(raw);
  if (spec.kind == SynthKind::bimodal) {
    y += (rng() & 1U) ? spec.offset : -spec.offset;
  }
  return y + noise_sd(spec, raw) * gauss(rng);
}

Dataset generate_with(const SynthSpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  require(n >= 1, "n must be at least 1");
  Matrix x = draw_features(spec, n, rng);
  Vector y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y[i] = draw_label(spec, x.row(i).transpose(), rng);
  return Dataset(std::move(x), std::move(y));
}

Dataset generate(const SynthSpec& spec, std::size_t n, std::uint64_t stream) {
  Rng rng = make_rng(spec.seed, stream);
  return generate_with(spec, n, rng);
}

double conditional_quantile(const SynthSpec& spec, const Eigen::Ref<const Vector>& features,
                            double tau) {
  require(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1)");
  const auto raw = features.head(spec.d);
  const double mean = spec.intercept + spec.true_coefficients.dot(raw);
  const double s = noise_sd(spec, raw);
  if (spec.kind != SynthKind::bimodal) return mean + s * dist::normal_quantile(tau);
  const double o = std::abs(spec.offset);
  if (s == 0.0) return tau <= 0.5 ? mean - o : mean + o;
  auto cdf = [&](double t) {
    return 0.5 * dist::normal_cdf((t - o) / s) + 0.5 * dist::normal_cdf((t + o) / s);
  };
  const double span = o + 40.0 * s;
  return mean + dist::bisect_quantile(cdf, tau, -span, span);
}

LinearModel oracle_best_in_class(const SynthSpec& spec, const Loss& loss, double norm_bound,
                                 std::size_t samples, std::uint64_t stream) {
  const Dataset big = generate(spec, samples, stream);
  if (loss.kind == Loss::Kind::squared) return fit_least_squares(big, norm_bound);
  return fit_quantile(big, loss.tau, norm_bound);
}

namespace {

double upper_quantile(std::vector<double>& values, double delta_e) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const auto rank = static_cast<std::size_t>(std::max(1.0, std::ceil((1.0 - delta_e) * n)));
  return values[std::min(rank, values.size()) - 1];
}

}  // namespace

ResidualSupport residual_support_estimate(const SynthSpec& spec, const LinearModel& model,
                                          double delta_e, std::size_t samples,
                                          std::uint64_t stream) {
  require(delta_e > 0.0 && delta_e < 1.0, "delta_e must lie in (0, 1)");
  require(static_cast<int>(model.dim()) == spec.feature_dim(), "model dimension mismatch");
  const Dataset fresh = generate(spec, samples, stream);
  const Vector r = (fresh.labels() - model.predict_rows(fresh.features())).cwiseAbs();
  std::vector<double> values(r.data(), r.data() + r.size());
  return {upper_quantile(values, delta_e), delta_e};
}

ResidualSupport quantile_support_estimate(const SynthSpec& spec, const LinearModel& model,
                                          double tau, double delta_e, std::size_t samples,
                                          std::uint64_t stream) {
  require(delta_e > 0.0 && delta_e < 1.0, "delta_e must lie in (0, 1)");
  require(static_cast<int>(model.dim()) == spec.feature_dim(), "model dimension mismatch");
  spec.validate();
  Rng rng = make_rng(spec.seed, stream);
  const Matrix x = draw_features(spec, samples, rng);
  std::vector<double> values(samples);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector row = x.row(i).transpose();
    values[static_cast<std::size_t>(i)] =
        std::abs(conditional_quantile(spec, row, tau) - model.predict(row));
  }
  return {upper_quantile(values, delta_e), delta_e};
}

}  // namespace rosets
