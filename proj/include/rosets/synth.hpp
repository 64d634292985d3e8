#pragma once

// Synthetic data processes with known conditional laws, used by the
// validation harness and as ground truth in tests.

#include "rosets/core.hpp"
#include "rosets/learners.hpp"
#include "rosets/rng.hpp"
#include "rosets/usets.hpp"

#include <cstdint>
#include <string>

namespace rosets {

enum class SynthKind { linear_gaussian, heteroscedastic, bimodal };

SynthKind parse_synth_kind(const std::string& name);
const char* to_string(SynthKind kind);

/// x ~ U[-1, 1]^d and y = intercept + b^T x + noise, where noise is
///   linear_gaussian:  s g
///   heteroscedastic:  s (1 + ||x||) g
///   bimodal:          +-offset (fair coin) + s g
struct SynthSpec {
  SynthKind kind = SynthKind::linear_gaussian;
  int d = 1;
  Vector true_coefficients = Vector::Ones(1);
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
  double intercept = 0.0;
  double offset = 2.0;
  /// Append a constant feature so fitted models carry the intercept.
  bool append_constant = false;

  void validate() const;
  /// Dimension of the generated feature rows.
  int feature_dim() const { return append_constant ? d + 1 : d; }
};

/// n examples from stream `stream` of the SynthSpec seed.
Dataset generate(const SynthSpec& spec, std::size_t n, std::uint64_t stream = 0);

/// Draws with an explicit generator, for harnesses that own their streams.
Dataset generate_with(const SynthSpec& spec, std::size_t n, Rng& rng);
Matrix draw_features(const SynthSpec& spec, std::size_t count, Rng& rng);
double draw_label(const SynthSpec& spec, const Eigen::Ref<const Vector>& features, Rng& rng);

/// tau-quantile of y given the feature row (constant column included when
/// append_constant is set).
double conditional_quantile(const SynthSpec& spec, const Eigen::Ref<const Vector>& features,
                            double tau);

/// ERM over an N-sample, approximating the population minimizer. Uses
/// stream index `stream` (distinct from data streams by convention).
LinearModel oracle_best_in_class(const SynthSpec& spec, const Loss& loss, double norm_bound,
                                 std::size_t samples, std::uint64_t stream = 0xB0B0);

/// e = (1 - delta_e) quantile of |y - model(x)| over N fresh draws.
ResidualSupport residual_support_estimate(const SynthSpec& spec, const LinearModel& model,
                                          double delta_e, std::size_t samples,
                                          std::uint64_t stream = 0xE5E5);

/// Quantile-model variant: e = (1 - delta_e) quantile of |q_tau(x) - model(x)|
/// over N fresh feature draws, q_tau being the true conditional quantile.
ResidualSupport quantile_support_estimate(const SynthSpec& spec, const LinearModel& model,
                                          double tau, double delta_e, std::size_t samples,
                                          std::uint64_t stream = 0xE5E6);

}  // namespace rosets
