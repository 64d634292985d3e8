#pragma once

// Uncertainty-set builders. Each turns fitted models (or sets of good
// models) plus a batch of query points into a box of label intervals.

#include "rosets/core.hpp"
#include "rosets/learners.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rosets {

/// Sublevel set {b : ||b|| <= B, l_S(b) <= threshold} around a reference fit.
class GoodModelSet {
 public:
  GoodModelSet(std::shared_ptr<const Dataset> data, LinearModel reference, Loss loss,
               double threshold);

  const Dataset& data() const { return *data_; }
  const std::shared_ptr<const Dataset>& data_ptr() const { return data_; }
  const LinearModel& reference() const { return reference_; }
  const Loss& loss() const { return loss_; }
  double threshold() const { return threshold_; }
  double norm_bound() const { return reference_.norm_bound(); }
  double reference_loss() const { return reference_loss_; }

 private:
  std::shared_ptr<const Dataset> data_;
  LinearModel reference_;
  Loss loss_;
  double threshold_;
  double reference_loss_;
};

/// Residual magnitudes stay within [0, half_width] except with probability
/// miss_prob.
struct ResidualSupport {
  double half_width = 0.0;
  double miss_prob = 0.0;
};

struct Extremum {
  double inf = 0.0;
  double sup = 0.0;
  /// The extremizer leaves the l2 model ball (or hits the l-inf box used by
  /// the polyhedral pinball path). The value is not clipped.
  bool norm_active = false;
  /// Certified upper bound on sup - (true sup) plus (true inf) - inf; zero
  /// for the closed form.
  double gap = 0.0;
};

/// Thrown when X^T X is singular and no ridge was requested.
class SingularGramError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExtremizeOptions {
  /// Added to X^T X before inversion. Zero means exact, and a singular
  /// Gram matrix is an error.
  double ridge = 0.0;
  /// Absolute gap (scaled by max(1, |value|)) at which the pinball cutting
  /// plane loop stops.
  double gap_tol = 1e-7;
  int max_cuts = 2000;
};

/// inf and sup of b^T x over a good-model set. Precomputes the Gram
/// factorization once so many queries share it.
class Extremizer {
 public:
  explicit Extremizer(const GoodModelSet& gset, const ExtremizeOptions& options = {});
  ~Extremizer();
  Extremizer(Extremizer&&) noexcept;
  Extremizer& operator=(Extremizer&&) noexcept;

  Extremum operator()(const Vector& query) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Extremum extremize_prediction(const GoodModelSet& gset, const Vector& query,
                              const ExtremizeOptions& options = {});

BoxUncertaintySet build_method1(const IntervalFunction& ifun, const QueryBatch& queries);
BoxUncertaintySet build_method2(const LinearModel& lo_model, const LinearModel& hi_model,
                                const QueryBatch& queries);

struct ExtremizedBox {
  BoxUncertaintySet box;
  std::vector<Extremum> extrema;  // one per query (method 4: per set, p then q)
  int norm_active_count = 0;
  double max_gap = 0.0;
};

ExtremizedBox build_method3(const GoodModelSet& gset, const QueryBatch& queries,
                            const ResidualSupport& resid,
                            Execution exec = Execution::parallel,
                            const ExtremizeOptions& options = {});

ExtremizedBox build_method4(const GoodModelSet& gset_p, const GoodModelSet& gset_q,
                            const QueryBatch& queries, const ResidualSupport& resid_p,
                            const ResidualSupport& resid_q,
                            Execution exec = Execution::parallel,
                            const ExtremizeOptions& options = {});

/// l_S(ref) + 2 R_S(l o B0) + 4 M sqrt(log(3/delta) / (2n)).
double good_set_threshold_rademacher(const Dataset& data, const LinearModel& reference,
                                     const Loss& loss, double loss_range, double delta,
                                     double rademacher);

/// Population-average variant: l_S(ref) + 2 R(l o B0) + 3 M sqrt(log(2/delta) / (2n)).
double good_set_threshold_population(const Dataset& data, const LinearModel& reference,
                                     const Loss& loss, double loss_range, double delta,
                                     double population_rademacher);

/// Finite class: l_S(ref) + M sqrt((log|B0| + log(2/delta)) / (2n)) + M sqrt(log(2/delta) / (2n)).
double good_set_threshold_finite(const Dataset& data, const LinearModel& reference,
                                 const Loss& loss, double loss_range, double delta,
                                 std::size_t class_size);

struct PacBayesSet {
  std::vector<std::size_t> members;  // indices into the candidate list
  std::vector<double> thresholds;    // (log P(b) - alpha) / (n C), per candidate
  std::vector<double> losses;        // l_S(b), per candidate
};

/// Members of a finite class with l_S(b) <= (log P(b) - alpha) / (n C).
PacBayesSet build_pacbayes_set(const Dataset& data, const std::vector<LinearModel>& models,
                               const Vector& prior, double c, double alpha,
                               const Loss& loss = Loss::squared());

/// Box over a finite model set: min/max prediction per query, widened by e.
BoxUncertaintySet box_from_models(const std::vector<LinearModel>& models,
                                  const QueryBatch& queries, const ResidualSupport& resid);

struct GiDiagnostics {
  double radius = 0.0;  // c
  double sigma = 0.0;   // known or estimated
  bool sigma_estimated = false;
  double half_width = 0.0;  // e
  Vector coefficients;
};

struct GiBaseline {
  BoxUncertaintySet box;
  GiDiagnostics diagnostics;
};

/// Gaussian-ellipsoid baseline around the least-squares fit. `sigma` unset
/// means estimate it from residuals and use the F-distribution radius.
GiBaseline build_gi_baseline(const Dataset& data, std::optional<double> sigma, double delta_e,
                             double confidence, const QueryBatch& queries);

}  // namespace rosets
