#pragma once

// Closed-form robustness bounds and the Monte Carlo harness that checks them
// against empirical feasibility frequencies.

#include "rosets/core.hpp"
#include "rosets/learners.hpp"
#include "rosets/synth.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rosets {

double r_minus_eps(double z, double eps);
double r_plus_eps(double z, double eps);

/// ([1 - miss - 2 R - sqrt(log(1/delta) / (2n))]_+)^m.
double theorem1_bound(double miss_rate, double rademacher, std::size_t n, double delta, int m);

struct Theorem2Terms {
  double empirical = 0.0;  // mean of r-(y - hi(x)) - r+(y - lo(x))
  double raw = 0.0;        // bracket before clamping
  double bound = 0.0;      // ([raw]_+)^m
};

/// Surrogate-based bound for the two-quantile box; `lo_model` is the lower
/// quantile fit and `hi_model` the upper one. rad_b0 is R(B0).
Theorem2Terms theorem2_terms(const Dataset& data, const LinearModel& lo_model,
                             const LinearModel& hi_model, double eps, double rad_b0, double delta,
                             int m);
double theorem2_bound(const Dataset& data, const LinearModel& lo_model,
                      const LinearModel& hi_model, double eps, double rad_b0, std::size_t n,
                      double delta, int m);

/// (1 - delta)(1 - delta_e)^m, clamped to [0, 1].
double theorem3_bound(double delta, double delta_e, int m);

struct ClampedBound {
  double raw = 0.0;
  double value = 0.0;  // raw clamped to [0, 1]
};

/// (1 - delta)[(1 - de_p)^m + (1 - de_q)^m] + (dq - dp)^m - 2.
ClampedBound theorem5_bound(double delta, double de_p, double de_q, double dp, double dq, int m);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

inline constexpr double kZ95 = 1.959963984540054;

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z = kZ95);

enum class Method { m1, m2, m3, m4 };
Method parse_method(const std::string& name);
const char* to_string(Method m);
/// "T1", "T2", "T3", "T5".
const char* theorem_id(Method m);

enum class RademacherMode { analytic, monte_carlo };
enum class ThresholdMode { rademacher, population };

struct PipelineConfig {
  Method method = Method::m2;
  SynthSpec spec;  // append_constant is forced on by the harness
  std::size_t n = 2000;
  int m = 3;
  double delta = 0.05;
  double delta_e = 0.05;
  double delta_p = 0.05;
  double delta_q = 0.95;
  double eps = 0.1;
  double norm_bound = 10.0;
  double loss_range = 10.0;  // M
  double target_miss = 0.05;
  double min_return = 0.0;
  bool long_only = false;
  /// m x m; empty means identity.
  Matrix covariance;
  RademacherMode rademacher = RademacherMode::analytic;
  int rademacher_draws = 200;
  ThresholdMode threshold_mode = ThresholdMode::rademacher;
  std::size_t oracle_samples = 1000000;
  FitConfig fit;
  double feasibility_tol = kFeasibilityTol;

  void validate() const;
};

struct GuaranteeReport {
  std::string theorem_id;
  std::string method;
  double bound = 0.0;      // clamped, averaged over outer trials when data-dependent
  double raw_bound = 0.0;  // before clamping
  double bound_min = 0.0;
  double bound_max = 0.0;
  double empirical = 0.0;
  double coverage = 0.0;  // fraction of inner draws with y in U
  WilsonInterval wilson_ci;
  int outer_trials = 0;
  int inner_trials = 0;
  std::size_t feasible_events = 0;
  std::size_t infeasible_solves = 0;  // inner checks lost to solver infeasibility
  int norm_active_trials = 0;
  int per_trial_shortfalls = 0;  // trials whose conditional Wilson upper limit is below their bound
  bool vacuous = false;
  bool pass = true;
  std::map<std::string, double> plugins;
  std::vector<std::pair<double, double>> eps_sweep;  // (eps, mean T2 bound)
  PipelineConfig config;
};

/// Outer trials run concurrently (OpenMP) under Execution::parallel, each on
/// its own random stream; results are merged by trial index.
GuaranteeReport monte_carlo_feasibility(const PipelineConfig& config, int outer, int inner,
                                        std::uint64_t seed, Execution exec = Execution::parallel);

struct FiniteClassCheckConfig {
  SynthSpec spec;
  std::size_t n = 1000;
  int class_size = 50;
  double delta = 0.1;
  double loss_range = 10.0;
  double norm_bound = 10.0;
  double perturbation = 0.3;
  std::size_t oracle_samples = 200000;
  int outer = 500;
};

struct FiniteClassCheck {
  int trials = 0;
  int covered = 0;  // trials with l_S(best-in-class) <= threshold
  double fraction = 0.0;
  double required = 0.0;
  bool pass = false;
  std::size_t class_size = 0;
  std::size_t best_index = 0;
};

/// Finite class = `class_size` perturbations of the large-sample oracle plus
/// the oracle itself; the best-in-class member is chosen by population loss
/// estimated on an independent large sample.
FiniteClassCheck finite_class_membership(const FiniteClassCheckConfig& config, std::uint64_t seed,
                                         Execution exec = Execution::parallel);

}  // namespace rosets
