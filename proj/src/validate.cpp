#include "rosets/validate.hpp"

#include "rosets/complexity.hpp"
#include "rosets/robust.hpp"
#include "rosets/rng.hpp"
#include "rosets/usets.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>

namespace rosets {

double r_minus_eps(double z, double eps) {
  require(eps > 0.0, "eps must be positive");
  return std::min(1.0, std::max(0.0, -z / eps));
}

double r_plus_eps(double z, double eps) {
  require(eps > 0.0, "eps must be positive");
  return std::min(1.0, std::max(0.0, 1.0 - z / eps));
}

namespace {

void check_common(std::size_t n, double delta, int m) {
  require(n >= 1, "n must be at least 1");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(m >= 1, "m must be at least 1");
}

double deviation(double log_term, std::size_t n) {
  return std::sqrt(log_term / (2.0 * static_cast<double>(n)));
}

}  // namespace

double theorem1_bound(double miss_rate, double rademacher, std::size_t n, double delta, int m) {
  check_common(n, delta, m);
  require(miss_rate >= 0.0 && miss_rate <= 1.0, "miss rate must lie in [0, 1]");
  require(rademacher >= 0.0, "Rademacher average must be nonnegative");
  const double base = 1.0 - miss_rate - 2.0 * rademacher - deviation(std::log(1.0 / delta), n);
  return std::pow(std::max(0.0, base), m);
}

Theorem2Terms theorem2_terms(const Dataset& data, const LinearModel& lo_model,
                             const LinearModel& hi_model, double eps, double rad_b0, double delta,
                             int m) {
  check_common(data.size(), delta, m);
  require(eps > 0.0, "eps must be positive");
  require(rad_b0 >= 0.0, "Rademacher average must be nonnegative");
  const Vector lo = lo_model.predict_rows(data.features());
  const Vector hi = hi_model.predict_rows(data.features());
  const Vector& y = data.labels();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    sum += r_minus_eps(y[i] - hi[i], eps) - r_plus_eps(y[i] - lo[i], eps);
  }
  Theorem2Terms t;
  t.empirical = sum / static_cast<double>(data.size());
  t.raw = t.empirical - (8.0 / eps) * rad_b0 - 2.0 * deviation(std::log(2.0 / delta), data.size());
  t.bound = std::pow(std::max(0.0, t.raw), m);
  return t;
}

double theorem2_bound(const Dataset& data, const LinearModel& lo_model,
                      const LinearModel& hi_model, double eps, double rad_b0, std::size_t n,
                      double delta, int m) {
  require(n == data.size(), "n must equal the sample size");
  return theorem2_terms(data, lo_model, hi_model, eps, rad_b0, delta, m).bound;
}

double theorem3_bound(double delta, double delta_e, int m) {
  require(delta >= 0.0 && delta <= 1.0 && delta_e >= 0.0 && delta_e <= 1.0,
          "probabilities must lie in [0, 1]");
  require(m >= 1, "m must be at least 1");
  return std::clamp((1.0 - delta) * std::pow(1.0 - delta_e, m), 0.0, 1.0);
}

ClampedBound theorem5_bound(double delta, double de_p, double de_q, double dp, double dq, int m) {
  for (double p : {delta, de_p, de_q, dp, dq}) {
    require(p >= 0.0 && p <= 1.0, "probabilities must lie in [0, 1]");
  }
  require(dp <= dq, "delta_p must not exceed delta_q");
  require(m >= 1, "m must be at least 1");
  ClampedBound b;
  b.raw = (1.0 - delta) * (std::pow(1.0 - de_p, m) + std::pow(1.0 - de_q, m)) +
          std::pow(dq - dp, m) - 2.0;
  b.value = std::clamp(b.raw, 0.0, 1.0);
  return b;
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  require(successes <= trials, "successes exceed trials");
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // The limits are exactly 0 and 1 at the extremes; avoid rounding residue.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

Method parse_method(const std::string& name) {
  if (name == "m1") return Method::m1;
  if (name == "m2") return Method::m2;
  if (name == "m3") return Method::m3;
  if (name == "m4") return Method::m4;
  throw std::invalid_argument("unknown method '" + name + "' (expected m1, m2, m3 or m4)");
}

const char* to_string(Method m) {
  switch (m) {
    case Method::m1: return "m1";
    case Method::m2: return "m2";
    case Method::m3: return "m3";
    case Method::m4: return "m4";
  }
  return "unknown";
}

const char* theorem_id(Method m) {
  switch (m) {
    case Method::m1: return "T1";
    case Method::m2: return "T2";
    case Method::m3: return "T3";
    case Method::m4: return "T5";
  }
  return "unknown";
}

void PipelineConfig::validate() const {
  spec.validate();
  require(n >= 2, "n must be at least 2");
  require(m >= 1, "m must be at least 1");
  for (double p : {delta, delta_e, delta_p, delta_q}) {
    require(p > 0.0 && p < 1.0, "probability parameters must lie in (0, 1)");
  }
  require(delta_p < delta_q, "delta_p must be below delta_q");
  require(eps > 0.0, "eps must be positive");
  require(norm_bound > 0.0 && loss_range > 0.0, "norm bound and loss range must be positive");
  require(target_miss >= 0.0 && target_miss < 1.0, "target miss must lie in [0, 1)");
  require(rademacher_draws >= 1, "Rademacher draws must be positive");
  require(oracle_samples >= 1, "oracle sample count must be positive");
  require(covariance.size() == 0 || (covariance.rows() == m && covariance.cols() == m),
          "covariance must be m x m");
}

namespace {

const double kEpsSweep[] = {0.05, 0.1, 0.2, 0.5, 1.0};

struct TrialResult {
  double bound = 0.0;
  double raw = 0.0;
  std::size_t feasible = 0;
  std::size_t covered = 0;
  std::size_t infeasible = 0;
  bool norm_active = false;
  std::map<std::string, double> plugins;
  std::vector<double> eps_bounds;
};

// Quantities fixed across outer trials: best-in-class residual supports.
struct Shared {
  SynthSpec spec;
  ResidualSupport resid;    // m3
  ResidualSupport resid_p;  // m4
  ResidualSupport resid_q;  // m4
  std::unique_ptr<PortfolioProblem> problem;
};

double rademacher_b0(const PipelineConfig& cfg, const Dataset& s, std::uint64_t seed) {
  if (cfg.rademacher == RademacherMode::monte_carlo) {
    return empirical_rademacher_linear(s, cfg.norm_bound, cfg.rademacher_draws, seed, 1,
                                       Execution::serial)
        .value;
  }
  return linear_class_bounds(s.max_row_norm(), cfg.norm_bound, s.size()).r_base;
}

double loss_class_rademacher(const PipelineConfig& cfg, const Dataset& s, const Loss& loss,
                             double r_b0) {
  if (loss.kind == Loss::Kind::pinball) {
    return 2.0 * std::max(loss.tau, 1.0 - loss.tau) * r_b0;
  }
  if (cfg.rademacher == RademacherMode::monte_carlo) {
    // Squared loss is 2 X_b B_b-Lipschitz on predictions, up to label range.
    const double xb = s.max_row_norm() * cfg.norm_bound;
    const double yb = s.labels().cwiseAbs().maxCoeff();
    return 2.0 * 2.0 * (xb + yb) * r_b0;
  }
  return linear_class_bounds(s.max_row_norm(), cfg.norm_bound, s.size()).r_sq_loss;
}

double good_threshold(const PipelineConfig& cfg, const Dataset& s, const LinearModel& ref,
                      const Loss& loss, double rad) {
  if (cfg.threshold_mode == ThresholdMode::population) {
    const double pop = population_rademacher(rad, cfg.loss_range, cfg.delta, s.size());
    return good_set_threshold_population(s, ref, loss, cfg.loss_range, cfg.delta, pop);
  }
  return good_set_threshold_rademacher(s, ref, loss, cfg.loss_range, cfg.delta, rad);
}

TrialResult run_trial(const PipelineConfig& cfg, const Shared& sh, int inner, std::uint64_t seed,
                      int t) {
  Rng rng = make_rng(seed, static_cast<std::uint64_t>(t));
  auto data = std::make_shared<const Dataset>(generate_with(sh.spec, cfg.n, rng));
  const Dataset& s = *data;
  FitConfig fit = cfg.fit;
  fit.seed = stream_seed(seed, 0x100000000ULL + static_cast<std::uint64_t>(t));

  TrialResult out;
  std::function<BoxUncertaintySet(const QueryBatch&)> build;

  // Fit once per trial; `build` then maps fresh queries to a box.
  std::optional<IntervalFunction> ifun;
  std::optional<LinearModel> lo, hi;
  std::optional<GoodModelSet> gset_a, gset_b;
  std::shared_ptr<Extremizer> ext_a, ext_b;

  switch (cfg.method) {
    case Method::m1: {
      ifun = fit_interval_function(s, cfg.target_miss, cfg.norm_bound, fit);
      const double rad = interval_miss_class_bound(s.size(), s.dim());
      out.bound = theorem1_bound(ifun->miss_rate(), rad, s.size(), cfg.delta, cfg.m);
      out.raw = 1.0 - ifun->miss_rate() - 2.0 * rad -
                deviation(std::log(1.0 / cfg.delta), s.size());
      out.plugins = {{"miss_rate", ifun->miss_rate()},
                     {"rademacher", rad},
                     {"half_width", ifun->half_width()}};
      build = [&](const QueryBatch& q) { return build_method1(*ifun, q); };
      break;
    }
    case Method::m2: {
      lo = fit_quantile(s, cfg.delta_p, cfg.norm_bound, fit);
      hi = fit_quantile(s, cfg.delta_q, cfg.norm_bound, fit);
      const double rad = rademacher_b0(cfg, s, fit.seed);
      const Theorem2Terms terms = theorem2_terms(s, *lo, *hi, cfg.eps, rad, cfg.delta, cfg.m);
      out.bound = terms.bound;
      out.raw = terms.raw;
      out.plugins = {{"empirical_surrogate", terms.empirical},
                     {"rademacher_b0", rad},
                     {"x_b", s.max_row_norm()}};
      for (double e : kEpsSweep) {
        out.eps_bounds.push_back(theorem2_terms(s, *lo, *hi, e, rad, cfg.delta, cfg.m).bound);
      }
      build = [&](const QueryBatch& q) { return build_method2(*lo, *hi, q); };
      break;
    }
    case Method::m3: {
      const Loss loss = Loss::squared();
      const LinearModel ref = fit_least_squares(s, cfg.norm_bound, fit);
      const double rad = loss_class_rademacher(cfg, s, loss, rademacher_b0(cfg, s, fit.seed));
      gset_a.emplace(data, ref, loss, good_threshold(cfg, s, ref, loss, rad));
      ext_a = std::make_shared<Extremizer>(*gset_a);
      out.bound = theorem3_bound(cfg.delta, sh.resid.miss_prob, cfg.m);
      out.raw = out.bound;
      out.plugins = {{"rademacher_loss", rad},
                     {"threshold", gset_a->threshold()},
                     {"reference_loss", gset_a->reference_loss()},
                     {"e", sh.resid.half_width}};
      build = [&](const QueryBatch& q) {
        const Eigen::Index m = static_cast<Eigen::Index>(q.size());
        Vector l(m), u(m);
        for (Eigen::Index j = 0; j < m; ++j) {
          const Extremum e = (*ext_a)(q.features().row(j).transpose());
          out.norm_active = out.norm_active || e.norm_active;
          l[j] = e.inf - sh.resid.half_width;
          u[j] = e.sup + sh.resid.half_width;
        }
        return BoxUncertaintySet(l, u);
      };
      break;
    }
    case Method::m4: {
      const Loss lp = Loss::pinball(cfg.delta_p);
      const Loss lq = Loss::pinball(cfg.delta_q);
      const LinearModel ref_p = fit_quantile(s, cfg.delta_p, cfg.norm_bound, fit);
      const LinearModel ref_q = fit_quantile(s, cfg.delta_q, cfg.norm_bound, fit);
      const double r_b0 = rademacher_b0(cfg, s, fit.seed);
      const double rad_p = loss_class_rademacher(cfg, s, lp, r_b0);
      const double rad_q = loss_class_rademacher(cfg, s, lq, r_b0);
      gset_a.emplace(data, ref_p, lp, good_threshold(cfg, s, ref_p, lp, rad_p));
      gset_b.emplace(data, ref_q, lq, good_threshold(cfg, s, ref_q, lq, rad_q));
      ext_a = std::make_shared<Extremizer>(*gset_a);
      ext_b = std::make_shared<Extremizer>(*gset_b);
      const ClampedBound b = theorem5_bound(cfg.delta, sh.resid_p.miss_prob, sh.resid_q.miss_prob,
                                            cfg.delta_p, cfg.delta_q, cfg.m);
      out.bound = b.value;
      out.raw = b.raw;
      out.plugins = {{"threshold_p", gset_a->threshold()},
                     {"threshold_q", gset_b->threshold()},
                     {"e_p", sh.resid_p.half_width},
                     {"e_q", sh.resid_q.half_width}};
      build = [&](const QueryBatch& q) {
        const double e = std::max(sh.resid_p.half_width, sh.resid_q.half_width);
        const Eigen::Index m = static_cast<Eigen::Index>(q.size());
        Vector l(m), u(m);
        for (Eigen::Index j = 0; j < m; ++j) {
          const Vector row = q.features().row(j).transpose();
          const Extremum a = (*ext_a)(row);
          const Extremum b2 = (*ext_b)(row);
          out.norm_active = out.norm_active || a.norm_active || b2.norm_active;
          l[j] = std::min(a.inf, b2.inf) - e;
          u[j] = std::max(a.sup, b2.sup) + e;
        }
        return BoxUncertaintySet(l, u);
      };
      break;
    }
  }

  double width = 0.0;
  for (int k = 0; k < inner; ++k) {
    const QueryBatch q(draw_features(sh.spec, static_cast<std::size_t>(cfg.m), rng));
    Vector y(cfg.m);
    for (int j = 0; j < cfg.m; ++j) y[j] = draw_label(sh.spec, q.features().row(j).transpose(), rng);
    const BoxUncertaintySet box = build(q);
    width += (box.upper() - box.lower()).mean();
    if (box.contains(y)) ++out.covered;
    const RobustSolution sol = solve_box_robust(*sh.problem, box);
    if (sol.status != SolveStatus::optimal) {
      ++out.infeasible;
      continue;
    }
    if (sh.problem->feasible(sol.weights, y, cfg.feasibility_tol)) ++out.feasible;
  }
  out.plugins["mean_box_width"] = width / inner;
  return out;
}

}  // namespace

GuaranteeReport monte_carlo_feasibility(const PipelineConfig& config, int outer, int inner,
                                        std::uint64_t seed, Execution exec) {
  require(outer >= 1 && inner >= 1, "outer and inner trial counts must be positive");
  config.validate();

  Shared sh;
  sh.spec = config.spec;
  sh.spec.append_constant = true;
  const Matrix cov = config.covariance.size() == 0 ? Matrix::Identity(config.m, config.m)
                                                   : config.covariance;
  sh.problem = std::make_unique<PortfolioProblem>(cov, config.min_return, config.long_only);
  if (config.method == Method::m3) {
    const LinearModel star =
        oracle_best_in_class(sh.spec, Loss::squared(), config.norm_bound, config.oracle_samples);
    sh.resid = residual_support_estimate(sh.spec, star, config.delta_e, config.oracle_samples);
  } else if (config.method == Method::m4) {
    const LinearModel star_p = oracle_best_in_class(sh.spec, Loss::pinball(config.delta_p),
                                                    config.norm_bound, config.oracle_samples);
    const LinearModel star_q = oracle_best_in_class(sh.spec, Loss::pinball(config.delta_q),
                                                    config.norm_bound, config.oracle_samples);
    sh.resid_p = quantile_support_estimate(sh.spec, star_p, config.delta_p, config.delta_e,
                                           config.oracle_samples);
    sh.resid_q = quantile_support_estimate(sh.spec, star_q, config.delta_q, config.delta_e,
                                           config.oracle_samples);
  }

  std::vector<TrialResult> trials(static_cast<std::size_t>(outer));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(outer));
  auto run = [&](int t) {
    try {
      trials[static_cast<std::size_t>(t)] = run_trial(config, sh, inner, seed, t);
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int t = 0; t < outer; ++t) run(t);
  } else {
    for (int t = 0; t < outer; ++t) run(t);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  GuaranteeReport r;
  r.theorem_id = theorem_id(config.method);
  r.method = to_string(config.method);
  r.outer_trials = outer;
  r.inner_trials = inner;
  r.config = config;
  r.bound_min = 1.0;
  r.bound_max = 0.0;
  std::size_t covered = 0;
  std::vector<double> eps_sum(std::size(kEpsSweep), 0.0);
  for (const TrialResult& t : trials) {
    r.bound += t.bound;
    r.raw_bound += t.raw;
    r.bound_min = std::min(r.bound_min, t.bound);
    r.bound_max = std::max(r.bound_max, t.bound);
    r.feasible_events += t.feasible;
    r.infeasible_solves += t.infeasible;
    covered += t.covered;
    r.norm_active_trials += t.norm_active ? 1 : 0;
    if (wilson_interval(t.feasible, static_cast<std::size_t>(inner)).hi < t.bound) {
      ++r.per_trial_shortfalls;
    }
    for (const auto& [key, value] : t.plugins) r.plugins[key] += value / outer;
    for (std::size_t k = 0; k < t.eps_bounds.size(); ++k) eps_sum[k] += t.eps_bounds[k] / outer;
  }
  r.bound /= outer;
  r.raw_bound /= outer;
  const std::size_t total = static_cast<std::size_t>(outer) * static_cast<std::size_t>(inner);
  r.empirical = static_cast<double>(r.feasible_events) / static_cast<double>(total);
  r.coverage = static_cast<double>(covered) / static_cast<double>(total);
  r.wilson_ci = wilson_interval(r.feasible_events, total);
  if (config.method == Method::m2) {
    for (std::size_t k = 0; k < eps_sum.size(); ++k) r.eps_sweep.emplace_back(kEpsSweep[k], eps_sum[k]);
  }
  r.vacuous = r.bound <= 0.0;
  r.pass = r.vacuous || r.bound <= r.wilson_ci.hi;
  return r;
}

FiniteClassCheck finite_class_membership(const FiniteClassCheckConfig& config, std::uint64_t seed,
                                         Execution exec) {
  require(config.outer >= 1 && config.class_size >= 1, "trial and class counts must be positive");
  require(config.delta > 0.0 && config.delta < 1.0, "delta must lie in (0, 1)");
  SynthSpec spec = config.spec;
  spec.append_constant = true;
  spec.validate();
  const Loss loss = Loss::squared();

  const LinearModel star =
      oracle_best_in_class(spec, loss, config.norm_bound, config.oracle_samples);
  std::vector<LinearModel> models;
  Rng rng = make_rng(seed, 0xF1F1F1F1ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < config.class_size; ++k) {
    Vector b = star.coefficients();
    for (Eigen::Index j = 0; j < b.size(); ++j) b[j] += config.perturbation * gauss(rng);
    models.emplace_back(project_to_ball(b, config.norm_bound), config.norm_bound);
  }
  models.push_back(star);

  const Dataset population = generate(spec, config.oracle_samples, 0xC1A55ULL);
  FiniteClassCheck out;
  out.class_size = models.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < models.size(); ++k) {
    const double l = empirical_loss(models[k], population, loss);
    if (l < best) {
      best = l;
      out.best_index = k;
    }
  }

  std::vector<char> covered(static_cast<std::size_t>(config.outer), 0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(config.outer));
  auto run = [&](int t) {
    try {
      Rng trial_rng = make_rng(seed, static_cast<std::uint64_t>(t) + 1);
      const Dataset s = generate_with(spec, config.n, trial_rng);
      std::size_t erm = 0;
      double erm_loss = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < models.size(); ++k) {
        const double l = empirical_loss(models[k], s, loss);
        if (l < erm_loss) {
          erm_loss = l;
          erm = k;
        }
      }
      const double thr = good_set_threshold_finite(s, models[erm], loss, config.loss_range,
                                                   config.delta, models.size());
      covered[static_cast<std::size_t>(t)] =
          empirical_loss(models[out.best_index], s, loss) <= thr ? 1 : 0;
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int t = 0; t < config.outer; ++t) run(t);
  } else {
    for (int t = 0; t < config.outer; ++t) run(t);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  out.trials = config.outer;
  for (char c : covered) out.covered += c;
  out.fraction = static_cast<double>(out.covered) / config.outer;
  out.required = 1.0 - config.delta -
                 3.0 * std::sqrt(config.delta * (1.0 - config.delta) / config.outer);
  out.pass = out.fraction >= out.required;
  return out;
}

}  // namespace rosets
