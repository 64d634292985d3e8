// rosets command-line tool: gen-data, build-set, solve, validate.
//
// Every subcommand accepts --config FILE with flat `key = value` lines; keys
// are option names without the leading dashes (underscores and dashes are
// interchangeable). Flags given on the command line override the file.
//
// Exit codes: 0 success (including an infeasible robust problem), 1 a
// non-vacuous guarantee failed, 2 usage, configuration or I/O error.

#include "rosets/complexity.hpp"
#include "rosets/io.hpp"
#include "rosets/learners.hpp"
#include "rosets/robust.hpp"
#include "rosets/synth.hpp"
#include "rosets/usets.hpp"
#include "rosets/validate.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using rosets::io::Json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Config file -> "--key value" tokens.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
    std::replace(key.begin(), key.end(), '_', '-');
    out.push_back("--" + key);
    out.push_back(value);
  }
  return out;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != cell.size() || !std::isfinite(v)) {
      throw UsageError("'" + cell + "' in --" + what + " is not a number");
    }
    out.push_back(v);
  }
  return out;
}

rosets::Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const rosets::Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_prob(double p, const std::string& name) {
  if (!(p > 0.0 && p < 1.0)) throw UsageError("--" + name + " must lie in (0, 1)");
}

void set_jobs(int jobs) {
  if (jobs < 1) throw UsageError("--jobs must be at least 1");
  omp_set_num_threads(jobs);
}

// ---------------------------------------------------------------- gen-data

struct DataOptions {
  std::string kind = "linear_gaussian";
  int d = 2;
  std::string coef;
  double intercept = 0.0;
  double noise = 1.0;
  double offset = 2.0;

  void add(CLI::App* app) {
    app->add_option("--kind", kind, "linear_gaussian | heteroscedastic | bimodal")
        ->check(CLI::IsMember({"linear_gaussian", "heteroscedastic", "bimodal"}));
    app->add_option("--d", d, "feature dimension")->check(CLI::PositiveNumber);
    app->add_option("--coef", coef, "comma-separated true coefficients (default all ones)");
    app->add_option("--true-intercept", intercept, "intercept of the data process");
    app->add_option("--noise", noise, "noise scale")->check(CLI::NonNegativeNumber);
    app->add_option("--offset", offset, "bimodal offset");
  }

  rosets::SynthSpec spec(std::uint64_t seed) const {
    rosets::SynthSpec s;
    s.kind = rosets::parse_synth_kind(kind);
    s.d = d;
    s.true_coefficients =
        coef.empty() ? rosets::Vector::Ones(d) : to_vector(parse_list(coef, "coef"));
    if (s.true_coefficients.size() != d) throw UsageError("--coef must list exactly d values");
    s.noise_scale = noise;
    s.offset = offset;
    s.intercept = intercept;
    s.seed = seed;
    return s;
  }
};

struct GenData {
  DataOptions data;
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::string out;

  void add(CLI::App* app) {
    data.add(app);
    app->add_option("--n", n, "number of examples")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "master seed");
    app->add_option("--out", out, "output CSV path")->required();
  }

  int run() const {
    const rosets::Dataset ds = rosets::generate(data.spec(seed), n);
    rosets::io::write_dataset_csv(out, ds);
    std::cout << "gen-data: wrote " << ds.size() << " rows x " << ds.dim() << " features to "
              << out << "\n";
    return 0;
  }
};

// ---------------------------------------------------------------- build-set

struct BuildSet {
  std::string method;
  std::string train;
  std::string queries;
  std::string out;
  bool intercept = true;
  double norm_bound = 10.0;
  double target_miss = 0.05;
  double delta = 0.05;
  double delta_p = 0.05;
  double delta_q = 0.95;
  double delta_e = 0.05;
  double e = 0.0;
  std::optional<double> e_p, e_q;
  double loss_range = 10.0;
  std::string threshold_mode = "rademacher";
  double slack = 0.0;
  std::string rademacher = "analytic";
  int draws = 1000;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::optional<double> sigma;
  double confidence = 0.95;
  std::string models;
  std::string prior;
  double pac_c = 1.0;
  double pac_alpha = 1.0;
  double ridge = 0.0;

  void add(CLI::App* app) {
    app->add_option("--method", method, "m1 | m2 | m3 | m4 | finite | pacbayes | gi")
        ->required()
        ->check(CLI::IsMember({"m1", "m2", "m3", "m4", "finite", "pacbayes", "gi"}));
    app->add_option("--train", train, "training CSV (x1..xd,y)")->required();
    app->add_option("--queries", queries, "query CSV (x1..xd)")->required();
    app->add_option("--out", out, "output JSON path")->required();
    app->add_option("--intercept", intercept, "append a constant feature (true/false)");
    app->add_option("--norm-bound", norm_bound, "model norm bound B_b")->check(CLI::PositiveNumber);
    app->add_option("--target-miss", target_miss, "m1 training miss-rate target");
    app->add_option("--delta", delta, "confidence parameter delta");
    app->add_option("--delta-p", delta_p, "lower quantile level");
    app->add_option("--delta-q", delta_q, "upper quantile level");
    app->add_option("--delta-e", delta_e, "residual miss probability");
    app->add_option("--e", e, "residual half width (m3, finite, pacbayes)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--e-p", e_p, "lower-quantile residual half width (m4; default --e)");
    app->add_option("--e-q", e_q, "upper-quantile residual half width (m4; default --e)");
    app->add_option("--loss-range", loss_range, "loss range bound M")->check(CLI::PositiveNumber);
    app->add_option("--threshold-mode", threshold_mode, "rademacher | population | fixed")
        ->check(CLI::IsMember({"rademacher", "population", "fixed"}));
    app->add_option("--slack", slack, "threshold slack above the reference loss (fixed mode)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--rademacher", rademacher, "analytic | monte_carlo")
        ->check(CLI::IsMember({"analytic", "monte_carlo"}));
    app->add_option("--draws", draws, "Monte Carlo Rademacher draws")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "seed for Monte Carlo estimates");
    app->add_option("--jobs", jobs, "worker threads");
    app->add_option("--sigma", sigma, "known noise level (gi; omit to estimate)");
    app->add_option("--confidence", confidence, "ellipsoid confidence (gi)");
    app->add_option("--models", models, "CSV of candidate coefficient rows (finite, pacbayes)");
    app->add_option("--prior", prior, "comma-separated prior masses (pacbayes; default uniform)");
    app->add_option("--pac-c", pac_c, "PAC-Bayes temperature C")->check(CLI::PositiveNumber);
    app->add_option("--pac-alpha", pac_alpha, "PAC-Bayes alpha")->check(CLI::PositiveNumber);
    app->add_option("--ridge", ridge, "ridge added to X^T X when it is singular (m3)")
        ->check(CLI::NonNegativeNumber);
  }

  double threshold(const rosets::Dataset& s, const rosets::LinearModel& ref,
                   const rosets::Loss& loss, double rad, Json& diag, const std::string& tag) const {
    double t = 0.0;
    if (threshold_mode == "fixed") {
      t = rosets::empirical_loss(ref, s, loss) + slack;
    } else if (threshold_mode == "population") {
      const double pop = rosets::population_rademacher(rad, loss_range, delta, s.size());
      t = rosets::good_set_threshold_population(s, ref, loss, loss_range, delta, pop);
    } else {
      t = rosets::good_set_threshold_rademacher(s, ref, loss, loss_range, delta, rad);
    }
    diag["threshold" + tag] = t;
    diag["reference_loss" + tag] = rosets::empirical_loss(ref, s, loss);
    diag["rademacher" + tag] = rad;
    return t;
  }

  double rademacher_b0(const rosets::Dataset& s) const {
    if (rademacher == "monte_carlo") {
      return rosets::empirical_rademacher_linear(s, norm_bound, draws, seed, std::max(jobs, 1))
          .value;
    }
    return rosets::linear_class_bounds(s.max_row_norm(), norm_bound, s.size()).r_base;
  }

  std::vector<rosets::LinearModel> load_models(std::size_t dim) const {
    if (models.empty()) throw UsageError("--models is required for method " + method);
    const rosets::Matrix rows = rosets::io::read_matrix_csv(models);
    if (static_cast<std::size_t>(rows.cols()) != dim) {
      throw UsageError("model rows have " + std::to_string(rows.cols()) +
                       " coefficients but the features have " + std::to_string(dim));
    }
    std::vector<rosets::LinearModel> out;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) out.emplace_back(rows.row(i).transpose(), norm_bound);
    return out;
  }

  int run() const {
    set_jobs(jobs);
    for (auto [p, name] : {std::pair{delta, "delta"}, {delta_p, "delta-p"}, {delta_q, "delta-q"},
                           {delta_e, "delta-e"}}) {
      check_prob(p, name);
    }
    if (delta_p >= delta_q) throw UsageError("--delta-p must be below --delta-q");
    if (!(target_miss >= 0.0 && target_miss < 1.0)) throw UsageError("--target-miss must lie in [0, 1)");

    rosets::Dataset raw = rosets::io::read_dataset_csv(train);
    rosets::QueryBatch q_raw = rosets::io::read_queries_csv(queries);
    if (q_raw.dim() != raw.dim()) {
      throw UsageError("queries have " + std::to_string(q_raw.dim()) + " features, training data " +
                       std::to_string(raw.dim()));
    }
    auto data = std::make_shared<const rosets::Dataset>(intercept ? rosets::with_intercept(raw) : raw);
    const rosets::QueryBatch q = intercept ? rosets::with_intercept(q_raw) : q_raw;
    const rosets::Dataset& s = *data;
    rosets::FitConfig fit;
    fit.seed = seed;

    Json diag = Json::object();
    std::optional<rosets::BoxUncertaintySet> box;
    if (method == "m1") {
      const rosets::IntervalFunction f = rosets::fit_interval_function(s, target_miss, norm_bound, fit);
      diag["miss_rate"] = f.miss_rate();
      diag["half_width"] = f.half_width();
      diag["rademacher"] = rosets::interval_miss_class_bound(s.size(), s.dim());
      box = rosets::build_method1(f, q);
    } else if (method == "m2") {
      const auto lo = rosets::fit_quantile(s, delta_p, norm_bound, fit);
      const auto hi = rosets::fit_quantile(s, delta_q, norm_bound, fit);
      diag["lower_coefficients"] = rosets::io::vector_to_json(lo.coefficients());
      diag["upper_coefficients"] = rosets::io::vector_to_json(hi.coefficients());
      diag["rademacher"] = rademacher_b0(s);
      box = rosets::build_method2(lo, hi, q);
    } else if (method == "m3") {
      const rosets::Loss loss = rosets::Loss::squared();
      const auto ref = rosets::fit_least_squares(s, norm_bound, fit);
      const double rad =
          rademacher == "monte_carlo"
              ? rosets::contraction_bound(loss.lipschitz(2.0 * s.max_row_norm() * norm_bound +
                                                         s.labels().cwiseAbs().maxCoeff()),
                                          {rademacher_b0(s), 0.0, draws,
                                           rosets::RademacherMethod::monte_carlo})
                    .value
              : rosets::linear_class_bounds(s.max_row_norm(), norm_bound, s.size()).r_sq_loss;
      const rosets::GoodModelSet g(data, ref, loss, threshold(s, ref, loss, rad, diag, ""));
      rosets::ExtremizeOptions opt;
      opt.ridge = ridge;
      const auto res = rosets::build_method3(g, q, {e, delta_e}, rosets::Execution::parallel, opt);
      diag["norm_active"] = res.norm_active_count;
      diag["e"] = e;
      box = res.box;
    } else if (method == "m4") {
      const rosets::Loss lp = rosets::Loss::pinball(delta_p);
      const rosets::Loss lq = rosets::Loss::pinball(delta_q);
      const auto ref_p = rosets::fit_quantile(s, delta_p, norm_bound, fit);
      const auto ref_q = rosets::fit_quantile(s, delta_q, norm_bound, fit);
      const double r_b0 = rademacher_b0(s);
      const double rad_p = 2.0 * std::max(delta_p, 1.0 - delta_p) * r_b0;
      const double rad_q = 2.0 * std::max(delta_q, 1.0 - delta_q) * r_b0;
      const rosets::GoodModelSet gp(data, ref_p, lp, threshold(s, ref_p, lp, rad_p, diag, "_p"));
      const rosets::GoodModelSet gq(data, ref_q, lq, threshold(s, ref_q, lq, rad_q, diag, "_q"));
      const double ep = e_p.value_or(e);
      const double eq = e_q.value_or(e);
      if (ep < 0.0 || eq < 0.0) throw UsageError("residual half widths must be >= 0");
      const auto res = rosets::build_method4(gp, gq, q, {ep, delta_e}, {eq, delta_e});
      diag["norm_active"] = res.norm_active_count;
      diag["max_gap"] = res.max_gap;
      diag["e_p"] = ep;
      diag["e_q"] = eq;
      box = res.box;
    } else if (method == "finite") {
      const auto candidates = load_models(s.dim());
      const rosets::Loss loss = rosets::Loss::squared();
      std::size_t erm = 0;
      for (std::size_t k = 1; k < candidates.size(); ++k) {
        if (rosets::empirical_loss(candidates[k], s, loss) <
            rosets::empirical_loss(candidates[erm], s, loss)) {
          erm = k;
        }
      }
      const double t = threshold_mode == "fixed"
                           ? rosets::empirical_loss(candidates[erm], s, loss) + slack
                           : rosets::good_set_threshold_finite(s, candidates[erm], loss, loss_range,
                                                               delta, candidates.size());
      std::vector<rosets::LinearModel> members;
      Json idx = Json::array();
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (rosets::empirical_loss(candidates[k], s, loss) <= t) {
          members.push_back(candidates[k]);
          idx.push_back(k);
        }
      }
      diag["threshold"] = t;
      diag["erm_index"] = erm;
      diag["members"] = idx;
      box = rosets::box_from_models(members, q, {e, delta_e});
    } else if (method == "pacbayes") {
      const auto candidates = load_models(s.dim());
      rosets::Vector p = prior.empty()
                             ? rosets::Vector::Constant(static_cast<Eigen::Index>(candidates.size()),
                                                        1.0 / static_cast<double>(candidates.size()))
                             : to_vector(parse_list(prior, "prior"));
      const auto set = rosets::build_pacbayes_set(s, candidates, p, pac_c, pac_alpha);
      diag["members"] = set.members;
      diag["thresholds"] = set.thresholds;
      diag["losses"] = set.losses;
      if (set.members.empty()) {
        diag["empty"] = true;
        Json j;
        j["method"] = method;
        j["lower"] = Json::array();
        j["upper"] = Json::array();
        j["diagnostics"] = diag;
        rosets::io::write_text(out, j.dump(2) + "\n");
        std::cout << "build-set: pacbayes set is empty; wrote " << out << "\n";
        return 0;
      }
      std::vector<rosets::LinearModel> members;
      for (std::size_t k : set.members) members.push_back(candidates[k]);
      box = rosets::box_from_models(members, q, {e, delta_e});
    } else {
      const auto gi = rosets::build_gi_baseline(s, sigma, delta_e, confidence, q);
      diag["radius"] = gi.diagnostics.radius;
      diag["sigma"] = gi.diagnostics.sigma;
      diag["sigma_estimated"] = gi.diagnostics.sigma_estimated;
      diag["e"] = gi.diagnostics.half_width;
      diag["coefficients"] = rosets::io::vector_to_json(gi.diagnostics.coefficients);
      box = gi.box;
    }
    rosets::io::write_text(out, rosets::io::box_to_json(method, *box, diag).dump(2) + "\n");
    std::cout << "build-set: " << method << " box with " << box->dim() << " coordinates, mean width "
              << (box->upper() - box->lower()).mean() << ", wrote " << out << "\n";
    return 0;
  }
};

// ---------------------------------------------------------------- solve

struct Solve {
  std::string box_path;
  std::string covariance;
  bool identity = false;
  double min_return = 0.0;
  bool long_only = false;
  std::string mode = "box";
  std::size_t samples = 1000;
  std::string sampler = "uniform";
  std::size_t burn_in = 1000;
  std::size_t thin = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--box", box_path, "box JSON from build-set")->required();
    app->add_option("--covariance", covariance, "covariance CSV (m rows of m numbers)");
    app->add_option("--identity", identity, "use the identity covariance (true/false)");
    app->add_option("--min-return", min_return, "required return c");
    app->add_option("--long-only", long_only, "forbid short positions (true/false)");
    app->add_option("--mode", mode, "box | scenario")->check(CLI::IsMember({"box", "scenario"}));
    app->add_option("--samples", samples, "scenario count L")->check(CLI::PositiveNumber);
    app->add_option("--sampler", sampler, "uniform | hit-and-run")
        ->check(CLI::IsMember({"uniform", "hit-and-run"}));
    app->add_option("--burn-in", burn_in, "hit-and-run burn-in steps");
    app->add_option("--thin", thin, "hit-and-run thinning")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "sampler seed");
    app->add_option("--jobs", jobs, "worker threads");
    app->add_option("--out", out, "output JSON path")->required();
  }

  int run() const {
    set_jobs(jobs);
    Json j;
    try {
      j = Json::parse(rosets::io::read_text(box_path));
    } catch (const Json::parse_error& e) {
      throw rosets::io::ParseError(box_path + ": " + e.what());
    }
    const rosets::BoxUncertaintySet box = rosets::io::box_from_json(j);
    const Eigen::Index m = static_cast<Eigen::Index>(box.dim());
    rosets::Matrix cov;
    if (!covariance.empty()) {
      cov = rosets::io::read_matrix_csv(covariance);
      if (cov.rows() != m || cov.cols() != m) {
        throw UsageError("covariance must be " + std::to_string(m) + " x " + std::to_string(m));
      }
    } else if (identity) {
      cov = rosets::Matrix::Identity(m, m);
    } else {
      throw UsageError("provide --covariance FILE or --identity true");
    }
    const rosets::PortfolioProblem problem(cov, min_return, long_only);
    rosets::RobustSolution sol;
    if (mode == "box") {
      sol = rosets::solve_box_robust(problem, box);
    } else {
      rosets::Matrix scen;
      if (sampler == "uniform") {
        scen = rosets::sample_uniform_box(box, samples, seed);
      } else {
        scen = rosets::hit_and_run([&](const rosets::Vector& v) { return box.contains(v); },
                                   box.center(), samples, burn_in, thin, seed);
      }
      sol = rosets::solve_scenario_robust(problem, scen);
    }
    Json res = rosets::io::solution_to_json(sol);
    res["mode"] = mode;
    rosets::io::write_text(out, res.dump(2) + "\n");
    std::cout << "solve: status " << rosets::to_string(sol.status) << ", objective " << sol.objective
              << ", wrote " << out << "\n";
    return 0;
  }
};

// ---------------------------------------------------------------- validate

struct Validate {
  DataOptions data;
  std::string method = "m2";
  std::size_t n = 2000;
  int m = 3;
  double delta = 0.05, delta_e = 0.05, delta_p = 0.05, delta_q = 0.95, eps = 0.1;
  double norm_bound = 10.0, loss_range = 10.0, target_miss = 0.05, min_return = 0.0;
  bool long_only = false;
  std::string rademacher = "analytic";
  int draws = 200;
  std::string threshold_mode = "rademacher";
  std::size_t oracle_samples = 1000000;
  int outer = 50;
  int inner = 200;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string sweep;
  std::string out;
  std::string csv;

  void add(CLI::App* app) {
    data.add(app);
    app->add_option("--method", method, "m1 | m2 | m3 | m4")
        ->check(CLI::IsMember({"m1", "m2", "m3", "m4"}));
    app->add_option("--n", n, "training sample size")->check(CLI::PositiveNumber);
    app->add_option("--m", m, "decision dimension")->check(CLI::PositiveNumber);
    app->add_option("--delta", delta, "confidence parameter");
    app->add_option("--delta-e", delta_e, "residual miss probability");
    app->add_option("--delta-p", delta_p, "lower quantile level");
    app->add_option("--delta-q", delta_q, "upper quantile level");
    app->add_option("--eps", eps, "surrogate margin for the two-quantile bound")
        ->check(CLI::PositiveNumber);
    app->add_option("--norm-bound", norm_bound, "model norm bound B_b")->check(CLI::PositiveNumber);
    app->add_option("--loss-range", loss_range, "loss range bound M")->check(CLI::PositiveNumber);
    app->add_option("--target-miss", target_miss, "m1 training miss-rate target");
    app->add_option("--min-return", min_return, "required return c");
    app->add_option("--long-only", long_only, "forbid short positions (true/false)");
    app->add_option("--rademacher", rademacher, "analytic | monte_carlo")
        ->check(CLI::IsMember({"analytic", "monte_carlo"}));
    app->add_option("--draws", draws, "Monte Carlo Rademacher draws")->check(CLI::PositiveNumber);
    app->add_option("--threshold-mode", threshold_mode, "rademacher | population")
        ->check(CLI::IsMember({"rademacher", "population"}));
    app->add_option("--oracle-samples", oracle_samples, "sample size for best-in-class oracles")
        ->check(CLI::PositiveNumber);
    app->add_option("--outer", outer, "outer (training-sample) trials")->check(CLI::PositiveNumber);
    app->add_option("--inner", inner, "inner (test-draw) trials")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "master seed");
    app->add_option("--jobs", jobs, "worker threads for outer trials");
    app->add_option("--sweep", sweep, "n=v1,v2,... or m=v1,v2,...");
    app->add_option("--out", out, "report JSON path")->required();
    app->add_option("--csv", csv, "plot-ready CSV path");
  }

  int run() const {
    set_jobs(jobs);
    rosets::PipelineConfig base;
    base.method = rosets::parse_method(method);
    base.spec = data.spec(rosets::stream_seed(seed, 1));
    base.n = n;
    base.m = m;
    base.delta = delta;
    base.delta_e = delta_e;
    base.delta_p = delta_p;
    base.delta_q = delta_q;
    base.eps = eps;
    base.norm_bound = norm_bound;
    base.loss_range = loss_range;
    base.target_miss = target_miss;
    base.min_return = min_return;
    base.long_only = long_only;
    base.rademacher = rademacher == "analytic" ? rosets::RademacherMode::analytic
                                               : rosets::RademacherMode::monte_carlo;
    base.rademacher_draws = draws;
    base.threshold_mode = threshold_mode == "rademacher" ? rosets::ThresholdMode::rademacher
                                                         : rosets::ThresholdMode::population;
    base.oracle_samples = oracle_samples;
    try {
      base.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }

    std::string var = "n";
    std::vector<double> values{static_cast<double>(n)};
    if (!sweep.empty()) {
      const auto eq = sweep.find('=');
      if (eq == std::string::npos) throw UsageError("--sweep must look like n=200,2000");
      var = trim(sweep.substr(0, eq));
      if (var != "n" && var != "m") throw UsageError("--sweep variable must be n or m");
      values = parse_list(sweep.substr(eq + 1), "sweep");
      if (values.empty()) throw UsageError("--sweep lists no values");
      for (double v : values) {
        if (v < 1.0 || v != std::floor(v)) throw UsageError("--sweep values must be positive integers");
      }
    }

    Json reports = Json::array();
    std::string table = "sweep,value,theorem,bound,raw_bound,empirical,ci_lo,ci_hi,coverage,vacuous,pass\n";
    bool all_pass = true;
    for (double v : values) {
      rosets::PipelineConfig cfg = base;
      if (var == "n") cfg.n = static_cast<std::size_t>(v);
      if (var == "m") cfg.m = static_cast<int>(v);
      const rosets::GuaranteeReport r =
          rosets::monte_carlo_feasibility(cfg, outer, inner, seed, rosets::Execution::parallel);
      all_pass = all_pass && r.pass;
      reports.push_back(rosets::io::report_to_json(r));
      using rosets::io::format_double;
      table += var + "," + format_double(v) + "," + r.theorem_id + "," + format_double(r.bound) +
               "," + format_double(r.raw_bound) + "," + format_double(r.empirical) + "," +
               format_double(r.wilson_ci.lo) + "," + format_double(r.wilson_ci.hi) + "," +
               format_double(r.coverage) + "," + (r.vacuous ? "true" : "false") + "," +
               (r.pass ? "true" : "false") + "\n";
      std::cout << "validate: " << r.theorem_id << " " << var << "=" << v << " bound " << r.bound
                << " empirical " << r.empirical << " ci [" << r.wilson_ci.lo << ", "
                << r.wilson_ci.hi << "] " << (r.vacuous ? "vacuous" : (r.pass ? "pass" : "FAIL"))
                << "\n";
    }
    Json doc;
    doc["reports"] = reports;
    doc["all_pass"] = all_pass;
    rosets::io::write_text(out, doc.dump(2) + "\n");
    if (!csv.empty()) rosets::io::write_text(csv, table);
    return all_pass ? 0 : 1;
  }
};

// Puts config-file tokens right after the subcommand so that later
// command-line flags win (every option keeps its last value).
std::vector<std::string> expand_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<std::string> config;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!config) return rest;
  const std::vector<std::string> extra = config_tokens(*config);
  std::vector<std::string> out;
  std::size_t pos = 0;
  if (!rest.empty() && rest[0].rfind("-", 0) != 0) {
    out.push_back(rest[0]);
    pos = 1;
  }
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), rest.begin() + static_cast<std::ptrdiff_t>(pos), rest.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn uncertainty sets from data, solve robust portfolios, validate guarantees",
               "rosets"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_help;
  app.add_option("--config", config_help, "flat key = value file; flags override it");

  GenData gen;
  BuildSet build;
  Solve solve;
  Validate validate;
  CLI::App* gen_cmd = app.add_subcommand("gen-data", "write a synthetic dataset as CSV");
  CLI::App* build_cmd = app.add_subcommand("build-set", "learn a box uncertainty set");
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve the robust portfolio over a box");
  CLI::App* validate_cmd = app.add_subcommand("validate", "Monte Carlo check of a robustness bound");
  gen.add(gen_cmd);
  build.add(build_cmd);
  solve.add(solve_cmd);
  validate.add(validate_cmd);

  try {
    std::vector<std::string> args = expand_args(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*gen_cmd) return gen.run();
    if (*build_cmd) return build.run();
    if (*solve_cmd) return solve.run();
    if (*validate_cmd) return validate.run();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rosets::io::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const rosets::io::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
