// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Oracles live in oracles.hpp or are computed inline with
// Boost.Math; none of them call the library routine under test.

#include "oracles.hpp"
#include "rosets/complexity.hpp"
#include "rosets/distributions.hpp"
#include "rosets/learners.hpp"
#include "rosets/rng.hpp"
#include "rosets/robust.hpp"
#include "rosets/synth.hpp"
#include "rosets/usets.hpp"
#include "rosets/validate.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace rosets;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void run(int id, const char* name, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail << " [exception: " << e.what() << "]";
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_s > 0.0 && secs > budget_s) {
    out.pass = false;
    out.detail << " [over runtime budget of " << budget_s << " s]";
  }
  if (!out.pass) ++failures;
  std::printf("%s %2d %s:%s (%.2f s)\n", out.pass ? "PASS" : "FAIL", id, name,
              out.detail.str().c_str(), secs);
  std::fflush(stdout);
}

SynthSpec gaussian_spec(int d, double sigma, std::uint64_t seed) {
  SynthSpec spec;
  spec.kind = SynthKind::linear_gaussian;
  spec.d = d;
  spec.true_coefficients = Vector::LinSpaced(d, 1.0, -0.5);
  spec.noise_scale = sigma;
  spec.seed = seed;
  spec.intercept = 3.0;
  spec.append_constant = true;
  return spec;
}

void quantile_recovery(Outcome& out) {
  Rng rng = make_rng(101, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 1000;
  Vector y(n);
  std::vector<double> ys(n);
  for (int i = 0; i < n; ++i) ys[i] = y[i] = g(rng);
  const Dataset data(Matrix::Ones(n, 1), y);
  std::vector<double> sorted = ys;
  std::sort(sorted.begin(), sorted.end());
  for (double tau : {0.05, 0.5, 0.95}) {
    const auto [lo, hi] = oracle::sample_quantile_range(ys, tau);
    const double q = fit_quantile(data, tau, 100.0).coefficients()[0];
    const auto lo_rank = std::lower_bound(sorted.begin(), sorted.end(), lo) - sorted.begin();
    const auto hi_rank = std::upper_bound(sorted.begin(), sorted.end(), hi) - sorted.begin();
    const double below = sorted[static_cast<std::size_t>(std::max<long>(lo_rank - 1, 0))];
    const double above = sorted[static_cast<std::size_t>(std::min<long>(hi_rank, n - 1))];
    out.detail << " tau=" << tau << " fit=" << q << " oracle=[" << lo << "," << hi << "]";
    out.expect(q >= below - 1e-9 && q <= above + 1e-9, "fit outside one order-statistic step");
  }
}

void method2_coverage(Outcome& out) {
  const SynthSpec spec = gaussian_spec(3, 1.0, 202);
  const Dataset s = generate(spec, 2000);
  const LinearModel lo = fit_quantile(s, 0.05, 10.0);
  const LinearModel hi = fit_quantile(s, 0.95, 10.0);
  Rng rng = make_rng(spec.seed, 77);
  const std::size_t draws = 100000;
  const Matrix x = draw_features(spec, draws, rng);
  const QueryBatch q(x);
  const BoxUncertaintySet box = build_method2(lo, hi, q);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double y = draw_label(spec, x.row(r).transpose(), rng);
    if (y >= box.lower()[r] && y <= box.upper()[r]) ++inside;
  }
  const WilsonInterval ci = wilson_interval(inside, draws);
  out.detail << " coverage=" << static_cast<double>(inside) / draws << " ci=[" << ci.lo << ","
             << ci.hi << "]";
  out.expect(ci.lo >= 0.88 && ci.hi <= 0.92, "95% interval not inside [0.88, 0.92]");
}

void bound_validity(Outcome& out) {
  for (Method method : {Method::m1, Method::m2}) {
    PipelineConfig cfg;
    cfg.method = method;
    cfg.spec = gaussian_spec(3, 1.0, 303);
    cfg.n = 20000;
    cfg.eps = 0.1;
    cfg.delta = 0.05;
    cfg.m = 3;
    cfg.min_return = 1.0;
    const GuaranteeReport r = monte_carlo_feasibility(cfg, 200, 500, 31);
    out.detail << " " << r.theorem_id << ": bound=" << r.bound << " empirical=" << r.empirical
               << " ci_hi=" << r.wilson_ci.hi << (r.vacuous ? " (vacuous)" : "")
               << " infeasible_solves=" << r.infeasible_solves << ";";
    out.expect(r.pass, std::string(r.theorem_id) + " bound above the Wilson upper limit");
  }
}

void finite_class(Outcome& out) {
  FiniteClassCheckConfig cfg;
  cfg.spec = gaussian_spec(3, 1.0, 404);
  cfg.n = 1000;
  cfg.class_size = 50;
  cfg.delta = 0.1;
  cfg.outer = 500;
  const FiniteClassCheck r = finite_class_membership(cfg, 41);
  const double required = 0.9 - 3.0 * std::sqrt(0.9 * 0.1 / 500.0);
  out.detail << " fraction=" << r.fraction << " required=" << required << " class=" << r.class_size;
  out.expect(r.fraction >= required, "covered fraction below requirement");
}

void extremization_oracle(Outcome& out) {
  Rng rng = make_rng(505, 0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 30;
    Matrix x(n, 2);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = u(rng);
      x(i, 1) = u(rng);
      y[i] = 0.8 * x(i, 0) - 0.3 * x(i, 1) + 0.5 * g(rng);
    }
    auto data = std::make_shared<const Dataset>(x, y);
    const LinearModel ref = fit_least_squares(*data, 100.0);
    const double t = empirical_loss(ref, *data, Loss::squared()) * (1.0 + 0.5 * (u(rng) + 1.0));
    const GoodModelSet gset(data, ref, Loss::squared(), t);
    const Vector q = (Vector(2) << g(rng), g(rng)).finished();
    const Extremum e = extremize_prediction(gset, q);
    const double sup = oracle::squared_sup_projected_ascent(x, y, t, q);
    const double inf = -oracle::squared_sup_projected_ascent(x, y, t, -q);
    worst = std::max({worst, std::abs(e.sup - sup) / std::max(1.0, std::abs(sup)),
                      std::abs(e.inf - inf) / std::max(1.0, std::abs(inf))});
  }
  out.detail << " max relative error=" << worst;
  out.expect(worst <= 1e-4, "closed form disagrees with projected ascent");
}

Matrix box_vertices(const BoxUncertaintySet& box) {
  const int m = static_cast<int>(box.dim());
  Matrix v(1 << m, m);
  for (int k = 0; k < (1 << m); ++k) {
    for (int j = 0; j < m; ++j) v(k, j) = (k >> j & 1) ? box.upper()[j] : box.lower()[j];
  }
  return v;
}

void robust_solver(Outcome& out) {
  Rng rng = make_rng(606, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double nominal_err = 0.0, vertex_err = 0.0, kkt = 0.0;
  int optimal = 0, violations = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 2 + trial % 3;
    Matrix a(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) a(i, j) = g(rng);
    }
    const Matrix sigma = a * a.transpose() / m + 0.05 * Matrix::Identity(m, m);
    Vector lo(m), hi(m);
    for (int j = 0; j < m; ++j) {
      lo[j] = 2.0 * u(rng) - 0.5;
      hi[j] = lo[j] + 0.6 * u(rng);
    }
    const BoxUncertaintySet box(lo, hi);
    const PortfolioProblem p(sigma, lo.minCoeff() + 0.6 * (lo.maxCoeff() - lo.minCoeff()));

    const RobustSolution point = solve_box_robust(p, BoxUncertaintySet(lo, lo));
    const RobustSolution nominal = solve_nominal(p, lo);
    if (point.status == SolveStatus::optimal) {
      out.expect(nominal.status == SolveStatus::optimal, "nominal status differs");
      nominal_err = std::max(nominal_err, (point.weights - nominal.weights).cwiseAbs().maxCoeff());
      kkt = std::max({kkt, point.kkt_residual, nominal.kkt_residual});
    }

    const RobustSolution s = solve_box_robust(p, box);
    const RobustSolution sc = solve_scenario_robust(p, box_vertices(box));
    out.expect(s.status == sc.status, "box and vertex-scenario status differ");
    if (s.status != SolveStatus::optimal) continue;
    ++optimal;
    vertex_err = std::max(vertex_err, (s.weights - sc.weights).cwiseAbs().maxCoeff());
    kkt = std::max({kkt, s.kkt_residual, sc.kkt_residual});
    const Matrix draws = sample_uniform_box(box, 10000, 6060 + static_cast<std::uint64_t>(trial));
    for (Eigen::Index i = 0; i < draws.rows(); ++i) {
      if (!p.feasible(s.weights, draws.row(i).transpose(), 1e-8)) ++violations;
    }
  }
  out.detail << " optimal=" << optimal << " nominal_err=" << nominal_err
             << " vertex_err=" << vertex_err << " max_kkt=" << kkt
             << " sample_violations=" << violations;
  out.expect(optimal >= 20, "too few optimal instances exercised");
  out.expect(nominal_err <= 1e-6, "degenerate box differs from nominal");
  out.expect(vertex_err <= 1e-6, "vertex scenario differs from box counterpart");
  out.expect(kkt <= kKktTol, "KKT residual above 1e-6");
  out.expect(violations == 0, "robust solution violated by an in-box sample");
}

void monotonicity(Outcome& out) {
  // Nested boxes.
  Rng rng = make_rng(707, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  int box_checks = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 4;
    Matrix a(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) a(i, j) = g(rng);
    }
    const Matrix sigma = a * a.transpose() / m + 0.05 * Matrix::Identity(m, m);
    Vector mid(m);
    for (int j = 0; j < m; ++j) mid[j] = 1.0 + 0.3 * g(rng);
    const PortfolioProblem p(sigma, mid.mean());
    double prev = -1.0;
    for (double r : {0.0, 0.02, 0.05, 0.1, 0.2}) {
      const RobustSolution s = solve_box_robust(p, BoxUncertaintySet(mid.array() - r, mid.array() + r));
      if (s.status != SolveStatus::optimal) break;
      out.expect(s.objective >= prev - 1e-10, "objective decreased on a larger box");
      prev = s.objective;
      ++box_checks;
    }
  }

  const SynthSpec spec = gaussian_spec(2, 0.5, 708);
  auto data = std::make_shared<const Dataset>(generate(spec, 400));
  Rng qrng = make_rng(spec.seed, 9);
  const QueryBatch q(draw_features(spec, 8, qrng));
  const double dp = 0.1, dq = 0.9;
  const LinearModel ls = fit_least_squares(*data, 10.0);
  const LinearModel fp = fit_quantile(*data, dp, 10.0);
  const LinearModel fq = fit_quantile(*data, dq, 10.0);
  const double lls = empirical_loss(ls, *data, Loss::squared());
  const double lp = empirical_loss(fp, *data, Loss::pinball(dp));
  const double lq = empirical_loss(fq, *data, Loss::pinball(dq));

  // Larger e widens method-3 and method-4 boxes pointwise.
  const GoodModelSet g3(data, ls, Loss::squared(), lls + 0.05);
  const GoodModelSet gp(data, fp, Loss::pinball(dp), lp + 0.02);
  const GoodModelSet gq(data, fq, Loss::pinball(dq), lq + 0.02);
  BoxUncertaintySet prev3 = build_method3(g3, q, {0.0, 0.0}).box;
  BoxUncertaintySet prev4 = build_method4(gp, gq, q, {0.0, 0.0}, {0.0, 0.0}).box;
  for (double e : {0.1, 0.5, 1.0}) {
    const BoxUncertaintySet b3 = build_method3(g3, q, {e, 0.05}).box;
    const BoxUncertaintySet b4 = build_method4(gp, gq, q, {e, 0.05}, {e, 0.05}).box;
    out.expect(b3.contains(prev3), "method-3 box shrank as e grew");
    out.expect(b4.contains(prev4), "method-4 box shrank as e grew");
    prev3 = b3;
    prev4 = b4;
  }

  // Larger thresholds give nested extremization intervals.
  Extremum last_sq{0.0, 0.0, false, 0.0}, last_pb{0.0, 0.0, false, 0.0};
  bool first = true;
  const Vector q0 = q.features().row(0).transpose();
  for (double slack : {0.0, 0.01, 0.05, 0.2}) {
    const Extremum es = extremize_prediction(GoodModelSet(data, ls, Loss::squared(), lls + slack), q0);
    const Extremum ep =
        extremize_prediction(GoodModelSet(data, fp, Loss::pinball(dp), lp + slack), q0);
    if (!first) {
      out.expect(es.inf <= last_sq.inf + 1e-12 && es.sup >= last_sq.sup - 1e-12,
                 "squared-loss interval not nested");
      out.expect(ep.inf <= last_pb.inf + 1e-6 && ep.sup >= last_pb.sup - 1e-6,
                 "pinball interval not nested");
    }
    first = false;
    last_sq = es;
    last_pb = ep;
  }

  // Method-4 box contains the method-2 box built from the same fits.
  const BoxUncertaintySet m2 = build_method2(fp, fq, q);
  out.expect(build_method4(gp, gq, q, {0.0, 0.0}, {0.0, 0.0}).box.contains(m2, 1e-7),
             "method-4 box misses the method-2 box");
  out.detail << " nested-box solves=" << box_checks;
}

void samplers(Outcome& out) {
  const int m = 3;
  const BoxUncertaintySet unit(Vector::Zero(m), Vector::Ones(m));
  const std::size_t count = 100000;
  const Matrix direct = sample_uniform_box(unit, count, 808);
  const Vector direct_mean = direct.colwise().mean();
  const MembershipOracle member = [&](const Vector& z) { return unit.contains(z); };
  const Matrix walk = hit_and_run(member, Vector::Constant(m, 0.5), count, 1000, 5, 809);
  const Vector walk_mean = walk.colwise().mean();
  // Batch-means standard errors absorb the walk's autocorrelation.
  const int batches = 100;
  const Eigen::Index len = static_cast<Eigen::Index>(count) / batches;
  double worst = 0.0;
  for (int j = 0; j < m; ++j) {
    Vector means(batches);
    for (int b = 0; b < batches; ++b) means[b] = walk.col(j).segment(b * len, len).mean();
    const double se_walk =
        std::sqrt((means.array() - means.mean()).square().sum() / (batches - 1) / batches);
    const double se_direct = std::sqrt(1.0 / 12.0 / static_cast<double>(count));
    const double se = std::sqrt(se_walk * se_walk + se_direct * se_direct);
    worst = std::max(worst, std::abs(walk_mean[j] - direct_mean[j]) / se);
    out.expect(std::abs(direct_mean[j] - 0.5) <= 0.005, "direct sampler mean off 0.5");
  }
  out.detail << " direct_mean=(" << direct_mean.transpose() << ") walk_mean=("
             << walk_mean.transpose() << ") max |diff|/se=" << worst;
  out.expect(worst <= 3.0, "hit-and-run mean differs by more than 3 standard errors");
}

void rademacher(Outcome& out) {
  Rng rng = make_rng(909, 0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int below = 0;
  for (int k = 0; k < 20; ++k) {
    const int n = 50 + 25 * k;
    const int d = 1 + k % 5;
    Matrix x(n, d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) x(i, j) = u(rng);
    }
    const Dataset data(x, Vector::Zero(n));
    const double b = 0.5 + k;
    const RademacherEstimate est =
        empirical_rademacher_linear(data, b, 400, 9090 + static_cast<std::uint64_t>(k), 4);
    const double bound = linear_class_bounds(data.max_row_norm(), b, data.size()).r_base;
    if (est.value <= bound + 3.0 * est.std_error) ++below;
  }
  Matrix two(2, 1);
  two << 1.0, 1.0;
  const double exact = oracle::rademacher_linear_exact(two, 1.0);
  const RademacherEstimate mc = empirical_rademacher_linear(Dataset(two, Vector::Zero(2)), 1.0,
                                                            200000, 91, 4);
  out.detail << " datasets within bound=" << below << "/20 two-point exact=" << exact
             << " mc=" << mc.value << "+-" << mc.std_error;
  out.expect(below == 20, "estimate above X_b B_b / sqrt(n) + 3 se");
  out.expect(exact == 0.5, "two-point enumeration is not 0.5");
  out.expect(std::abs(mc.value - exact) <= 3.0 * mc.std_error, "MC two-point estimate off 0.5");
}

void quantile_plumbing(Outcome& out) {
  const double chi = dist::chi_squared_quantile(0.95, 1.0);
  const double z = dist::normal_quantile(0.975);
  const double chi_ref = boost::math::quantile(boost::math::chi_squared(1.0), 0.95);
  const double z_ref = boost::math::quantile(boost::math::normal(), 0.975);
  out.detail << " chi2_1(0.95)=" << chi << " z_0.975=" << z;
  out.expect(std::abs(chi - 3.8415) <= 1e-3 && std::abs(chi - chi_ref) <= 1e-8,
             "chi-squared quantile");
  out.expect(std::abs(z - 1.9600) <= 1e-3 && std::abs(z - z_ref) <= 1e-8, "normal quantile");
}

}  // namespace

int main() {
  run(1, "quantile recovery", 5.0, quantile_recovery);
  run(2, "method-2 coverage", 30.0, method2_coverage);
  run(3, "bound validity (m1, m2)", 300.0, bound_validity);
  run(4, "finite-class membership", 120.0, finite_class);
  run(5, "extremization oracle", 0.0, extremization_oracle);
  run(6, "robust solver", 0.0, robust_solver);
  run(7, "monotonicity", 0.0, monotonicity);
  run(8, "samplers", 0.0, samplers);
  run(9, "Rademacher", 0.0, rademacher);
  run(10, "quantile functions", 0.0, quantile_plumbing);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
