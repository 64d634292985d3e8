#include "oracles.hpp"
#include "rosets/rng.hpp"
#include "rosets/robust.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace rosets;
using Catch::Matchers::WithinAbs;

namespace {

Matrix random_covariance(int m, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) a(i, j) = g(rng);
  }
  return a * a.transpose() / m + 0.1 * Matrix::Identity(m, m);
}

BoxUncertaintySet random_box(int m, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.0, 0.5);
  Vector lo(m), hi(m);
  for (int j = 0; j < m; ++j) {
    lo[j] = u(rng);
    hi[j] = lo[j] + w(rng);
  }
  return BoxUncertaintySet(lo, hi);
}

Matrix vertices(const BoxUncertaintySet& box) {
  const int m = static_cast<int>(box.dim());
  Matrix v(1 << m, m);
  for (int k = 0; k < (1 << m); ++k) {
    for (int j = 0; j < m; ++j) v(k, j) = (k >> j & 1) ? box.upper()[j] : box.lower()[j];
  }
  return v;
}

}  // namespace

TEST_CASE("identity covariance with a degenerate symmetric box splits evenly") {
  const PortfolioProblem p(Matrix::Identity(2, 2), 0.5);
  const BoxUncertaintySet box(Vector::Ones(2), Vector::Ones(2));
  const RobustSolution s = solve_box_robust(p, box);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK_THAT(s.weights[0], WithinAbs(0.5, 1e-12));
  CHECK_THAT(s.weights[1], WithinAbs(0.5, 1e-12));
  CHECK_THAT(s.objective, WithinAbs(0.5, 1e-12));
}

TEST_CASE("inactive return constraint gives the minimum-variance portfolio") {
  Rng rng = make_rng(1, 0);
  const Matrix sigma = random_covariance(4, rng);
  const PortfolioProblem p(sigma, -100.0);
  const Vector inv = sigma.ldlt().solve(Vector::Ones(4));
  const Vector expect = inv / inv.sum();
  const RobustSolution nominal = solve_nominal(p, Vector::Zero(4));
  REQUIRE(nominal.status == SolveStatus::optimal);
  CHECK((nominal.weights - expect).norm() < 1e-9);
  const RobustSolution robust = solve_box_robust(p, random_box(4, rng));
  CHECK((robust.weights - expect).norm() < 1e-9);
}

TEST_CASE("box counterpart equals the vertex-scenario problem and brute force") {
  Rng rng = make_rng(2, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 3;
    const Matrix sigma = random_covariance(m, rng);
    const BoxUncertaintySet box = random_box(m, rng);
    const double c = 0.5 * (box.lower().minCoeff() + box.lower().maxCoeff());
    const PortfolioProblem p(sigma, c);
    const RobustSolution s = solve_box_robust(p, box);
    const Matrix v = vertices(box);
    const RobustSolution sc = solve_scenario_robust(p, v);
    bool feasible = false;
    const auto [pi, best] = oracle::qp_bruteforce(sigma, v, Vector::Constant(v.rows(), c), feasible);
    if (!feasible) {
      CHECK(s.status == SolveStatus::infeasible);
      continue;
    }
    REQUIRE(s.status == SolveStatus::optimal);
    REQUIRE(sc.status == SolveStatus::optimal);
    CHECK((s.weights - sc.weights).norm() < 1e-6);
    CHECK_THAT(s.objective, WithinAbs(best, 1e-9));
    CHECK(s.kkt_residual <= kKktTol);
    CHECK_THAT(s.objective, WithinAbs(s.weights.dot(sigma * s.weights), 1e-10));
  }
}

TEST_CASE("robust solution is feasible for every sampled box point") {
  Rng rng = make_rng(3, 0);
  const int m = 5;
  const Matrix sigma = random_covariance(m, rng);
  const BoxUncertaintySet box = random_box(m, rng);
  const PortfolioProblem p(sigma, box.lower().mean());
  const RobustSolution s = solve_box_robust(p, box);
  REQUIRE(s.status == SolveStatus::optimal);
  const Matrix draws = sample_uniform_box(box, 10000, 4);
  int violations = 0;
  for (Eigen::Index i = 0; i < draws.rows(); ++i) {
    if (!p.feasible(s.weights, draws.row(i).transpose(), kFeasibilityTol)) ++violations;
  }
  CHECK(violations == 0);
  CHECK(p.robust_feasible(s.weights, box, kFeasibilityTol));
}

TEST_CASE("nested boxes never lower the robust objective") {
  Rng rng = make_rng(5, 0);
  const int m = 4;
  const Matrix sigma = random_covariance(m, rng);
  Vector mid = Vector::Constant(m, 0.3);
  mid[0] = 0.6;
  double prev = -1.0;
  for (double r : {0.0, 0.05, 0.1, 0.2}) {
    const BoxUncertaintySet box(mid.array() - r, mid.array() + r);
    const RobustSolution s = solve_box_robust(PortfolioProblem(sigma, 0.35), box);
    if (s.status != SolveStatus::optimal) break;
    CHECK(s.objective >= prev - 1e-10);
    prev = s.objective;
  }
}

TEST_CASE("long-only infeasibility is reported with a message") {
  const BoxUncertaintySet box(Vector::Constant(3, 0.0), Vector::Constant(3, 1.0));
  const RobustSolution s = solve_box_robust(PortfolioProblem(Matrix::Identity(3, 3), 0.5, true), box);
  CHECK(s.status == SolveStatus::infeasible);
  CHECK_FALSE(s.message.empty());
}

TEST_CASE("long-only solution stays nonnegative") {
  Rng rng = make_rng(6, 0);
  const Matrix sigma = random_covariance(4, rng);
  Vector lo(4), hi(4);
  lo << 0.1, 0.5, 0.2, 0.9;
  hi = lo.array() + 0.1;
  const RobustSolution s =
      solve_box_robust(PortfolioProblem(sigma, 0.7, true), BoxUncertaintySet(lo, hi));
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.weights.minCoeff() >= -1e-9);
  CHECK(s.kkt_residual <= kKktTol);
}

TEST_CASE("single asset") {
  const BoxUncertaintySet box(Vector::Constant(1, 0.5), Vector::Constant(1, 1.0));
  const RobustSolution ok = solve_box_robust(PortfolioProblem(Matrix::Constant(1, 1, 2.0), 0.4), box);
  CHECK(ok.status == SolveStatus::optimal);
  CHECK(ok.weights[0] == 1.0);
  CHECK(ok.objective == 2.0);
  const RobustSolution bad = solve_box_robust(PortfolioProblem(Matrix::Constant(1, 1, 2.0), 0.6), box);
  CHECK(bad.status == SolveStatus::infeasible);
}

TEST_CASE("singular covariance is regularized and still solved") {
  Matrix sigma = Matrix::Ones(3, 3);
  const RobustSolution s = solve_box_robust(PortfolioProblem(sigma, 0.0),
                                            BoxUncertaintySet(Vector::Zero(3), Vector::Ones(3)));
  CHECK(s.status == SolveStatus::optimal);
  CHECK_THAT(s.weights.sum(), WithinAbs(1.0, 1e-9));
}

TEST_CASE("uniform box sampler moments") {
  Vector lo(2), hi(2);
  lo << -1.0, 2.0;
  hi << 1.0, 6.0;
  const Matrix draws = sample_uniform_box(BoxUncertaintySet(lo, hi), 40000, 7);
  const Vector mean = draws.colwise().mean();
  CHECK_THAT(mean[0], WithinAbs(0.0, 4.0 * std::sqrt(1.0 / 3.0 / 40000)));
  CHECK_THAT(mean[1], WithinAbs(4.0, 4.0 * std::sqrt(4.0 / 3.0 / 40000)));
  const double var0 = (draws.col(0).array() - mean[0]).square().mean();
  CHECK_THAT(var0, WithinAbs(1.0 / 3.0, 0.01));
  CHECK(draws.col(1).minCoeff() >= 2.0);
  CHECK(draws.col(1).maxCoeff() <= 6.0);
  CHECK(draws == sample_uniform_box(BoxUncertaintySet(lo, hi), 40000, 7));
}

TEST_CASE("hit-and-run on the unit disc") {
  const MembershipOracle disc = [](const Vector& z) { return z.squaredNorm() <= 1.0; };
  const Matrix draws = hit_and_run(disc, Vector::Zero(2), 20000, 500, 5, 8);
  REQUIRE(draws.rows() == 20000);
  const Vector sq = draws.rowwise().squaredNorm();
  CHECK(sq.maxCoeff() <= 1.0);
  // E||z||^2 = 1/2 under the uniform law on the disc; batch means for the SE.
  const int batches = 50, len = 400;
  Vector means(batches);
  for (int b = 0; b < batches; ++b) means[b] = sq.segment(b * len, len).mean();
  const double se = std::sqrt((means.array() - means.mean()).square().sum() / (batches - 1) / batches);
  CHECK(std::abs(sq.mean() - 0.5) <= 4.0 * se + 1e-3);
}

TEST_CASE("hit-and-run on a box with a zero-width side") {
  const BoxUncertaintySet box(Vector::Zero(2), (Vector(2) << 1.0, 0.0).finished());
  const MembershipOracle member = [&](const Vector& z) { return box.contains(z, 1e-12); };
  const Matrix draws = hit_and_run(member, Vector::Zero(2), 200, 10, 1, 9);
  CHECK(draws.rows() == 200);
  for (Eigen::Index i = 0; i < draws.rows(); ++i) CHECK(box.contains(draws.row(i).transpose(), 1e-9));
}
