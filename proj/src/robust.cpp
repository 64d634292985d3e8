#include "rosets/robust.hpp"

#include "rosets/qp.hpp"
#include "rosets/rng.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <vector>

namespace rosets {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::max_iter: return "max_iter";
  }
  return "unknown";
}

namespace {

constexpr double kOracleTol = 1e-12;

// a^T pi >= b in weight space.
struct Cut {
  Vector normal;
  double rhs;
};

// Returns the most violated constraint at pi, or nullopt.
using CutOracle = std::function<std::optional<Cut>(const Vector& pi)>;

double scaled_slack(const Cut& c, const Vector& pi) {
  return (c.normal.dot(pi) - c.rhs) / std::max(1.0, c.normal.norm());
}

// Worst-case residual of every constraint at pi, for the KKT check.
using PrimalCheck = std::function<double(const Vector& pi)>;

RobustSolution solve_portfolio(const PortfolioProblem& problem, const CutOracle& family,
                               const PrimalCheck& primal_violation) {
  const Eigen::Index m = static_cast<Eigen::Index>(problem.dimension());
  Matrix sigma = problem.covariance();
  RobustSolution out;

  auto oracle_pi = [&](const Vector& pi) -> std::optional<Cut> {
    std::optional<Cut> worst = family(pi);
    double worst_val = worst ? scaled_slack(*worst, pi) : 0.0;
    if (problem.long_only()) {
      for (Eigen::Index j = 0; j < m; ++j) {
        if (pi[j] < -kOracleTol && pi[j] < worst_val) {
          worst_val = pi[j];
          worst = Cut{Vector::Unit(m, j), 0.0};
        }
      }
    }
    if (worst && worst_val < -kOracleTol) return worst;
    return std::nullopt;
  };

  if (m == 1) {
    out.weights = Vector::Ones(1);
    out.objective = sigma(0, 0);
    out.iterations = 0;
    if (oracle_pi(out.weights)) {
      out.status = SolveStatus::infeasible;
      out.message = "the only fully invested portfolio violates a return constraint";
    } else {
      out.status = SolveStatus::optimal;
    }
    return out;
  }

  // Eliminate 1^T pi = 1: pi = pi0 + Z w with Z an orthonormal basis of 1-perp.
  const Vector pi0 = Vector::Constant(m, 1.0 / static_cast<double>(m));
  const Eigen::HouseholderQR<Matrix> qr(Matrix::Ones(m, 1));
  const Matrix z = (qr.householderQ() * Matrix::Identity(m, m)).rightCols(m - 1);

  Matrix hessian = 2.0 * z.transpose() * sigma * z;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian, Eigen::EigenvaluesOnly);
  const double top = std::max(eig.eigenvalues().maxCoeff(), 1e-300);
  if (eig.eigenvalues().minCoeff() <= 1e-12 * top) {
    const double ridge = 1e-10 * std::max(1.0, sigma.trace() / static_cast<double>(m));
    sigma.diagonal().array() += ridge;
    hessian = 2.0 * z.transpose() * sigma * z;
    out.message = "covariance is singular on the budget hyperplane; added ridge " +
                  std::to_string(ridge);
  }
  const Vector linear = 2.0 * z.transpose() * sigma * pi0;

  auto registry = std::make_shared<std::vector<Cut>>();
  qp::ViolationOracle oracle = [&, registry](const Vector& w) -> std::optional<qp::Constraint> {
    const Vector pi = pi0 + z * w;
    std::optional<Cut> cut = oracle_pi(pi);
    if (!cut) return std::nullopt;
    registry->push_back(*cut);
    return qp::Constraint{z.transpose() * cut->normal, cut->rhs - cut->normal.dot(pi0),
                          static_cast<int>(registry->size() - 1)};
  };

  const qp::Result res = qp::solve(hessian, linear, oracle);
  out.iterations = res.iterations;
  out.weights = pi0 + z * res.x;
  out.objective = out.weights.dot(problem.covariance() * out.weights);

  if (res.status == qp::Status::infeasible) {
    out.status = SolveStatus::infeasible;
    std::string why = "no fully invested portfolio meets every return constraint";
    if (!res.message.empty()) why += ": " + res.message;
    out.message = out.message.empty() ? why : out.message + "; " + why;
    return out;
  }
  if (res.status == qp::Status::iteration_limit) {
    out.status = SolveStatus::max_iter;
    out.message = res.message;
    return out;
  }

  // KKT residual in weight space: grad = 2 Sigma pi - sum lambda_k a_k - nu 1.
  Vector grad = 2.0 * sigma * out.weights;
  double comp = 0.0;
  double dual = 0.0;
  for (std::size_t k = 0; k < res.active.size(); ++k) {
    const Cut& c = (*registry)[static_cast<std::size_t>(res.active[k].id)];
    const double lambda = res.multipliers[static_cast<Eigen::Index>(k)];
    grad -= lambda * c.normal;
    comp = std::max(comp, std::abs(lambda * (c.normal.dot(out.weights) - c.rhs)));
    dual = std::max(dual, -lambda);
  }
  const double nu = grad.mean();
  const double stationarity = (grad.array() - nu).abs().maxCoeff();
  double primal = std::abs(out.weights.sum() - 1.0);
  primal = std::max(primal, primal_violation(out.weights));
  if (problem.long_only()) primal = std::max(primal, std::max(0.0, -out.weights.minCoeff()));
  out.kkt_residual = std::max({stationarity, primal, comp, dual});

  if (out.kkt_residual <= kKktTol) {
    out.status = SolveStatus::optimal;
  } else {
    out.status = SolveStatus::max_iter;
    out.message += (out.message.empty() ? "" : "; ") +
                   std::string("KKT residual above tolerance: ") + std::to_string(out.kkt_residual);
  }
  return out;
}

}  // namespace

RobustSolution solve_box_robust(const PortfolioProblem& problem, const BoxUncertaintySet& box) {
  require(box.dim() == problem.dimension(), "box dimension does not match the problem");
  const double c = problem.min_return();
  const Vector& lo = box.lower();
  const Vector& hi = box.upper();
  auto worst_vertex = [&](const Vector& pi) {
    Vector y(pi.size());
    for (Eigen::Index j = 0; j < pi.size(); ++j) y[j] = pi[j] >= 0.0 ? lo[j] : hi[j];
    return y;
  };
  CutOracle family = [&](const Vector& pi) -> std::optional<Cut> {
    Cut cut{worst_vertex(pi), c};
    if (scaled_slack(cut, pi) < -kOracleTol) return cut;
    return std::nullopt;
  };
  PrimalCheck check = [&](const Vector& pi) {
    return std::max(0.0, c - PortfolioProblem::worst_case_return(pi, box));
  };
  RobustSolution sol = solve_portfolio(problem, family, check);
  if (sol.status == SolveStatus::infeasible && problem.long_only()) {
    sol.message += "; best attainable worst-case return is " + std::to_string(lo.maxCoeff()) +
                   " but " + std::to_string(c) + " is required";
  }
  return sol;
}

RobustSolution solve_scenario_robust(const PortfolioProblem& problem, const Matrix& scenarios) {
  require(scenarios.rows() >= 1, "need at least one scenario");
  require(scenarios.cols() == static_cast<Eigen::Index>(problem.dimension()),
          "scenario dimension does not match the problem");
  const double c = problem.min_return();
  CutOracle family = [&](const Vector& pi) -> std::optional<Cut> {
    const Vector returns = scenarios * pi;
    Eigen::Index worst = -1;
    double worst_val = -kOracleTol;
    for (Eigen::Index l = 0; l < returns.size(); ++l) {
      const double s = (returns[l] - c) / std::max(1.0, scenarios.row(l).norm());
      if (s < worst_val) {
        worst_val = s;
        worst = l;
      }
    }
    if (worst < 0) return std::nullopt;
    return Cut{scenarios.row(worst).transpose(), c};
  };
  PrimalCheck check = [&](const Vector& pi) {
    return std::max(0.0, c - (scenarios * pi).minCoeff());
  };
  return solve_portfolio(problem, family, check);
}

RobustSolution solve_nominal(const PortfolioProblem& problem, const Vector& returns) {
  require(returns.size() == static_cast<Eigen::Index>(problem.dimension()),
          "return dimension does not match the problem");
  return solve_scenario_robust(problem, returns.transpose());
}

Matrix sample_uniform_box(const BoxUncertaintySet& box, std::size_t count, std::uint64_t seed) {
  require(count >= 1, "sample count must be positive");
  Rng rng = make_rng(seed, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Index m = static_cast<Eigen::Index>(box.dim());
  Matrix out(static_cast<Eigen::Index>(count), m);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double w = box.upper()[j] - box.lower()[j];
      out(i, j) = w > 0.0 ? box.lower()[j] + w * unit(rng) : box.lower()[j];
    }
  }
  return out;
}

namespace {

// Largest t (to tol) with x + t v inside, given x itself is inside.
double chord_end(const MembershipOracle& member, const Vector& x, const Vector& v,
                 const HitAndRunOptions& opt) {
  double inside = 0.0;
  double outside = opt.initial_step;
  int doublings = 0;
  while (member(x + outside * v)) {
    inside = outside;
    outside *= 2.0;
    require(++doublings <= opt.max_doublings, "hit-and-run: set appears unbounded");
  }
  while (outside - inside > opt.chord_tol) {
    const double mid = 0.5 * (inside + outside);
    if (member(x + mid * v)) {
      inside = mid;
    } else {
      outside = mid;
    }
  }
  return inside;
}

}  // namespace

Matrix hit_and_run(const MembershipOracle& member, const Vector& start, std::size_t count,
                   std::size_t burn_in, std::size_t thin, std::uint64_t seed,
                   const HitAndRunOptions& options) {
  require(count >= 1 && thin >= 1, "count and thin must be positive");
  require(member(start), "hit-and-run start point is not in the set");
  Rng rng = make_rng(seed, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Index m = start.size();
  Vector x = start;
  Vector v(m);
  Matrix out(static_cast<Eigen::Index>(count), m);

  auto step = [&] {
    for (int attempt = 0; attempt < options.max_redraws; ++attempt) {
      for (Eigen::Index j = 0; j < m; ++j) v[j] = gauss(rng);
      const double norm = v.norm();
      if (norm == 0.0) continue;
      v /= norm;
      const double fwd = chord_end(member, x, v, options);
      const double back = chord_end(member, x, -v, options);
      if (fwd + back <= options.chord_tol) continue;  // zero-width chord; redraw
      x += (-back + (fwd + back) * unit(rng)) * v;
      return;
    }
  };

  for (std::size_t s = 0; s < burn_in; ++s) step();
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t s = 0; s < thin; ++s) step();
    out.row(static_cast<Eigen::Index>(k)) = x.transpose();
  }
  return out;
}

}  // namespace rosets
