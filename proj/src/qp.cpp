#include "rosets/qp.hpp"

#include <cmath>
#include <limits>

namespace rosets::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Factors {
  Matrix j;  // L^{-T} Q
  Matrix r;  // q x q upper triangular
};

Factors factorize(const Matrix& l_inv, const std::vector<Constraint>& active) {
  const Eigen::Index n = l_inv.rows();
  const Eigen::Index q = static_cast<Eigen::Index>(active.size());
  Factors f;
  if (q == 0) {
    f.j = l_inv.transpose();
    f.r.resize(0, 0);
    return f;
  }
  Matrix b(n, q);
  for (Eigen::Index c = 0; c < q; ++c) b.col(c) = l_inv * active[static_cast<std::size_t>(c)].normal;
  Eigen::HouseholderQR<Matrix> qr(b);
  const Matrix q_full = qr.householderQ() * Matrix::Identity(n, n);
  f.j = l_inv.transpose() * q_full;
  f.r = qr.matrixQR().topLeftCorner(q, q).triangularView<Eigen::Upper>();
  return f;
}

}  // namespace

Result solve(const Matrix& hessian, const Vector& linear, const ViolationOracle& oracle,
             const Options& options) {
  const Eigen::Index n = hessian.rows();
  require(hessian.cols() == n && linear.size() == n, "qp dimension mismatch");
  Eigen::LLT<Matrix> llt(hessian);
  require(llt.info() == Eigen::Success, "qp hessian must be positive definite");
  const Matrix l = llt.matrixL();
  const Matrix l_inv = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));

  Result res;
  Vector x = -llt.solve(linear);
  std::vector<Constraint> active;
  Vector u(0);

  auto finish = [&](Status status, std::string message) {
    res.status = status;
    res.x = x;
    res.objective = 0.5 * x.dot(hessian * x) + linear.dot(x);
    res.active = active;
    res.multipliers = u;
    res.message = std::move(message);
    return res;
  };

  while (res.iterations < options.max_iterations) {
    std::optional<Constraint> violated = oracle(x);
    if (!violated) return finish(Status::optimal, "");
    const Constraint p = std::move(*violated);
    double u_p = 0.0;

    for (;;) {
      if (++res.iterations > options.max_iterations)
        return finish(Status::iteration_limit, "iteration limit reached");
      const Eigen::Index q = static_cast<Eigen::Index>(active.size());
      const Factors f = factorize(l_inv, active);
      const Vector d = f.j.transpose() * p.normal;
      Vector z = Vector::Zero(n);
      if (q < n) z = f.j.rightCols(n - q) * d.tail(n - q);
      Vector r(q);
      if (q > 0) r = f.r.triangularView<Eigen::Upper>().solve(d.head(q));

      double t1 = kInf;
      Eigen::Index drop = -1;
      for (Eigen::Index j = 0; j < q; ++j) {
        if (r[j] > options.zero_tol) {
          const double ratio = u[j] / r[j];
          if (ratio < t1) {
            t1 = ratio;
            drop = j;
          }
        }
      }
      const double zn = z.dot(p.normal);
      const double scale = p.normal.squaredNorm();
      double t2 = kInf;
      if (z.norm() > options.zero_tol && zn > options.zero_tol * std::max(1.0, scale)) {
        t2 = -p.slack(x) / zn;
      }

      if (t1 == kInf && t2 == kInf) {
        return finish(Status::infeasible,
                      "constraint cannot be satisfied together with the active set (" +
                          std::to_string(q) + " active constraints)");
      }
      if (t2 == kInf) {
        if (q > 0) u -= t1 * r;
        u_p += t1;
      } else {
        const double t = std::min(t1, t2);
        x += t * z;
        if (q > 0) u -= t * r;
        u_p += t;
        if (t2 <= t1) {
          active.push_back(p);
          u.conservativeResize(q + 1);
          u[q] = u_p;
          break;
        }
      }
      // Partial step: drop the blocking constraint and retry.
      active.erase(active.begin() + drop);
      Vector kept(q - 1);
      for (Eigen::Index j = 0, k = 0; j < q; ++j) {
        if (j != drop) kept[k++] = u[j];
      }
      u = kept;
    }
  }
  return finish(Status::iteration_limit, "iteration limit reached");
}

ViolationOracle explicit_oracle(Matrix normals, Vector rhs, double tol) {
  require(normals.rows() == rhs.size(), "constraint list dimension mismatch");
  return [normals = std::move(normals), rhs = std::move(rhs), tol](const Vector& x) -> std::optional<Constraint> {
    if (normals.rows() == 0) return std::nullopt;
    const Vector slack = normals * x - rhs;
    Eigen::Index worst = -1;
    double worst_val = 0.0;
    for (Eigen::Index i = 0; i < slack.size(); ++i) {
      const double scaled = slack[i] / std::max(1.0, normals.row(i).norm());
      if (scaled < -tol && scaled < worst_val) {
        worst_val = scaled;
        worst = i;
      }
    }
    if (worst < 0) return std::nullopt;
    return Constraint{normals.row(worst).transpose(), rhs[worst], static_cast<int>(worst)};
  };
}

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::iteration_limit: return "max_iter";
  }
  return "unknown";
}

}  // namespace rosets::qp
