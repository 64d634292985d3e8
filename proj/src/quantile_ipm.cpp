#include "rosets/quantile_ipm.hpp"

#include <algorithm>
#include <cmath>

namespace rosets {

namespace {

// Largest step in (0, 1] keeping v + step * dv >= 0.
double max_step(const Vector& v, const Vector& dv) {
  double step = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) step = std::min(step, -v[i] / dv[i]);
  }
  return step;
}

struct Direction {
  Vector da, dy, dz, dw;
};

class NewtonSystem {
 public:
  NewtonSystem(const Matrix& x, const Vector& a, const Vector& s, const Vector& z, const Vector& w)
      : x_(x), a_(a), s_(s), z_(z), w_(w) {
    theta_ = ((z.array() / a.array()) + (w.array() / s.array())).inverse().matrix();
    const Matrix m = x.transpose() * theta_.asDiagonal() * x;
    llt_.compute(m);
  }

  Direction solve(const Vector& rp, const Vector& rd, const Vector& rz, const Vector& rw) const {
    const Vector rho = (rd.array() - rz.array() / a_.array() + rw.array() / s_.array()).matrix();
    const Vector rhs = rp + x_.transpose() * (theta_.cwiseProduct(rho));
    Direction d;
    d.dy = llt_.solve(rhs);
    d.da = theta_.cwiseProduct(x_ * d.dy - rho);
    d.dz = ((rz.array() - z_.array() * d.da.array()) / a_.array()).matrix();
    d.dw = ((rw.array() + w_.array() * d.da.array()) / s_.array()).matrix();
    return d;
  }

 private:
  const Matrix& x_;
  const Vector& a_;
  const Vector& s_;
  const Vector& z_;
  const Vector& w_;
  Vector theta_;
  Eigen::LDLT<Matrix> llt_;
};

}  // namespace

QuantileIpmResult quantile_regression_ipm(const Matrix& features, const Vector& labels, double tau,
                                          double gap_tol, int max_iterations) {
  require(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1)");
  require(features.rows() == labels.size() && features.rows() >= 1, "quantile data mismatch");
  const Eigen::Index n = features.rows();
  const Matrix& x = features;
  const Vector c = -labels;
  const Vector b = (1.0 - tau) * x.transpose() * Vector::Ones(n);

  Vector a = Vector::Constant(n, 1.0 - tau);
  Vector s = Vector::Constant(n, tau);
  Vector y = x.colPivHouseholderQr().solve(c);
  Vector r = c - x * y;
  const double kappa = 0.1 * r.cwiseAbs().mean() + 1e-8 * (1.0 + labels.cwiseAbs().maxCoeff());
  Vector z = (r.array().max(0.0) + kappa).matrix();
  Vector w = z - r;

  QuantileIpmResult out;
  const double scale = 1.0 + labels.cwiseAbs().sum();
  for (out.iterations = 0; out.iterations < max_iterations; ++out.iterations) {
    const Vector rp = b - x.transpose() * a;
    const Vector rd = c - x * y - z + w;
    const double gap = a.dot(z) + s.dot(w);
    out.duality_gap = gap;
    if (gap <= gap_tol * scale && rp.norm() <= 1e-9 * (1.0 + b.norm()) &&
        rd.norm() <= 1e-9 * (1.0 + c.norm())) {
      out.converged = true;
      break;
    }
    const double mu = gap / (2.0 * static_cast<double>(n));

    const NewtonSystem sys(x, a, s, z, w);
    const Vector rz_aff = -a.cwiseProduct(z);
    const Vector rw_aff = -s.cwiseProduct(w);
    const Direction aff = sys.solve(rp, rd, rz_aff, rw_aff);

    const double ap_aff = std::min(max_step(a, aff.da), max_step(s, -aff.da));
    const double ad_aff = std::min(max_step(z, aff.dz), max_step(w, aff.dw));
    const double mu_aff = ((a + ap_aff * aff.da).dot(z + ad_aff * aff.dz) +
                           (s - ap_aff * aff.da).dot(w + ad_aff * aff.dw)) /
                          (2.0 * static_cast<double>(n));
    const double sigma = std::pow(mu_aff / mu, 3.0);

    const Vector rz = (sigma * mu - (a.array() * z.array()) - aff.da.array() * aff.dz.array()).matrix();
    const Vector rw = (sigma * mu - (s.array() * w.array()) + aff.da.array() * aff.dw.array()).matrix();
    const Direction dir = sys.solve(rp, rd, rz, rw);

    const double ap = std::min(1.0, 0.99995 * std::min(max_step(a, dir.da), max_step(s, -dir.da)));
    const double ad = std::min(1.0, 0.99995 * std::min(max_step(z, dir.dz), max_step(w, dir.dw)));
    a += ap * dir.da;
    s -= ap * dir.da;
    y += ad * dir.dy;
    z += ad * dir.dz;
    w += ad * dir.dw;
  }
  out.coefficients = -y;
  return out;
}

}  // namespace rosets
