#include "rosets/usets.hpp"

#include "rosets/distributions.hpp"
#include "rosets/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rosets {

GoodModelSet::GoodModelSet(std::shared_ptr<const Dataset> data, LinearModel reference, Loss loss,
                           double threshold)
    : data_(std::move(data)),
      reference_(std::move(reference)),
      loss_(loss),
      threshold_(threshold),
      reference_loss_(0.0) {
  require(data_ != nullptr, "good-model set needs data");
  require(reference_.dim() == data_->dim(), "reference model dimension mismatch");
  require(std::isfinite(threshold_), "threshold must be finite");
  reference_loss_ = empirical_loss(reference_, *data_, loss_);
  require(threshold_ >= reference_loss_ - 1e-9,
          "threshold is below the reference model's loss, so the set would be empty");
}

namespace {

double pinball_sum(const Vector& residuals, double tau) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i) total += pinball_loss(residuals[i], tau);
  return total;
}

}  // namespace

struct Extremizer::Impl {
  GoodModelSet gset;
  ExtremizeOptions options;

  // Squared loss: ellipsoid (b - center)^T G (b - center) <= radius_sq.
  Eigen::LLT<Matrix> gram;
  Vector center;
  double radius_sq = 0.0;

  // Pinball loss: total-loss budget and box half-width.
  double budget = 0.0;
  double box = 0.0;

  Impl(const GoodModelSet& g, const ExtremizeOptions& o) : gset(g), options(o) {
    const Matrix& x = gset.data().features();
    const Vector& y = gset.data().labels();
    const double n = static_cast<double>(gset.data().size());
    if (gset.loss().kind == Loss::Kind::squared) {
      Matrix g_mat = x.transpose() * x;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(g_mat, Eigen::EigenvaluesOnly);
      const double top = std::max(eig.eigenvalues().maxCoeff(), 0.0);
      if (options.ridge <= 0.0 && eig.eigenvalues().minCoeff() <= 1e-12 * std::max(top, 1e-300)) {
        throw SingularGramError(
            "X^T X is singular; set a positive ridge to extremize over the ridge-regularized "
            "ellipsoid instead");
      }
      g_mat.diagonal().array() += std::max(options.ridge, 0.0);
      gram.compute(g_mat);
      require(gram.info() == Eigen::Success, "Gram factorization failed");
      center = gram.solve(x.transpose() * y);
      const double rss = (x * center - y).squaredNorm();
      const double r = n * gset.threshold() - rss;
      if (r < -1e-9 * std::max(1.0, n * gset.threshold())) {
        throw std::invalid_argument("threshold is below the attainable squared loss");
      }
      radius_sq = std::max(r, 0.0);
    } else {
      const Vector resid = y - x * gset.reference().coefficients();
      budget = std::max(n * gset.threshold(), pinball_sum(resid, gset.loss().tau));
      box = gset.norm_bound() * (1.0 + 1e-9) + 1e-12;
    }
  }

  Extremum squared(const Vector& q) const {
    const Vector solved = gram.solve(q);
    const double quad = std::max(q.dot(solved), 0.0);
    const double spread = std::sqrt(radius_sq * quad);
    const double mid = center.dot(q);
    Extremum out{mid - spread, mid + spread, false, 0.0};
    if (quad > 0.0) {
      const Vector step = std::sqrt(radius_sq / quad) * solved;
      const double limit = gset.norm_bound() + kNormSlack;
      out.norm_active = (center + step).norm() > limit || (center - step).norm() > limit;
    } else {
      out.norm_active = center.norm() > gset.norm_bound() + kNormSlack;
    }
    return out;
  }

  struct Directional {
    double upper;  // certified bound on max c^T b
    double lower;  // attained by a feasible point
    bool norm_active;
  };

  // max c^T b subject to sum_i rho(y_i - x_i^T b) <= budget and |b_j| <= box,
  // by supporting-hyperplane cuts anchored at the reference model.
  Directional maximize_pinball(const Vector& c) const {
    const Matrix& x = gset.data().features();
    const Vector& y = gset.data().labels();
    const double tau = gset.loss().tau;
    const Eigen::Index d = x.cols();
    const Vector anchor = gset.reference().coefficients();
    const Vector anchor_resid = y - x * anchor;

    std::vector<Vector> cut_normals;
    std::vector<double> cut_rhs;
    auto add_cut = [&](const Vector& b, const Vector& resid, double value) {
      Vector g = Vector::Zero(d);
      for (Eigen::Index i = 0; i < resid.size(); ++i) {
        g -= (resid[i] >= 0.0 ? tau : tau - 1.0) * x.row(i).transpose();
      }
      const double scale = g.norm();
      if (scale == 0.0) return;
      cut_normals.push_back(g / scale);
      cut_rhs.push_back((budget - value + g.dot(b)) / scale);
    };
    add_cut(anchor, anchor_resid, pinball_sum(anchor_resid, tau));

    double lower = c.dot(anchor);
    Vector lower_point = anchor;
    double upper = std::numeric_limits<double>::infinity();
    Vector lp_point = anchor;

    for (int iter = 0; iter < options.max_cuts; ++iter) {
      // Shift b = gamma - box so the LP variables are nonnegative.
      const Eigen::Index k = static_cast<Eigen::Index>(cut_normals.size());
      Matrix a = Matrix::Zero(k + d, d);
      Vector rhs(k + d);
      for (Eigen::Index r = 0; r < k; ++r) {
        a.row(r) = cut_normals[static_cast<std::size_t>(r)].transpose();
        rhs[r] = cut_rhs[static_cast<std::size_t>(r)] + box * cut_normals[static_cast<std::size_t>(r)].sum();
      }
      a.bottomRows(d).setIdentity();
      rhs.tail(d).setConstant(2.0 * box);
      const lp::Result res = lp::maximize(c, a, rhs);
      if (res.status != lp::Status::optimal) break;
      lp_point = res.x.array() - box;
      upper = std::min(upper, c.dot(lp_point));

      const Vector lp_resid = y - x * lp_point;
      const double lp_value = pinball_sum(lp_resid, tau);
      if (lp_value <= budget * (1.0 + 1e-12)) {
        lower = std::max(lower, c.dot(lp_point));
        lower_point = lp_point;
        break;
      }

      // Largest feasible step from the anchor toward the LP point.
      const Vector dir_resid = lp_resid - anchor_resid;
      double lo = 0.0;
      double hi = 1.0;
      for (int b = 0; b < 60; ++b) {
        const double mid = 0.5 * (lo + hi);
        if (pinball_sum(anchor_resid + mid * dir_resid, tau) <= budget) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const Vector boundary = anchor + lo * (lp_point - anchor);
      if (c.dot(boundary) > lower) {
        lower = c.dot(boundary);
        lower_point = boundary;
      }
      if (upper - lower <= options.gap_tol * std::max(1.0, std::abs(upper))) break;

      add_cut(lp_point, lp_resid, lp_value);
      const Vector boundary_resid = anchor_resid + lo * dir_resid;
      add_cut(boundary, boundary_resid, pinball_sum(boundary_resid, tau));
    }
    if (!std::isfinite(upper)) upper = lower;
    const double limit = gset.norm_bound() + kNormSlack;
    const bool active = lower_point.norm() > limit || lp_point.norm() > limit ||
                        lp_point.cwiseAbs().maxCoeff() >= gset.norm_bound() * (1.0 - 1e-9);
    return {upper, lower, active};
  }

  Extremum pinball(const Vector& q) const {
    const Directional up = maximize_pinball(q);
    const Directional down = maximize_pinball(-q);
    Extremum out;
    out.sup = up.upper;
    out.inf = -down.upper;
    out.norm_active = up.norm_active || down.norm_active;
    out.gap = std::max(up.upper - up.lower, down.upper - down.lower);
    return out;
  }
};

Extremizer::Extremizer(const GoodModelSet& gset, const ExtremizeOptions& options)
    : impl_(std::make_unique<Impl>(gset, options)) {}
Extremizer::~Extremizer() = default;
Extremizer::Extremizer(Extremizer&&) noexcept = default;
Extremizer& Extremizer::operator=(Extremizer&&) noexcept = default;

Extremum Extremizer::operator()(const Vector& query) const {
  require(static_cast<std::size_t>(query.size()) == impl_->gset.data().dim(),
          "query dimension mismatch");
  return impl_->gset.loss().kind == Loss::Kind::squared ? impl_->squared(query)
                                                        : impl_->pinball(query);
}

Extremum extremize_prediction(const GoodModelSet& gset, const Vector& query,
                              const ExtremizeOptions& options) {
  return Extremizer(gset, options)(query);
}

BoxUncertaintySet build_method1(const IntervalFunction& ifun, const QueryBatch& queries) {
  const Vector centers = ifun.center().predict_rows(queries.features());
  return BoxUncertaintySet(centers.array() - ifun.half_width(), centers.array() + ifun.half_width());
}

BoxUncertaintySet build_method2(const LinearModel& lo_model, const LinearModel& hi_model,
                                const QueryBatch& queries) {
  require(lo_model.dim() == hi_model.dim(), "quantile models disagree on dimension");
  const Vector a = lo_model.predict_rows(queries.features());
  const Vector b = hi_model.predict_rows(queries.features());
  return BoxUncertaintySet(a.cwiseMin(b), a.cwiseMax(b));
}

namespace {

void check_support(const ResidualSupport& r) {
  require(r.half_width >= 0.0 && std::isfinite(r.half_width), "residual half width must be >= 0");
  require(r.miss_prob >= 0.0 && r.miss_prob <= 1.0, "residual miss probability must lie in [0, 1]");
}

std::vector<Extremum> extremize_all(const Extremizer& ext, const QueryBatch& queries,
                                    Execution exec) {
  const Matrix& q = queries.features();
  const int m = static_cast<int>(q.rows());
  std::vector<Extremum> out(static_cast<std::size_t>(m));
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int j = 0; j < m; ++j) out[static_cast<std::size_t>(j)] = ext(q.row(j).transpose());
  } else {
    for (int j = 0; j < m; ++j) out[static_cast<std::size_t>(j)] = ext(q.row(j).transpose());
  }
  return out;
}

}  // namespace

ExtremizedBox build_method3(const GoodModelSet& gset, const QueryBatch& queries,
                            const ResidualSupport& resid, Execution exec,
                            const ExtremizeOptions& options) {
  check_support(resid);
  require(queries.dim() == gset.data().dim(), "query dimension mismatch");
  const Extremizer ext(gset, options);
  std::vector<Extremum> extrema = extremize_all(ext, queries, exec);
  const Eigen::Index m = static_cast<Eigen::Index>(queries.size());
  Vector lower(m), upper(m);
  int active = 0;
  double gap = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const Extremum& e = extrema[static_cast<std::size_t>(j)];
    lower[j] = e.inf - resid.half_width;
    upper[j] = e.sup + resid.half_width;
    active += e.norm_active ? 1 : 0;
    gap = std::max(gap, e.gap);
  }
  return {BoxUncertaintySet(lower, upper), std::move(extrema), active, gap};
}

ExtremizedBox build_method4(const GoodModelSet& gset_p, const GoodModelSet& gset_q,
                            const QueryBatch& queries, const ResidualSupport& resid_p,
                            const ResidualSupport& resid_q, Execution exec,
                            const ExtremizeOptions& options) {
  check_support(resid_p);
  check_support(resid_q);
  require(gset_p.data().dim() == gset_q.data().dim(), "good-model sets disagree on dimension");
  require(queries.dim() == gset_p.data().dim(), "query dimension mismatch");
  const Extremizer ext_p(gset_p, options);
  const Extremizer ext_q(gset_q, options);
  std::vector<Extremum> ep = extremize_all(ext_p, queries, exec);
  std::vector<Extremum> eq = extremize_all(ext_q, queries, exec);
  const double e = std::max(resid_p.half_width, resid_q.half_width);
  const Eigen::Index m = static_cast<Eigen::Index>(queries.size());
  Vector lower(m), upper(m);
  int active = 0;
  double gap = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const Extremum& a = ep[static_cast<std::size_t>(j)];
    const Extremum& b = eq[static_cast<std::size_t>(j)];
    lower[j] = std::min(a.inf, b.inf) - e;
    upper[j] = std::max(a.sup, b.sup) + e;
    active += (a.norm_active ? 1 : 0) + (b.norm_active ? 1 : 0);
    gap = std::max({gap, a.gap, b.gap});
  }
  ep.insert(ep.end(), eq.begin(), eq.end());
  return {BoxUncertaintySet(lower, upper), std::move(ep), active, gap};
}

namespace {

void check_threshold_inputs(double loss_range, double delta) {
  require(loss_range > 0.0, "loss range M must be positive");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
}

double two_n(const Dataset& data) { return 2.0 * static_cast<double>(data.size()); }

}  // namespace

double good_set_threshold_rademacher(const Dataset& data, const LinearModel& reference,
                                     const Loss& loss, double loss_range, double delta,
                                     double rademacher) {
  check_threshold_inputs(loss_range, delta);
  require(rademacher >= 0.0, "Rademacher average must be nonnegative");
  return empirical_loss(reference, data, loss) + 2.0 * rademacher +
         4.0 * loss_range * std::sqrt(std::log(3.0 / delta) / two_n(data));
}

double good_set_threshold_population(const Dataset& data, const LinearModel& reference,
                                     const Loss& loss, double loss_range, double delta,
                                     double population_rademacher) {
  check_threshold_inputs(loss_range, delta);
  require(population_rademacher >= 0.0, "Rademacher average must be nonnegative");
  return empirical_loss(reference, data, loss) + 2.0 * population_rademacher +
         3.0 * loss_range * std::sqrt(std::log(2.0 / delta) / two_n(data));
}

double good_set_threshold_finite(const Dataset& data, const LinearModel& reference,
                                 const Loss& loss, double loss_range, double delta,
                                 std::size_t class_size) {
  check_threshold_inputs(loss_range, delta);
  require(class_size >= 1, "class size must be at least 1");
  const double log2d = std::log(2.0 / delta);
  return empirical_loss(reference, data, loss) +
         loss_range * std::sqrt((std::log(static_cast<double>(class_size)) + log2d) / two_n(data)) +
         loss_range * std::sqrt(log2d / two_n(data));
}

PacBayesSet build_pacbayes_set(const Dataset& data, const std::vector<LinearModel>& models,
                               const Vector& prior, double c, double alpha, const Loss& loss) {
  require(static_cast<std::size_t>(prior.size()) == models.size(),
          "prior length does not match the number of models");
  require(!models.empty(), "PAC-Bayes set needs at least one candidate");
  require((prior.array() >= 0.0).all(), "prior mass must be nonnegative");
  require(std::abs(prior.sum() - 1.0) <= 1e-9, "prior must sum to 1");
  require(c > 0.0 && alpha > 0.0, "C and alpha must be positive");
  const double nc = static_cast<double>(data.size()) * c;
  PacBayesSet out;
  for (std::size_t k = 0; k < models.size(); ++k) {
    const double p = prior[static_cast<Eigen::Index>(k)];
    const double thr = p > 0.0 ? (std::log(p) - alpha) / nc : -std::numeric_limits<double>::infinity();
    const double l = empirical_loss(models[k], data, loss);
    out.thresholds.push_back(thr);
    out.losses.push_back(l);
    if (l <= thr + 1e-12) out.members.push_back(k);
  }
  return out;
}

BoxUncertaintySet box_from_models(const std::vector<LinearModel>& models,
                                  const QueryBatch& queries, const ResidualSupport& resid) {
  require(!models.empty(), "model set is empty");
  check_support(resid);
  Vector lo = models.front().predict_rows(queries.features());
  Vector hi = lo;
  for (std::size_t k = 1; k < models.size(); ++k) {
    const Vector p = models[k].predict_rows(queries.features());
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return BoxUncertaintySet(lo.array() - resid.half_width, hi.array() + resid.half_width);
}

GiBaseline build_gi_baseline(const Dataset& data, std::optional<double> sigma, double delta_e,
                             double confidence, const QueryBatch& queries) {
  require(confidence >= 0.0 && confidence < 1.0, "confidence must lie in [0, 1)");
  require(delta_e > 0.0 && delta_e <= 1.0, "delta_e must lie in (0, 1]");
  require(queries.dim() == data.dim(), "query dimension mismatch");
  const Matrix& x = data.features();
  const Vector& y = data.labels();
  const Matrix g = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(eig.eigenvalues().maxCoeff(), 1e-300)) {
    throw SingularGramError("X^T X is singular; the Gaussian ellipsoid baseline needs full rank");
  }
  const Eigen::LLT<Matrix> llt(g);
  const Vector beta = llt.solve(x.transpose() * y);
  const double d = static_cast<double>(data.dim());
  const double n = static_cast<double>(data.size());

  GiDiagnostics diag;
  diag.coefficients = beta;
  if (sigma.has_value()) {
    require(*sigma >= 0.0 && std::isfinite(*sigma), "sigma must be finite and >= 0");
    diag.sigma = *sigma;
    diag.radius = confidence > 0.0 ? dist::chi_squared_quantile(confidence, d) : 0.0;
  } else {
    require(n > d, "estimating sigma needs more examples than features");
    diag.sigma = std::sqrt((x * beta - y).squaredNorm() / (n - d));
    diag.sigma_estimated = true;
    diag.radius = confidence > 0.0 ? d * dist::f_quantile(confidence, d, n - d) : 0.0;
  }
  diag.half_width = delta_e >= 1.0 ? 0.0 : diag.sigma * dist::normal_quantile(1.0 - delta_e / 2.0);

  const Matrix& q = queries.features();
  const Eigen::Index m = q.rows();
  Vector lower(m), upper(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Vector qj = q.row(j).transpose();
    const double quad = std::max(qj.dot(llt.solve(qj)), 0.0);
    const double spread = std::sqrt(diag.radius * diag.sigma * diag.sigma * quad);
    const double mid = beta.dot(qj);
    lower[j] = mid - spread - diag.half_width;
    upper[j] = mid + spread + diag.half_width;
  }
  return {BoxUncertaintySet(lower, upper), diag};
}

}  // namespace rosets
