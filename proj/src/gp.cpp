#include "arrival/gp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "arrival/common.hpp"

namespace arrival {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

double dist(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}
}  // namespace

double exp_cov(double distance, const GpHyper& h) {
  if (distance < 0.0) throw ValidationError("exp_cov: negative distance");
  if (!(h.sd > 0.0 && h.range > 0.0))
    throw ValidationError(cat("exp_cov: hyperparameters must be positive (sd=", h.sd,
                              ", range=", h.range, ")"));
  return h.sd * h.sd * std::exp(-distance / h.range);
}

std::vector<int> maximin_ordering(const std::vector<Point2>& pts) {
  const int n = static_cast<int>(pts.size());
  if (n == 0) throw ValidationError("maximin_ordering: no locations");

  Point2 centroid{0.0, 0.0};
  for (const auto& p : pts) {
    centroid.x += p.x;
    centroid.y += p.y;
  }
  centroid.x /= n;
  centroid.y /= n;

  int first = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    double d = dist(pts[i], centroid);
    if (d < best) {
      best = d;
      first = i;
    }
  }

  std::vector<int> order;
  order.reserve(n);
  order.push_back(first);
  // min distance from each unordered point to the ordered set
  std::vector<double> min_dist(n);
  for (int i = 0; i < n; ++i) min_dist[i] = dist(pts[i], pts[first]);
  std::vector<char> taken(n, 0);
  taken[first] = 1;

  for (int step = 1; step < n; ++step) {
    int next = -1;
    double far = -1.0;
    for (int i = 0; i < n; ++i) {
      if (taken[i]) continue;
      if (min_dist[i] > far) {
        far = min_dist[i];
        next = i;
      }
    }
    if (far == 0.0)
      throw ValidationError("maximin_ordering: duplicate coordinates");
    taken[next] = 1;
    order.push_back(next);
    for (int i = 0; i < n; ++i) {
      if (taken[i]) continue;
      min_dist[i] = std::min(min_dist[i], dist(pts[i], pts[next]));
    }
  }
  return order;
}

std::vector<std::vector<int>> build_conditioning(const std::vector<int>& ordering,
                                                 const std::vector<Point2>& pts,
                                                 int k) {
  if (k < 1) throw ValidationError(cat("build_conditioning: k must be >= 1, got ", k));
  const int n = static_cast<int>(ordering.size());
  std::vector<std::vector<int>> cond(n);
  for (int i = 1; i < n; ++i) {
    const Point2& here = pts[ordering[i]];
    const int m = std::min(i, k);
    // (distance, original index, position): original index breaks ties
    std::vector<std::tuple<double, int, int>> cand;
    cand.reserve(i);
    for (int j = 0; j < i; ++j)
      cand.emplace_back(dist(here, pts[ordering[j]]), ordering[j], j);
    std::partial_sort(cand.begin(), cand.begin() + m, cand.end());
    cond[i].reserve(m);
    for (int j = 0; j < m; ++j) cond[i].push_back(std::get<2>(cand[j]));
  }
  return cond;
}

VecchiaGeometry VecchiaGeometry::build(std::vector<Point2> pts, int k) {
  VecchiaGeometry geo;
  geo.ordering = maximin_ordering(pts);
  geo.cond_sets = build_conditioning(geo.ordering, pts, k);
  geo.points = std::move(pts);
  return geo;
}

VecchiaFactor VecchiaFactor::build(const VecchiaGeometry& geo, const GpHyper& h) {
  return build(geo.ordering, geo.cond_sets, geo.points, h);
}

VecchiaFactor VecchiaFactor::build(const std::vector<int>& ordering,
                                   const std::vector<std::vector<int>>& cond_sets,
                                   const std::vector<Point2>& pts,
                                   const GpHyper& h) {
  const int n = static_cast<int>(ordering.size());
  VecchiaFactor f;
  f.ordering_ = ordering;
  f.hyper_ = h;
  f.position_.assign(pts.size(), -1);
  for (int i = 0; i < n; ++i) f.position_[ordering[i]] = i;
  f.parents_ = cond_sets;
  f.coeff_.resize(n);
  f.cond_var_.resize(n);
  f.children_.assign(n, {});

  const double marginal = h.sd * h.sd;
  for (int i = 0; i < n; ++i) {
    const auto& par = f.parents_[i];
    const int m = static_cast<int>(par.size());
    if (m == 0) {
      f.cond_var_[i] = marginal;
      continue;
    }
    Eigen::MatrixXd css(m, m);
    Eigen::VectorXd csi(m);
    const Point2& here = pts[ordering[i]];
    for (int a = 0; a < m; ++a) {
      const Point2& pa = pts[ordering[par[a]]];
      csi(a) = exp_cov(dist(here, pa), h);
      for (int b = 0; b <= a; ++b) {
        const Point2& pb = pts[ordering[par[b]]];
        css(a, b) = css(b, a) = exp_cov(dist(pa, pb), h);
      }
    }
    Eigen::VectorXd b = css.ldlt().solve(csi);
    const double v = marginal - csi.dot(b);
    if (!(v > 0.0) || !b.allFinite())
      throw NumericError(cat("vecchia factor: non-positive conditional variance at ordered index ",
                             i, " (v=", v, "); duplicate or near-duplicate locations?"));
    f.coeff_[i].assign(b.data(), b.data() + m);
    f.cond_var_[i] = v;
    for (int a = 0; a < m; ++a) f.children_[par[a]].emplace_back(i, a);
  }
  return f;
}

void VecchiaFactor::residuals(const std::vector<double>& x, std::vector<double>* r) const {
  const int n = dim();
  if (static_cast<int>(x.size()) != n)
    throw ValidationError(cat("vecchia: field length ", x.size(), " != ", n));
  r->resize(n);
  for (int i = 0; i < n; ++i) {
    double mean = 0.0;
    const auto& par = parents_[i];
    const auto& b = coeff_[i];
    for (size_t a = 0; a < par.size(); ++a) mean += b[a] * x[ordering_[par[a]]];
    (*r)[i] = x[ordering_[i]] - mean;
  }
}

double VecchiaFactor::log_density(const std::vector<double>& x) const {
  std::vector<double> r;
  residuals(x, &r);
  double out = 0.0;
  for (int i = 0; i < dim(); ++i)
    out += -0.5 * (kLog2Pi + std::log(cond_var_[i]) + r[i] * r[i] / cond_var_[i]);
  return out;
}

void VecchiaFactor::gradient(const std::vector<double>& x, std::vector<double>* grad) const {
  std::vector<double> r;
  residuals(x, &r);
  grad->assign(dim(), 0.0);
  for (int i = 0; i < dim(); ++i) {
    const double e = r[i] / cond_var_[i];
    (*grad)[ordering_[i]] -= e;
    const auto& par = parents_[i];
    const auto& b = coeff_[i];
    for (size_t a = 0; a < par.size(); ++a) (*grad)[ordering_[par[a]]] += b[a] * e;
  }
}

double VecchiaFactor::quad_form(const std::vector<double>& v) const {
  std::vector<double> r;
  residuals(v, &r);
  double out = 0.0;
  for (int i = 0; i < dim(); ++i) out += r[i] * r[i] / cond_var_[i];
  return out;
}

double VecchiaFactor::log_det_cov() const {
  double out = 0.0;
  for (double v : cond_var_) out += std::log(v);
  return out;
}

void VecchiaFactor::cov_sqrt_apply(const std::vector<double>& eps, std::vector<double>* y) const {
  const int n = dim();
  if (static_cast<int>(eps.size()) != n)
    throw ValidationError("vecchia: noise length mismatch");
  y->assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double mean = 0.0;
    const auto& par = parents_[i];
    const auto& b = coeff_[i];
    for (size_t a = 0; a < par.size(); ++a) mean += b[a] * (*y)[ordering_[par[a]]];
    (*y)[ordering_[i]] = mean + std::sqrt(cond_var_[i]) * eps[i];
  }
}

void VecchiaFactor::sample(RngStream* rng, std::vector<double>* x) const {
  std::vector<double> eps(dim());
  for (double& e : eps) e = rng->normal();
  cov_sqrt_apply(eps, x);
}

void VecchiaFactor::cov_apply(const std::vector<double>& g, std::vector<double>* y) const {
  const int n = dim();
  if (static_cast<int>(g.size()) != n)
    throw ValidationError("vecchia: vector length mismatch");
  // Precision = A' V^{-1} A with A unit lower-triangular in ordered space,
  // so Cov * g = A^{-1} V A^{-T} g: transposed backward pass, scale, forward pass.
  std::vector<double> t(n);
  for (int i = n - 1; i >= 0; --i) {
    double acc = g[ordering_[i]];
    for (const auto& [row, slot] : children_[i]) acc += coeff_[row][slot] * t[row];
    t[i] = acc;
  }
  y->assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double mean = 0.0;
    const auto& par = parents_[i];
    const auto& b = coeff_[i];
    for (size_t a = 0; a < par.size(); ++a) mean += b[a] * (*y)[ordering_[par[a]]];
    (*y)[ordering_[i]] = mean + cond_var_[i] * t[i];
  }
}

double PcCalibration::lambda_range() const { return -std::log(alpha_range) * range0; }
double PcCalibration::lambda_sd() const { return -std::log(alpha_sd) / sd0; }
double PcCalibration::median_range() const { return lambda_range() / std::log(2.0); }
double PcCalibration::median_sd() const { return std::log(2.0) / lambda_sd(); }

double pc_prior_logdensity(const GpHyper& h, const PcCalibration& c) {
  if (!(h.sd > 0.0 && h.range > 0.0))
    throw ValidationError("pc_prior: hyperparameters must be positive");
  if (!(c.range0 > 0.0 && c.sd0 > 0.0 && c.alpha_range > 0.0 && c.alpha_range < 1.0 &&
        c.alpha_sd > 0.0 && c.alpha_sd < 1.0))
    throw ValidationError("pc_prior: invalid calibration");
  const double l1 = c.lambda_range();
  const double l2 = c.lambda_sd();
  return std::log(l1 * l2) - 2.0 * std::log(h.range) - l1 / h.range - l2 * h.sd;
}

void center_field(std::vector<double>* x) {
  if (x->empty()) throw ValidationError("center_field: empty field");
  double mean = std::accumulate(x->begin(), x->end(), 0.0) / x->size();
  for (double& v : *x) v -= mean;
}

}  // namespace arrival
