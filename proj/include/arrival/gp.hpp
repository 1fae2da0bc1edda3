#pragma once

// Latent Gaussian field machinery: exponential covariance, maximin
// ordering, nearest-neighbour conditioning sets, the sparse conditional
// factor (log-density, gradient, sampling, covariance products), and the
// penalised-complexity hyperprior.

#include <vector>

#include "arrival/rng.hpp"

namespace arrival {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct GpHyper {
  double sd = 1.0;     // sigma > 0
  double range = 1.0;  // kappa > 0; km for spatial fields, years for temporal
};

// sigma^2 exp(-d / kappa)
double exp_cov(double distance, const GpHyper& h);

// First point is the one nearest the centroid; each next point maximises
// its minimum distance to the points already ordered. Ties break on the
// lower original index. Throws on duplicate coordinates.
std::vector<int> maximin_ordering(const std::vector<Point2>& pts);

// cond_sets[i] = up to k nearest previously-ordered points (positions in
// the ordering), nearest first; ties break on the smaller original index.
std::vector<std::vector<int>> build_conditioning(const std::vector<int>& ordering,
                                                 const std::vector<Point2>& pts,
                                                 int k);

// Geometry-only part of the approximation, computed once per model fit.
struct VecchiaGeometry {
  std::vector<Point2> points;
  std::vector<int> ordering;
  std::vector<std::vector<int>> cond_sets;

  static VecchiaGeometry build(std::vector<Point2> pts, int k);
};

// Ordering and conditioning sets are geometry-only and built once; the
// factor itself is rebuilt whenever (sd, range) change.
class VecchiaFactor {
 public:
  VecchiaFactor() = default;

  // Throws NumericError when a conditional variance is not positive.
  static VecchiaFactor build(const std::vector<int>& ordering,
                             const std::vector<std::vector<int>>& cond_sets,
                             const std::vector<Point2>& pts,
                             const GpHyper& h);
  static VecchiaFactor build(const VecchiaGeometry& geo, const GpHyper& h);

  int dim() const { return static_cast<int>(ordering_.size()); }
  const std::vector<int>& ordering() const { return ordering_; }
  const GpHyper& hyper() const { return hyper_; }

  // log N(x; 0, Cov) under the factorised approximation.
  double log_density(const std::vector<double>& x) const;
  // gradient of log_density, i.e. -Precision * x; O(D k).
  void gradient(const std::vector<double>& x, std::vector<double>* grad) const;
  // r' Precision r
  double quad_form(const std::vector<double>& r) const;
  // log |Cov| = sum of log conditional variances
  double log_det_cov() const;

  // Exact draw from the implied joint via forward substitution.
  void sample(RngStream* rng, std::vector<double>* x) const;
  // y = Cov^{1/2} eps for iid standard normal eps (the sampling map).
  void cov_sqrt_apply(const std::vector<double>& eps, std::vector<double>* y) const;
  // y = Cov * g via two sparse triangular passes; O(D k).
  void cov_apply(const std::vector<double>& g, std::vector<double>* y) const;

 private:
  std::vector<int> ordering_;              // position -> original index
  std::vector<int> position_;              // original index -> position
  std::vector<std::vector<int>> parents_;  // per position: conditioning positions
  std::vector<std::vector<double>> coeff_; // regression coefficients b_i
  std::vector<double> cond_var_;           // conditional variances v_i > 0
  // reverse adjacency for the transposed solve: per position, the list of
  // (row, slot) pairs where that position appears as a parent
  std::vector<std::vector<std::pair<int, int>>> children_;
  GpHyper hyper_;

  void residuals(const std::vector<double>& x, std::vector<double>* r) const;
};

struct PcCalibration {
  double range0 = 40.0;     // kappa_0
  double alpha_range = 0.05;  // P(kappa < kappa_0)
  double sd0 = 3.0;         // sigma_0
  double alpha_sd = 0.05;   // P(sigma > sigma_0)

  double lambda_range() const;  // -log(alpha_range) * range0
  double lambda_sd() const;     // -log(alpha_sd) / sd0
  // Marginal medians, used as chain initial values.
  double median_range() const;
  double median_sd() const;
};

// log pi(kappa, sigma) = log(l1 l2) - 2 log kappa - l1/kappa - l2 sigma.
double pc_prior_logdensity(const GpHyper& h, const PcCalibration& c);

// Subtracts the mean; idempotent.
void center_field(std::vector<double>* x);

}  // namespace arrival
