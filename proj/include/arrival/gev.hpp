#pragma once

// Generalised extreme-value kernel: distribution function, quantiles,
// log-density with analytic gradients, and the first-arrival day
// transform z = -log(day/366).

namespace arrival {

struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;  // > 0
  double xi = 0.0;
};

// Below this |xi| the Gumbel formulas take over.
inline constexpr double kGevGumbelEps = 1e-10;
// Below this |xi| the xi-gradient uses its series expansion about xi = 0
// (the direct formula cancels catastrophically there).
inline constexpr double kGevXiSeriesEps = 1e-5;

// F(z); 0 below a finite lower endpoint (xi > 0), 1 above a finite upper
// endpoint (xi < 0). Throws on sigma <= 0.
double gev_cdf(double z, const GevParams& p);

// F^{-1}(q) for q in (0,1). Throws on q outside (0,1) or sigma <= 0.
double gev_quantile(double q, const GevParams& p);

struct GevLogpdf {
  double logpdf;  // -inf outside the support
  double d_mu;
  double d_logsigma;
  double d_xi;
  bool in_support;
};

// Log-density and partials with respect to (mu, log sigma, xi). Outside
// the support: logpdf = -inf, in_support = false, gradients zeroed; the
// sampler treats such states as zero-probability rather than erroring.
GevLogpdf gev_logpdf_grad(double z, const GevParams& p);

// day in (0, 366] -> z >= 0, strictly decreasing; inverses of each other.
double date_to_z(double day);
double z_to_day(double z);

}  // namespace arrival
