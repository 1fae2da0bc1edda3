#include "arrival/gev.hpp"

#include <cmath>
#include <limits>

#include "arrival/common.hpp"

namespace arrival {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_sigma(const GevParams& p) {
  if (!(p.sigma > 0.0)) throw ValidationError(cat("gev: sigma must be positive, got ", p.sigma));
}
}  // namespace

double gev_cdf(double z, const GevParams& p) {
  check_sigma(p);
  const double w = (z - p.mu) / p.sigma;
  if (std::abs(p.xi) < kGevGumbelEps) {
    return std::exp(-std::exp(-w));
  }
  const double u = 1.0 + p.xi * w;
  if (u <= 0.0) return p.xi > 0.0 ? 0.0 : 1.0;
  // u^{-1/xi} via log1p keeps precision for small xi*w
  return std::exp(-std::exp(-std::log1p(p.xi * w) / p.xi));
}

double gev_quantile(double q, const GevParams& p) {
  check_sigma(p);
  if (!(q > 0.0 && q < 1.0))
    throw ValidationError(cat("gev_quantile: q must lie in (0,1), got ", q));
  const double loglog = std::log(-std::log(q));
  if (std::abs(p.xi) < kGevGumbelEps) {
    return p.mu - p.sigma * loglog;
  }
  // ((-log q)^{-xi} - 1)/xi, written with expm1 so it is smooth in xi
  return p.mu + p.sigma * std::expm1(-p.xi * loglog) / p.xi;
}

GevLogpdf gev_logpdf_grad(double z, const GevParams& p) {
  check_sigma(p);
  GevLogpdf out{-kInf, 0.0, 0.0, 0.0, false};
  const double w = (z - p.mu) / p.sigma;
  const double xi = p.xi;

  if (std::abs(xi) < kGevGumbelEps) {
    const double emw = std::exp(-w);
    out.logpdf = -std::log(p.sigma) - w - emw;
    out.d_mu = (1.0 - emw) / p.sigma;
    out.d_logsigma = -1.0 + w * (1.0 - emw);
    // xi -> 0 limit of d/dxi, including the O(xi) term (zero here)
    out.d_xi = -w + 0.5 * w * w * (1.0 - emw);
    out.in_support = true;
    return out;
  }

  const double u = 1.0 + xi * w;
  if (u <= 0.0) return out;  // support violation: -inf, no gradient

  const double logu = std::log1p(xi * w);
  const double t = std::exp(-logu / xi);  // u^{-1/xi}
  out.logpdf = -std::log(p.sigma) - (1.0 + 1.0 / xi) * logu - t;
  out.in_support = true;

  const double tu = t / u;  // u^{-1/xi - 1}
  out.d_mu = ((1.0 + xi) / u - tu) / p.sigma;
  out.d_logsigma = -1.0 + w * ((1.0 + xi) / u - tu);

  if (std::abs(xi) < kGevXiSeriesEps) {
    // series about xi = 0; the exact expression loses ~2/xi digits there
    const double emw = std::exp(-w);
    const double w2 = w * w, w3 = w2 * w, w4 = w2 * w2;
    out.d_xi = -w + 0.5 * w2 * (1.0 - emw) +
               xi * (w2 - 2.0 * w3 / 3.0 - emw * (0.25 * w4 - 2.0 * w3 / 3.0));
  } else {
    const double a = logu / (xi * xi);
    out.d_xi = a - (1.0 + 1.0 / xi) * (w / u) - t * (a - w / (xi * u));
  }
  return out;
}

double date_to_z(double day) {
  if (!(day > 0.0)) throw ValidationError(cat("date_to_z: day must be positive, got ", day));
  if (day > 366.0) throw ValidationError(cat("date_to_z: day exceeds 366: ", day));
  return -std::log(day / 366.0);
}

double z_to_day(double z) { return 366.0 * std::exp(-z); }

}  // namespace arrival
