#include "arrival/counts.hpp"

#include <cmath>
#include <limits>

#include "arrival/common.hpp"

namespace arrival {

CountTerm poisson_loglik_grad(long long n, double x) {
  if (n < 0) throw ValidationError(cat("poisson: negative count ", n));
  const double lambda = std::exp(x);
  const double n_d = static_cast<double>(n);
  return {n_d * x - lambda - std::lgamma(n_d + 1.0), n_d - lambda};
}

CountTerm binomial_cloglog_loglik_grad(long long n, long long trials, double x) {
  if (n < 0) throw ValidationError(cat("binomial: negative count ", n));
  if (n > trials)
    throw ValidationError(cat("binomial: observed ", n, " exceeds trials ", trials));
  const double eta = std::exp(x);             // latent Poisson intensity
  const double p = -std::expm1(-eta);         // 1 - exp(-eta)
  const double n_d = static_cast<double>(n);
  const double m_d = static_cast<double>(trials - n);

  const double logchoose = std::lgamma(static_cast<double>(trials) + 1.0) -
                           std::lgamma(n_d + 1.0) - std::lgamma(m_d + 1.0);
  if (n > 0 && p <= 0.0) {
    return {-std::numeric_limits<double>::infinity(), 0.0};
  }
  const double logp = (n > 0) ? std::log(p) : 0.0;
  const double loglik = logchoose + n_d * logp - m_d * eta;
  // d/dx [n log p - (N-n) eta] with dp/dx = eta exp(-eta)
  const double grad = eta * ((n > 0 ? n_d * std::exp(-eta) / p : 0.0) - m_d);
  return {loglik, grad};
}

}  // namespace arrival
