#pragma once

// Count-data log-likelihood terms and their predictor gradients.

namespace arrival {

struct CountTerm {
  double loglik;
  double d_predictor;
};

// Poisson with log link: x is the log-intensity.
CountTerm poisson_loglik_grad(long long n, double x);

// Binomial with complementary log-log link: p = 1 - exp(-exp(x)), the
// probability of at least one count under a Poisson with intensity e^x.
CountTerm binomial_cloglog_loglik_grad(long long n, long long trials, double x);

}  // namespace arrival
