#pragma once

// The sampler: prior-preconditioned MALA per latent field,
// Metropolis-within-Gibbs random walks for scalar blocks and
// hyperparameters, Robbins-Monro step adaptation, and chain diagnostics.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "arrival/model.hpp"
#include "arrival/rng.hpp"

namespace arrival {

// Covariance operator used to pre-whiten MALA proposals. The sampler
// applies each field's Vecchia prior covariance through its sparse factor.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual int dim() const = 0;
  virtual void cov_apply(const std::vector<double>& g, std::vector<double>* y) const = 0;
  virtual void cov_sqrt_apply(const std::vector<double>& eps, std::vector<double>* y) const = 0;
  virtual double quad_form(const std::vector<double>& r) const = 0;  // r' Cov^{-1} r
  virtual double log_det_cov() const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  explicit IdentityPreconditioner(int n) : n_(n) {}
  int dim() const override { return n_; }
  void cov_apply(const std::vector<double>& g, std::vector<double>* y) const override { *y = g; }
  void cov_sqrt_apply(const std::vector<double>& e, std::vector<double>* y) const override { *y = e; }
  double quad_form(const std::vector<double>& r) const override {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
  }
  double log_det_cov() const override { return 0.0; }

 private:
  int n_;
};

class VecchiaPreconditioner final : public Preconditioner {
 public:
  explicit VecchiaPreconditioner(const VecchiaFactor& f) : f_(&f) {}
  int dim() const override { return f_->dim(); }
  void cov_apply(const std::vector<double>& g, std::vector<double>* y) const override {
    f_->cov_apply(g, y);
  }
  void cov_sqrt_apply(const std::vector<double>& e, std::vector<double>* y) const override {
    f_->cov_sqrt_apply(e, y);
  }
  double quad_form(const std::vector<double>& r) const override { return f_->quad_form(r); }
  double log_det_cov() const override { return f_->log_det_cov(); }

 private:
  const VecchiaFactor* f_;
};

struct MalaProposal {
  std::vector<double> x;
  double log_q_forward;
};

// x* = x + (step^2/2) W grad + step W^{1/2} eps.
MalaProposal mala_propose(const std::vector<double>& x, const std::vector<double>& grad,
                          double step, const Preconditioner& W, RngStream* rng);

// log N(to; from + (step^2/2) W grad_at_from, step^2 W). The reverse
// proposal density must be evaluated with the gradient at the proposal.
double mala_log_density(const std::vector<double>& from, const std::vector<double>& to,
                        const std::vector<double>& grad_at_from, double step,
                        const Preconditioner& W);

struct MalaStepResult {
  bool accepted = false;
  bool nonfinite_gradient = false;
};

// One MALA update with MH correction. log_post(x) -> double; grad(x, *g)
// -> bool (false flags a non-finite gradient and rejects the move without
// proposing). When center_after is set, an accepted state is re-centered
// (sum-to-zero projection) and the cached posterior recomputed.
MalaStepResult mala_step(std::vector<double>* x, double* cached_log_post, double step,
                         const Preconditioner& W, RngStream* rng,
                         const std::function<double(const std::vector<double>&)>& log_post,
                         const std::function<bool(const std::vector<double>&, std::vector<double>*)>& grad,
                         bool center_after);

// Joint log-scale random walk on (sd, range), accepted against the field's
// Vecchia prior density plus the PC hyperprior. delta_log_posterior is the
// change those two terms contribute to the joint posterior (0 on rejection).
struct HyperUpdate {
  GpHyper hyper;
  bool accepted = false;
  double delta_log_posterior = 0.0;
};
HyperUpdate hyper_random_walk_update(const std::vector<double>& field,
                                     const VecchiaGeometry& geo,
                                     const VecchiaFactor& current_factor,
                                     const PcCalibration& pc, double step, RngStream* rng);

// Robbins-Monro scale adaptation, frozen after the horizon:
// log step' = log step + t^{-0.6} (acceptance - target).
class StepAdapter {
 public:
  StepAdapter(double initial_step, double target, long long horizon)
      : step_(initial_step), target_(target), horizon_(horizon) {}
  double step() const { return step_; }
  // acceptance: an indicator (0/1) or a recent acceptance rate
  void update(double acceptance);

 private:
  double step_;
  double target_;
  long long horizon_;
  long long t_ = 0;
  bool warned_ = false;
};

struct EssResult {
  double ess = 0.0;
  bool degenerate = false;  // constant series
};
// n / (1 + 2 sum rho_t) with Geyer initial-positive-sequence truncation,
// capped at n. Series must have at least 10 entries.
EssResult effective_sample_size(const std::vector<double>& series);

inline constexpr int kNumBlocks = kNumFields + kNumScalarBlocks + kNumFields;  // 13
std::array<const char*, kNumBlocks> block_names();

struct ChainConfig {
  long long iterations = 20000;
  long long burn_in = 15000;
  long long thin = 4;
  uint64_t seed = 1;
  long long adapt_horizon = -1;  // -1: adapt through the burn-in
  double target_accept_mala = 0.57;
  double target_accept_rw = 0.30;
  double init_step_field = 0.3;
  double init_step_scalar = 0.1;
  double init_step_hyper = 0.4;
  // Staged initialisation: short chains fit each model component
  // separately first and their final values seed the full chain.
  bool staged_init = true;
  long long staged_iterations = 2000;

  void validate() const;
};

struct TraceRow {
  long long iteration = 0;
  double log_posterior = 0.0;
  std::array<int8_t, kNumBlocks> accepted{};  // -1 when a block never ran
  std::array<double, kNumScalars> scalars{};
  std::array<GpHyper, kNumFields> hyper{};
};

struct ChainOutput {
  std::vector<LatentState> draws;  // thinned, post burn-in
  std::vector<TraceRow> trace;     // every iteration of the main chain
  std::array<double, kNumBlocks> accept_rate{};  // post burn-in
  std::array<double, kNumBlocks> final_step{};
  std::array<double, kNumScalars> scalar_ess{};
  uint64_t seed = 0;
  long long iterations = 0, burn_in = 0, thin = 0;
};

// Fixed sweep per iteration: x_pref, x_year, x_niche, x_gev_mu,
// x_gev_sigma, three scalar blocks, five hyper blocks. Deterministic
// given the seed.
ChainOutput run_chain(const Model& model, const ChainConfig& config);

}  // namespace arrival
