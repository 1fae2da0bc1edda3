#include "arrival/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "arrival/common.hpp"

namespace arrival {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

MalaProposal mala_propose(const std::vector<double>& x, const std::vector<double>& grad,
                          double step, const Preconditioner& W, RngStream* rng) {
  const int n = static_cast<int>(x.size());
  if (static_cast<int>(grad.size()) != n || W.dim() != n)
    throw ValidationError("mala_propose: dimension mismatch");

  std::vector<double> drift;
  W.cov_apply(grad, &drift);
  std::vector<double> eps(n);
  for (double& e : eps) e = rng->normal();
  std::vector<double> noise;
  W.cov_sqrt_apply(eps, &noise);

  MalaProposal out;
  out.x.resize(n);
  const double half = 0.5 * step * step;
  for (int i = 0; i < n; ++i) out.x[i] = x[i] + half * drift[i] + step * noise[i];
  out.log_q_forward = mala_log_density(x, out.x, grad, step, W);
  return out;
}

double mala_log_density(const std::vector<double>& from, const std::vector<double>& to,
                        const std::vector<double>& grad_at_from, double step,
                        const Preconditioner& W) {
  const int n = static_cast<int>(from.size());
  std::vector<double> drift;
  W.cov_apply(grad_at_from, &drift);
  std::vector<double> r(n);
  const double half = 0.5 * step * step;
  for (int i = 0; i < n; ++i) r[i] = to[i] - from[i] - half * drift[i];
  return -0.5 * (W.quad_form(r) / (step * step) + n * (kLog2Pi + 2.0 * std::log(step)) +
                 W.log_det_cov());
}

MalaStepResult mala_step(std::vector<double>* x, double* cached_log_post, double step,
                         const Preconditioner& W, RngStream* rng,
                         const std::function<double(const std::vector<double>&)>& log_post,
                         const std::function<bool(const std::vector<double>&, std::vector<double>*)>& grad,
                         bool center_after) {
  std::vector<double> g;
  if (!grad(*x, &g)) return {false, true};
  const MalaProposal prop = mala_propose(*x, g, step, W, rng);
  const double lp_star = log_post(prop.x);
  if (!std::isfinite(lp_star)) return {false, false};

  std::vector<double> g_star;
  if (!grad(prop.x, &g_star)) return {false, false};
  const double log_q_reverse = mala_log_density(prop.x, *x, g_star, step, W);
  const double log_ratio = (lp_star - *cached_log_post) + log_q_reverse - prop.log_q_forward;

  if (std::log(rng->uniform()) < log_ratio) {
    *x = prop.x;
    if (center_after) {
      center_field(x);
      *cached_log_post = log_post(*x);
    } else {
      *cached_log_post = lp_star;
    }
    return {true, false};
  }
  return {false, false};
}

HyperUpdate hyper_random_walk_update(const std::vector<double>& field,
                                     const VecchiaGeometry& geo,
                                     const VecchiaFactor& current_factor,
                                     const PcCalibration& pc, double step, RngStream* rng) {
  const GpHyper cur = current_factor.hyper();
  const GpHyper prop{cur.sd * std::exp(step * rng->normal()),
                     cur.range * std::exp(step * rng->normal())};
  HyperUpdate out{cur, false, 0.0};

  const double cur_lp = current_factor.log_density(field) + pc_prior_logdensity(cur, pc);
  VecchiaFactor cand;
  try {
    cand = VecchiaFactor::build(geo, prop);
  } catch (const NumericError&) {
    return out;  // factorization breakdown under the proposal
  }
  const double prop_lp = cand.log_density(field) + pc_prior_logdensity(prop, pc);
  // symmetric walk in log space: Jacobian ratio sigma* kappa* / (sigma kappa)
  const double log_ratio = prop_lp - cur_lp + std::log(prop.sd / cur.sd) +
                           std::log(prop.range / cur.range);
  if (std::log(rng->uniform()) < log_ratio) {
    out.hyper = prop;
    out.accepted = true;
    out.delta_log_posterior = prop_lp - cur_lp;
  }
  return out;
}

void StepAdapter::update(double acceptance) {
  ++t_;
  if (t_ > horizon_) {
    if (!warned_) {
      warn("step adaptation called past its horizon; step left unchanged");
      warned_ = true;
    }
    return;
  }
  const double gamma = std::pow(static_cast<double>(t_), -0.6);
  step_ *= std::exp(gamma * (acceptance - target_));
}

EssResult effective_sample_size(const std::vector<double>& series) {
  const long long n = static_cast<long long>(series.size());
  if (n < 10) throw ValidationError(cat("ess: series too short (", n, " < 10)"));
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);

  auto autocov = [&](long long lag) {
    double s = 0.0;
    for (long long i = 0; i + lag < n; ++i)
      s += (series[i] - mean) * (series[i + lag] - mean);
    return s / static_cast<double>(n);
  };
  // constant series: variance at rounding-noise level relative to the mean
  const double gamma0 = autocov(0);
  if (gamma0 <= 1e-20 * (1.0 + mean * mean)) return {0.0, true};

  // Geyer initial positive sequence: sum paired autocorrelations while the
  // pair sums stay positive.
  double tau = -1.0;
  for (long long m = 0; 2 * m < n; ++m) {
    double pair = autocov(2 * m) / gamma0;
    if (2 * m + 1 < n) pair += autocov(2 * m + 1) / gamma0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  if (tau <= 0.0) return {static_cast<double>(n), false};  // anticorrelated: capped at n
  return {std::min(static_cast<double>(n), static_cast<double>(n) / tau), false};
}

std::array<const char*, kNumBlocks> block_names() {
  return {"x_pref",          "x_year",          "x_niche",        "x_gev_mu",
          "x_gev_sigma",     "scalars_counts",  "scalars_sharing", "scalars_gev",
          "hyper_pref",      "hyper_year",      "hyper_niche",    "hyper_gev_mu",
          "hyper_gev_sigma"};
}

void ChainConfig::validate() const {
  if (iterations <= 0) throw ValidationError("chain: iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations)
    throw ValidationError(cat("chain: burn_in ", burn_in, " must lie in [0, iterations)"));
  if (thin < 1) throw ValidationError("chain: thin must be >= 1");
}

namespace {

struct EnabledSet {
  std::vector<FieldId> fields;
  std::vector<int> scalars;      // scalar ids allowed to move
  std::vector<FieldId> hypers;
};

class Sampler {
 public:
  Sampler(const Model& model, const ChainConfig& cfg, LatentState state, uint64_t stream_base,
          const EnabledSet& enabled, long long adapt_horizon)
      : model_(model), cfg_(cfg), enabled_(enabled), state_(std::move(state)),
        adapt_limit_(adapt_horizon) {
    for (int b = 0; b < kNumBlocks; ++b)
      rng_[b] = RngStream(cfg.seed, stream_base + static_cast<uint64_t>(b));
    for (int f = 0; f < kNumFields; ++f)
      adapters_.emplace_back(cfg.init_step_field, cfg.target_accept_mala, adapt_horizon);
    for (int b = 0; b < kNumScalarBlocks; ++b)
      adapters_.emplace_back(cfg.init_step_scalar, cfg.target_accept_rw, adapt_horizon);
    for (int f = 0; f < kNumFields; ++f)
      adapters_.emplace_back(cfg.init_step_hyper, cfg.target_accept_rw, adapt_horizon);
    log_post_ = model_.joint_log_posterior(state_);
  }

  void run(long long iterations, long long burn_in, long long thin, ChainOutput* out) {
    std::array<long long, kNumBlocks> accept_count{};
    std::array<long long, kNumBlocks> run_count{};

    for (long long iter = 1; iter <= iterations; ++iter) {
      TraceRow row;
      row.accepted.fill(-1);
      const bool adapting = iter <= adapt_limit_;

      for (FieldId f : enabled_.fields) {
        const int b = static_cast<int>(f);
        const bool acc = field_update(f, b);
        if (adapting) adapters_[b].update(acc);
        row.accepted[b] = acc ? 1 : 0;
      }
      for (int sb = 0; sb < kNumScalarBlocks; ++sb) {
        const int b = kNumFields + sb;
        auto members = block_members(static_cast<ScalarBlockId>(sb));
        if (members.empty()) continue;
        const bool acc = scalar_update(members, b);
        if (adapting) adapters_[b].update(acc);
        row.accepted[b] = acc ? 1 : 0;
      }
      for (FieldId f : enabled_.hypers) {
        const int b = kNumFields + kNumScalarBlocks + static_cast<int>(f);
        const bool acc = hyper_update_block(f, b);
        if (adapting) adapters_[b].update(acc);
        row.accepted[b] = acc ? 1 : 0;
      }

      if (out) {
        row.iteration = iter;
        row.log_posterior = log_post_;
        row.scalars = state_.scalars;
        for (int f = 0; f < kNumFields; ++f) row.hyper[f] = state_.hyper[f];
        out->trace.push_back(row);
        if (iter > burn_in) {
          for (int b = 0; b < kNumBlocks; ++b) {
            if (row.accepted[b] >= 0) {
              ++run_count[b];
              accept_count[b] += row.accepted[b];
            }
          }
          if ((iter - burn_in) % thin == 0) out->draws.push_back(state_);
        }
      }
    }

    if (out) {
      for (int b = 0; b < kNumBlocks; ++b) {
        out->accept_rate[b] =
            run_count[b] > 0 ? static_cast<double>(accept_count[b]) / run_count[b] : kNaN;
        out->final_step[b] = adapters_[b].step();
      }
    }
  }

  LatentState take_state() { return std::move(state_); }

 private:
  std::vector<int> block_members(ScalarBlockId b) const {
    std::vector<int> out;
    for (int s : model_.scalar_block(b))
      if (std::find(enabled_.scalars.begin(), enabled_.scalars.end(), s) != enabled_.scalars.end())
        out.push_back(s);
    return out;
  }

  bool field_update(FieldId f, int block) {
    const VecchiaFactor& factor = model_.factor(f, state_.hyper[static_cast<int>(f)]);
    VecchiaPreconditioner W(factor);
    auto log_post = [&](const std::vector<double>& v) {
      std::vector<double> saved = std::exchange(state_.field(f), std::vector<double>(v));
      const double lp = model_.joint_log_posterior(state_);
      state_.field(f) = std::move(saved);
      return lp;
    };
    auto grad = [&](const std::vector<double>& v, std::vector<double>* g) {
      std::vector<double> saved = std::exchange(state_.field(f), std::vector<double>(v));
      bool ok = true;
      try {
        model_.block_gradient(state_, f, g);
      } catch (const NumericError&) {
        ok = false;
      }
      state_.field(f) = std::move(saved);
      if (!ok) return false;
      for (double gi : *g)
        if (!std::isfinite(gi)) return false;
      return true;
    };
    const MalaStepResult res =
        mala_step(&state_.field(f), &log_post_, adapters_[block].step(), W,
                  &rng_[block], log_post, grad, /*center_after=*/true);
    return res.accepted;
  }

  bool scalar_update(const std::vector<int>& members, int block) {
    const double step = adapters_[block].step();
    std::array<double, kNumScalars> saved = state_.scalars;
    for (int s : members) state_.scalar(s) += step * rng_[block].normal();
    const double lp_star = model_.joint_log_posterior(state_);
    const double log_ratio = lp_star - log_post_;
    if (std::isfinite(lp_star) && std::log(rng_[block].uniform()) < log_ratio) {
      log_post_ = lp_star;
      return true;
    }
    state_.scalars = saved;
    return false;
  }

  bool hyper_update_block(FieldId f, int block) {
    const int fi = static_cast<int>(f);
    const VecchiaFactor& factor = model_.factor(f, state_.hyper[fi]);
    const HyperUpdate hu =
        hyper_random_walk_update(state_.field(f), model_.geometry(f), factor,
                                 model_.pc_calibration(f), adapters_[block].step(), &rng_[block]);
    if (hu.accepted) {
      state_.hyper[fi] = hu.hyper;
      log_post_ += hu.delta_log_posterior;
    }
    return hu.accepted;
  }

  const Model& model_;
  const ChainConfig& cfg_;
  EnabledSet enabled_;
  LatentState state_;
  long long adapt_limit_ = 0;
  double log_post_ = 0.0;
  std::array<RngStream, kNumBlocks> rng_;
  std::vector<StepAdapter> adapters_;
};

EnabledSet full_enabled(const Model& model) {
  EnabledSet e;
  for (int f = 0; f < kNumFields; ++f)
    if (model.field_active(static_cast<FieldId>(f))) e.fields.push_back(static_cast<FieldId>(f));
  for (int s = 0; s < kNumScalars; ++s)
    if (model.scalar_active(s)) e.scalars.push_back(s);
  e.hypers = e.fields;
  return e;
}

// Short single-component chains provide starting values for the full
// model; the sharing parameters stay at zero throughout.
LatentState staged_start(const Model& model, const ChainConfig& cfg) {
  LatentState state = model.initial_state();
  struct Stage {
    ModelConfig mc;
    EnabledSet enabled;
  };
  std::vector<Stage> stages;

  {
    Stage a{model.config(), {}};
    a.mc.use_bbs = a.mc.use_spc = a.mc.use_gev = false;
    a.enabled.fields = {FieldId::pref, FieldId::year};
    a.enabled.scalars = {kBeta0Ckl};
    a.enabled.hypers = a.enabled.fields;
    stages.push_back(std::move(a));
  }
  {
    Stage b{model.config(), {}};
    b.mc.use_ckl = b.mc.use_gev = false;
    b.enabled.fields = {FieldId::niche};
    b.enabled.scalars = {kBeta0Bbs, kBeta0Spc, kBetaAct};
    b.enabled.hypers = b.enabled.fields;
    stages.push_back(std::move(b));
  }
  {
    Stage c{model.config(), {}};
    c.mc.use_bbs = c.mc.use_ckl = c.mc.use_spc = false;
    c.enabled.fields = {FieldId::gev_mu, FieldId::gev_sigma};
    c.enabled.scalars = {kBeta0GevMu, kBeta1GevMu, kBeta0GevSigma, kXi};
    c.enabled.hypers = c.enabled.fields;
    stages.push_back(std::move(c));
  }

  for (size_t s = 0; s < stages.size(); ++s) {
    Model staged(model.grid(), model.tables(), stages[s].mc);
    Sampler sampler(staged, cfg, std::move(state), 1000 * (s + 1), stages[s].enabled,
                    cfg.staged_iterations);
    sampler.run(cfg.staged_iterations, cfg.staged_iterations, 1, nullptr);
    state = sampler.take_state();
  }
  return state;
}

}  // namespace

ChainOutput run_chain(const Model& model, const ChainConfig& config) {
  config.validate();
  LatentState start = (config.staged_init && !model.config().gev_only &&
                       config.staged_iterations > 0)
                          ? staged_start(model, config)
                          : model.initial_state();

  ChainOutput out;
  out.seed = config.seed;
  out.iterations = config.iterations;
  out.burn_in = config.burn_in;
  out.thin = config.thin;

  Sampler sampler(model, config, std::move(start), 0, full_enabled(model),
                  config.adapt_horizon < 0 ? config.burn_in : config.adapt_horizon);
  sampler.run(config.iterations, config.burn_in, config.thin, &out);

  // per-scalar ESS over the post burn-in (unthinned) trace
  const long long post = out.iterations - out.burn_in;
  for (int s = 0; s < kNumScalars; ++s) {
    if (post < 10) {
      out.scalar_ess[s] = kNaN;
      continue;
    }
    std::vector<double> series;
    series.reserve(post);
    for (const auto& row : out.trace)
      if (row.iteration > out.burn_in) series.push_back(row.scalars[s]);
    const EssResult r = effective_sample_size(series);
    out.scalar_ess[s] = r.degenerate ? 0.0 : r.ess;
  }
  return out;
}

}  // namespace arrival
