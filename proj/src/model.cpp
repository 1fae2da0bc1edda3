#include "arrival/model.hpp"

#include <cmath>
#include <limits>

#include "arrival/common.hpp"
#include "arrival/counts.hpp"
#include "arrival/gev.hpp"

namespace arrival {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLog2Pi = 1.8378770664093454836;

double normal_logpdf(double x, double sd) {
  const double z = x / sd;
  return -0.5 * (kLog2Pi + z * z) - std::log(sd);
}
}  // namespace

std::vector<double>& LatentState::field(FieldId id) {
  switch (id) {
    case FieldId::pref: return x_pref;
    case FieldId::year: return x_year;
    case FieldId::niche: return x_niche;
    case FieldId::gev_mu: return x_gev_mu;
    case FieldId::gev_sigma: return x_gev_sigma;
  }
  throw ValidationError("unknown field id");
}

const std::vector<double>& LatentState::field(FieldId id) const {
  return const_cast<LatentState*>(this)->field(id);
}

double effort_value(double theta_eff, double theta_pref, double theta_act,
                    double log_lambda_ckl, double inv_duration) {
  if (!(inv_duration >= 0.0))
    throw ValidationError(cat("effort: duration must be positive (1/d = ", inv_duration, ")"));
  return theta_eff + theta_pref * log_lambda_ckl + theta_act * inv_duration;
}

double saturating_g(double x_bound, double x_effort) {
  return std::exp(x_bound) / (1.0 + std::exp(-x_effort));
}

double saturating_g_deffort(double g_value, double x_effort) {
  const double e = std::exp(-x_effort);
  return g_value * e / (1.0 + e);
}

double PosteriorBreakdown::total() const {
  return bbs + ckl + spc + gev + field_prior + scalar_prior + hyper_prior;
}

Model::Model(const PixelGrid& grid, const ResponseTables& tables, const ModelConfig& config)
    : grid_(grid), tables_(tables), config_(config) {
  if (tables.n_pixels != grid.n_pixels() || tables.n_years != grid.n_years())
    throw ValidationError("model: tables and grid dimensions disagree");
  if (config_.vecchia_k < 1) throw ValidationError("model: vecchia_k must be >= 1");

  log_area_offset_.resize(grid.n_pixels());
  for (int p = 0; p < grid.n_pixels(); ++p)
    log_area_offset_[p] = std::log(grid.pixels[p].area_km2 / config_.area_baseline_km2);

  inv_duration_.assign(tables.n_ckl.size(), kNaN);
  for (size_t c = 0; c < tables.n_ckl.size(); ++c) {
    if (tables.n_ckl[c] > 0) {
      const double d = tables.median_duration[c];
      if (!(d > 0.0))
        throw ValidationError(cat("model: non-positive median duration at cell ", c));
      inv_duration_[c] = 1.0 / d;
    }
  }

  for (int f = 0; f < kNumFields; ++f) {
    std::vector<Point2> pts = (static_cast<FieldId>(f) == FieldId::year) ? grid.year_points()
                                                                         : grid.pixel_points();
    const int n = static_cast<int>(pts.size());
    const int k = (static_cast<FieldId>(f) == FieldId::year)
                      ? std::min(config_.vecchia_k, std::max(1, n - 1))
                      : config_.vecchia_k;
    geometry_[f] = VecchiaGeometry::build(std::move(pts), std::max(1, k));
  }

  routes_.reserve(tables.routes.size());
  for (const auto& r : tables.routes) {
    RouteEval ev;
    ev.year_idx = grid.year_index(r.year);
    if (ev.year_idx < 0)
      throw ValidationError(cat("model: route ", r.route_id, " year ", r.year, " not modeled"));
    ev.count = r.count;
    ev.weights = route_intensity_weights(r);
    for (const auto& [pixel, w] : ev.weights) {
      if (pixel < 0 || pixel >= grid.n_pixels())
        throw ValidationError(cat("model: route ", r.route_id, " references pixel ", pixel));
      (void)w;
    }
    routes_.push_back(std::move(ev));
  }
}

bool Model::field_active(FieldId f) const {
  if (!config_.gev_only) return true;
  return f == FieldId::gev_mu || f == FieldId::gev_sigma;
}

bool Model::scalar_active(int s) const {
  if (config_.gev_only)
    return s == kBeta0GevMu || s == kBeta1GevMu || s == kBeta0GevSigma || s == kXi;
  if (s == kThetaNicheGev && !config_.share_niche_gev) return false;
  return true;
}

std::vector<int> Model::scalar_block(ScalarBlockId b) const {
  std::vector<int> ids;
  switch (b) {
    case ScalarBlockId::counts:
      ids = {kBeta0Bbs, kBeta0Ckl, kBeta0Spc, kBetaAct};
      break;
    case ScalarBlockId::sharing:
      ids = {kThetaEff, kThetaPref, kThetaAct, kThetaNicheGev};
      break;
    case ScalarBlockId::gev:
      ids = {kBeta0GevMu, kBeta1GevMu, kBeta0GevSigma, kXi};
      break;
  }
  std::vector<int> out;
  for (int s : ids)
    if (scalar_active(s)) out.push_back(s);
  return out;
}

int Model::field_length(FieldId f) const {
  return f == FieldId::year ? grid_.n_years() : grid_.n_pixels();
}

LatentState Model::initial_state() const {
  LatentState s;
  s.x_pref.assign(grid_.n_pixels(), 0.0);
  s.x_year.assign(grid_.n_years(), 0.0);
  s.x_niche.assign(grid_.n_pixels(), 0.0);
  s.x_gev_mu.assign(grid_.n_pixels(), 0.0);
  s.x_gev_sigma.assign(grid_.n_pixels(), 0.0);
  s.scalars.fill(0.0);
  for (int f = 0; f < kNumFields; ++f) {
    const auto& pc = pc_calibration(static_cast<FieldId>(f));
    s.hyper[f] = {pc.median_sd(), pc.median_range()};
  }
  return s;
}

const PcCalibration& Model::pc_calibration(FieldId f) const {
  return f == FieldId::year ? config_.pc_temporal : config_.pc_spatial;
}

const VecchiaFactor& Model::factor(FieldId f, const GpHyper& h) const {
  const int i = static_cast<int>(f);
  auto& cached = factor_cache_[i];
  if (!cached || cached->hyper().sd != h.sd || cached->hyper().range != h.range) {
    cached = VecchiaFactor::build(geometry_[i], h);
  }
  return *cached;
}

PredictorValues Model::predictors(const LatentState& s, EffortDurations durations) const {
  const int D = grid_.n_pixels();
  const int T = grid_.n_years();
  PredictorValues pv;
  pv.log_lambda_bbs.resize(D);
  pv.log_lambda_ckl.resize(static_cast<size_t>(D) * T);
  pv.x_effort.resize(static_cast<size_t>(D) * T);
  pv.spc_predictor.assign(static_cast<size_t>(D) * T, kNaN);
  pv.mu.resize(static_cast<size_t>(D) * T);
  pv.log_sigma.resize(D);

  const double b0_bbs = s.scalar(kBeta0Bbs);
  const double b0_ckl = s.scalar(kBeta0Ckl);
  const double b0_spc = s.scalar(kBeta0Spc);
  const double b_act = s.scalar(kBetaAct);
  const double th_eff = s.scalar(kThetaEff);
  const double th_pref = s.scalar(kThetaPref);
  const double th_act = s.scalar(kThetaAct);
  const double th_ng = config_.share_niche_gev ? s.scalar(kThetaNicheGev) : 0.0;

  for (int p = 0; p < D; ++p) {
    pv.log_lambda_bbs[p] = b0_bbs + s.x_niche[p];
    pv.log_sigma[p] = s.scalar(kBeta0GevSigma) + s.x_gev_sigma[p];
    for (int t = 0; t < T; ++t) {
      const int c = grid_.cell(p, t);
      const double nao = tables_.nao[t];
      if (std::isnan(nao))
        throw ValidationError(cat("model: missing NAO for year index ", t));
      pv.log_lambda_ckl[c] = b0_ckl + s.x_year[t] + s.x_pref[p] + log_area_offset_[p];

      if (config_.gev_only) {
        pv.x_effort[c] = th_eff;  // effort held constant in the comparison model
      } else {
        const double inv_d =
            durations == EffortDurations::infinite ? 0.0 : inv_duration_[c];
        pv.x_effort[c] = std::isnan(inv_d)
                             ? kNaN
                             : effort_value(th_eff, th_pref, th_act, pv.log_lambda_ckl[c], inv_d);
      }
      const double x_bound = s.scalar(kBeta0GevMu) + s.x_gev_mu[p] +
                             s.scalar(kBeta1GevMu) * nao + th_ng * s.x_niche[p];
      pv.mu[c] = std::isnan(pv.x_effort[c]) ? kNaN : saturating_g(x_bound, pv.x_effort[c]);
      if (tables_.n_ckl[c] > 0 && !std::isnan(inv_duration_[c]))
        pv.spc_predictor[c] = b0_spc + s.x_niche[p] + b_act * inv_duration_[c];
    }
  }
  return pv;
}

PosteriorBreakdown Model::breakdown(const LatentState& s) const {
  PosteriorBreakdown out;
  const int D = grid_.n_pixels();
  const int T = grid_.n_years();

  // scalar priors; xi additionally truncated
  const double xi = s.scalar(kXi);
  if (!(xi > config_.xi_lower && xi < config_.xi_upper)) {
    out.scalar_prior = -kInf;
    return out;
  }
  for (int i = 0; i < kNumScalars; ++i)
    if (scalar_active(i)) out.scalar_prior += normal_logpdf(s.scalar(i), config_.scalar_prior_sd);

  // field and hyper priors
  for (int f = 0; f < kNumFields; ++f) {
    const FieldId id = static_cast<FieldId>(f);
    if (!field_active(id)) continue;
    const auto& h = s.hyper[f];
    if (!(h.sd > 0.0 && h.range > 0.0)) {
      out.hyper_prior = -kInf;
      return out;
    }
    out.field_prior += factor(id, h).log_density(s.field(id));
    out.hyper_prior += pc_prior_logdensity(h, pc_calibration(id));
  }

  const PredictorValues pv = predictors(s);

  if (use_bbs()) {
    for (const auto& r : routes_) {
      double lambda = 0.0;
      for (const auto& [pixel, w] : r.weights) lambda += w * std::exp(pv.log_lambda_bbs[pixel]);
      if (!std::isfinite(lambda) || lambda <= 0.0) {
        ++out.nonfinite_predictors;
        out.bbs = -kInf;
        return out;
      }
      out.bbs += poisson_loglik_grad(r.count, std::log(lambda)).loglik;
    }
  }

  const GevParams base_gev{0.0, 1.0, xi};
  for (int p = 0; p < D; ++p) {
    const double sigma = std::exp(pv.log_sigma[p]);
    for (int t = 0; t < T; ++t) {
      const int c = grid_.cell(p, t);
      if (use_ckl()) {
        const double term = poisson_loglik_grad(tables_.n_ckl[c], pv.log_lambda_ckl[c]).loglik;
        if (!std::isfinite(term)) {
          ++out.nonfinite_predictors;
          out.ckl = -kInf;
          return out;
        }
        out.ckl += term;
      }
      if (use_spc() && tables_.n_ckl[c] > 0) {
        const double term =
            binomial_cloglog_loglik_grad(tables_.n_spc[c], tables_.n_ckl[c], pv.spc_predictor[c])
                .loglik;
        if (std::isnan(term)) {
          ++out.nonfinite_predictors;
          out.spc = -kInf;
          return out;
        }
        out.spc += term;
        if (std::isinf(term)) return out;  // p collapsed to 0 with successes
      }
      if (use_gev() && tables_.has_z(c)) {
        GevParams gp = base_gev;
        gp.mu = pv.mu[c];
        gp.sigma = sigma;
        if (!std::isfinite(gp.mu) || !(gp.sigma > 0.0) || !std::isfinite(gp.sigma)) {
          ++out.nonfinite_predictors;
          out.gev = -kInf;
          return out;
        }
        const GevLogpdf term = gev_logpdf_grad(tables_.z[c], gp);
        if (!term.in_support) {
          out.gev = -kInf;
          return out;
        }
        out.gev += term.logpdf;
      }
    }
  }
  return out;
}

double Model::joint_log_posterior(const LatentState& s) const { return breakdown(s).total(); }

void Model::block_gradient(const LatentState& s, FieldId f, std::vector<double>* grad) const {
  if (!field_active(f))
    throw ValidationError(cat("block_gradient: field ", kFieldNames[static_cast<int>(f)],
                              " is inactive under this configuration"));
  const int D = grid_.n_pixels();
  const int T = grid_.n_years();
  const PredictorValues pv = predictors(s);
  const double xi = s.scalar(kXi);
  const double th_pref = s.scalar(kThetaPref);
  const double th_ng = config_.share_niche_gev ? s.scalar(kThetaNicheGev) : 0.0;

  // Vecchia prior gradient
  factor(f, s.hyper[static_cast<int>(f)]).gradient(s.field(f), grad);

  // GEV terms contribute to every block except x_niche-without-sharing;
  // evaluate the per-cell d(loglik)/d(mu) and d(loglik)/d(log sigma) once.
  const bool needs_gev =
      use_gev() && (f == FieldId::gev_mu || f == FieldId::gev_sigma ||
                    (!config_.gev_only && (f == FieldId::pref || f == FieldId::year ||
                                           (f == FieldId::niche && th_ng != 0.0))));

  for (int p = 0; p < D; ++p) {
    const double sigma = std::exp(pv.log_sigma[p]);
    for (int t = 0; t < T; ++t) {
      const int c = grid_.cell(p, t);

      if (use_ckl() && (f == FieldId::pref || f == FieldId::year)) {
        const double d = poisson_loglik_grad(tables_.n_ckl[c], pv.log_lambda_ckl[c]).d_predictor;
        (*grad)[f == FieldId::pref ? p : t] += d;
      }
      if (use_spc() && f == FieldId::niche && tables_.n_ckl[c] > 0) {
        (*grad)[p] += binomial_cloglog_loglik_grad(tables_.n_spc[c], tables_.n_ckl[c],
                                                   pv.spc_predictor[c])
                          .d_predictor;
      }
      if (needs_gev && tables_.has_z(c)) {
        const GevLogpdf term = gev_logpdf_grad(tables_.z[c], {pv.mu[c], sigma, xi});
        if (!term.in_support)
          throw NumericError(cat("block_gradient: support violation at cell ", c));
        switch (f) {
          case FieldId::gev_mu:
            (*grad)[p] += term.d_mu * pv.mu[c];  // dg/dx_bound = g
            break;
          case FieldId::gev_sigma:
            (*grad)[p] += term.d_logsigma;
            break;
          case FieldId::niche:
            (*grad)[p] += term.d_mu * pv.mu[c] * th_ng;
            break;
          case FieldId::pref:
          case FieldId::year: {
            const double dg = saturating_g_deffort(pv.mu[c], pv.x_effort[c]);
            (*grad)[f == FieldId::pref ? p : t] += term.d_mu * dg * th_pref;
            break;
          }
        }
      }
    }
  }

  if (use_bbs() && f == FieldId::niche) {
    for (const auto& r : routes_) {
      double lambda = 0.0;
      for (const auto& [pixel, w] : r.weights) lambda += w * std::exp(pv.log_lambda_bbs[pixel]);
      const double dl = static_cast<double>(r.count) / lambda - 1.0;
      for (const auto& [pixel, w] : r.weights)
        (*grad)[pixel] += dl * w * std::exp(pv.log_lambda_bbs[pixel]);
    }
  }
}

}  // namespace arrival
