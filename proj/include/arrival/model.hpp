#pragma once

// The hierarchical model: latent state, the five linear predictors, the
// effort combination and saturating sharing function, and the joint
// log-posterior with per-block gradients.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "arrival/gp.hpp"
#include "arrival/tables.hpp"

namespace arrival {

enum class FieldId : int { pref = 0, year = 1, niche = 2, gev_mu = 3, gev_sigma = 4 };
inline constexpr int kNumFields = 5;
inline constexpr std::array<const char*, kNumFields> kFieldNames = {
    "x_pref", "x_year", "x_niche", "x_gev_mu", "x_gev_sigma"};

enum Scalar : int {
  kBeta0Bbs = 0,
  kBeta0Ckl,
  kBeta0Spc,
  kBetaAct,
  kBeta0GevMu,
  kBeta1GevMu,
  kBeta0GevSigma,
  kThetaEff,
  kThetaPref,
  kThetaAct,
  kThetaNicheGev,
  kXi,
  kNumScalars
};
inline constexpr std::array<const char*, kNumScalars> kScalarNames = {
    "beta0_bbs",    "beta0_ckl",    "beta0_spc",      "beta_act",
    "beta0_gev_mu", "beta1_gev_mu", "beta0_gev_sigma", "theta_eff",
    "theta_pref",   "theta_act",    "theta_niche_gev", "xi"};

enum class ScalarBlockId : int { counts = 0, sharing = 1, gev = 2 };
inline constexpr int kNumScalarBlocks = 3;
inline constexpr std::array<const char*, kNumScalarBlocks> kScalarBlockNames = {
    "scalars_counts", "scalars_sharing", "scalars_gev"};

struct LatentState {
  std::vector<double> x_pref;       // length D
  std::vector<double> x_year;       // length T
  std::vector<double> x_niche;      // length D
  std::vector<double> x_gev_mu;     // length D
  std::vector<double> x_gev_sigma;  // length D
  std::array<double, kNumScalars> scalars{};
  std::array<GpHyper, kNumFields> hyper{};

  std::vector<double>& field(FieldId id);
  const std::vector<double>& field(FieldId id) const;
  double& scalar(int i) { return scalars[i]; }
  double scalar(int i) const { return scalars[i]; }
};

struct ModelConfig {
  bool gev_only = false;
  bool share_niche_gev = true;
  double area_baseline_km2 = 400.0;  // nominal 20 km x 20 km pixel
  double xi_lower = -1.0;
  double xi_upper = 0.5;
  double scalar_prior_sd = 10.0;  // flat normal, variance 100
  PcCalibration pc_spatial{40.0, 0.05, 3.0, 0.05};
  PcCalibration pc_temporal{2.0, 0.05, 3.0, 0.05};
  int vecchia_k = 5;
  // Per-table likelihood switches (additivity checks, staged warm starts).
  bool use_bbs = true;
  bool use_ckl = true;
  bool use_spc = true;
  bool use_gev = true;
};

// Eq-style combination of preference and activity into sampling effort.
// inv_duration = 1/d in 1/minutes; 0 encodes infinite duration, which
// makes the activity term vanish.
double effort_value(double theta_eff, double theta_pref, double theta_act,
                    double log_lambda_ckl, double inv_duration);

// Bounded monotone sharing: exp(x_bound) / (1 + exp(-x_effort)).
double saturating_g(double x_bound, double x_effort);
// Partials: d g / d x_bound = g;  d g / d x_effort = g * (1 - logistic(x_effort)).
double saturating_g_deffort(double g_value, double x_effort);

enum class EffortDurations { observed, infinite };

struct PredictorValues {
  std::vector<double> log_lambda_bbs;  // per pixel
  std::vector<double> log_lambda_ckl;  // per cell, includes the area offset
  std::vector<double> x_effort;        // per cell; NaN where duration is missing
  std::vector<double> spc_predictor;   // per cell with checklists; NaN elsewhere
  std::vector<double> mu;              // per cell; NaN where x_effort is
  std::vector<double> log_sigma;       // per pixel
};

struct PosteriorBreakdown {
  double bbs = 0.0;
  double ckl = 0.0;
  double spc = 0.0;
  double gev = 0.0;
  double field_prior = 0.0;
  double scalar_prior = 0.0;
  double hyper_prior = 0.0;
  long long nonfinite_predictors = 0;
  double total() const;
};

class Model {
 public:
  Model(const PixelGrid& grid, const ResponseTables& tables, const ModelConfig& config);

  const PixelGrid& grid() const { return grid_; }
  const ResponseTables& tables() const { return tables_; }
  const ModelConfig& config() const { return config_; }

  bool field_active(FieldId f) const;
  bool scalar_active(int s) const;
  std::vector<int> scalar_block(ScalarBlockId b) const;

  LatentState initial_state() const;
  int field_length(FieldId f) const;

  // Geometry is fixed once; the factor is cached per field and rebuilt
  // only when that field's hyperparameters change.
  const VecchiaFactor& factor(FieldId f, const GpHyper& h) const;
  const VecchiaGeometry& geometry(FieldId f) const { return geometry_[static_cast<int>(f)]; }
  const PcCalibration& pc_calibration(FieldId f) const;

  PredictorValues predictors(const LatentState& s,
                             EffortDurations durations = EffortDurations::observed) const;

  PosteriorBreakdown breakdown(const LatentState& s) const;
  double joint_log_posterior(const LatentState& s) const;

  // Analytic gradient of the joint log-posterior with respect to one
  // latent field, including the chain rules through g and x_effort.
  void block_gradient(const LatentState& s, FieldId f, std::vector<double>* grad) const;

 private:
  const PixelGrid& grid_;
  const ResponseTables& tables_;
  ModelConfig config_;

  std::vector<double> log_area_offset_;  // per pixel: log(area / baseline)
  std::vector<double> inv_duration_;     // per cell: 1/d, NaN where absent

  std::array<VecchiaGeometry, kNumFields> geometry_;
  mutable std::array<std::optional<VecchiaFactor>, kNumFields> factor_cache_;

  struct RouteEval {
    int year_idx;
    long long count;
    std::vector<std::pair<int, double>> weights;  // pixel, effective weight
  };
  std::vector<RouteEval> routes_;

  bool use_bbs() const { return config_.use_bbs && !config_.gev_only; }
  bool use_ckl() const { return config_.use_ckl && !config_.gev_only; }
  bool use_spc() const { return config_.use_spc && !config_.gev_only; }
  bool use_gev() const { return config_.use_gev; }
};

}  // namespace arrival
