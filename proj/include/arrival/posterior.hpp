#pragma once

// Downstream of the chain: arrival-date prediction with bias correction
// and niche masking, excursion functions, and land-cover correlations.

#include <limits>
#include <optional>
#include <vector>

#include "arrival/model.hpp"

namespace arrival {

struct PosteriorDraws {
  PixelGrid grid;
  std::vector<LatentState> draws;
  bool gev_only = false;
  double area_baseline_km2 = 400.0;
};

enum class EffortMode { observed, infinite };

// Duration covariate for prediction: per-cell values where observed, then
// the pixel's mean over years, then the overall mean.
struct DurationSource {
  std::vector<double> cell;        // D*T, NaN absent
  std::vector<double> pixel_mean;  // D, NaN when never observed
  double overall_mean = std::numeric_limits<double>::quiet_NaN();

  static DurationSource from_tables(const PixelGrid& grid, const ResponseTables& tables);
  static DurationSource from_full_table(const PixelGrid& grid, std::vector<double> cell_values);

  double value(int cell_index, int pixel) const;
  double pixel_value(int pixel) const;
};

struct ArrivalPrediction {
  int year = 0;
  EffortMode mode = EffortMode::observed;
  // day-of-year summaries of the per-draw GEV median arrival
  std::vector<double> day_q10, day_q50, day_q90, day_mean;  // per pixel
  std::vector<uint8_t> masked;                              // per pixel
};

// Per draw: mu(s, year), sigma(s), xi; the z-space median maps to
// day = 366 exp(-z). Infinite mode uses mu = exp(x_bound) exactly. Years
// outside the fitted range use the temporal field's prior-conditional
// mean extension. Throws when NAO is missing.
ArrivalPrediction predict_arrival(const PosteriorDraws& draws, int year, double nao,
                                  EffortMode mode, const DurationSource& durations,
                                  double mask_threshold);

// Pixels whose posterior-mean presence probability (with the aggregated
// mean duration as activity covariate) falls below the threshold.
std::vector<uint8_t> niche_mask(const PosteriorDraws& draws, const DurationSource& durations,
                                double threshold);

// Sample-based excursion function: pixels ordered by decreasing empirical
// marginal exceedance; F at ordering position j is the empirical joint
// probability that the whole j-prefix exceeds u (deficits below u for the
// negative version). field_draws is indexed [draw][pixel].
std::vector<double> excursion_function(const std::vector<std::vector<double>>& field_draws,
                                       double u, bool positive);

// Spearman rank correlation (average ranks on ties) of a posterior-mean
// field against each land-cover class; nullopt when the field or the
// class proportions are constant.
std::array<std::optional<double>, 4> landcover_correlation(
    const std::vector<double>& field_posterior_mean,
    const std::vector<std::array<double, 4>>& landcover);

inline constexpr std::array<const char*, 4> kLandcoverClasses = {"developed", "forest",
                                                                 "vegetation", "water"};

// Per-draw field matrix for one latent field, e.g. for excursions.
std::vector<std::vector<double>> field_draw_matrix(const PosteriorDraws& draws, FieldId f);

}  // namespace arrival
