#include "arrival/posterior.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "arrival/common.hpp"
#include "arrival/gev.hpp"

namespace arrival {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sample_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - lo;
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

// E[X(t*) | x] under the draw's temporal exponential covariance.
double year_field_extension(const LatentState& s, const std::vector<int>& years,
                            int target_year) {
  const int T = static_cast<int>(years.size());
  const GpHyper& h = s.hyper[static_cast<int>(FieldId::year)];
  Eigen::MatrixXd C(T, T);
  Eigen::VectorXd c(T);
  for (int i = 0; i < T; ++i) {
    c(i) = exp_cov(std::abs(years[i] - target_year), h);
    for (int j = 0; j < T; ++j) C(i, j) = exp_cov(std::abs(years[i] - years[j]), h);
  }
  Eigen::Map<const Eigen::VectorXd> x(s.x_year.data(), T);
  return c.dot(C.ldlt().solve(x));
}

}  // namespace

DurationSource DurationSource::from_tables(const PixelGrid& grid, const ResponseTables& tables) {
  DurationSource src;
  src.cell = tables.median_duration;
  src.pixel_mean.assign(grid.n_pixels(), kNaN);
  double total = 0.0;
  long long count = 0;
  for (int p = 0; p < grid.n_pixels(); ++p) {
    double acc = 0.0;
    int n = 0;
    for (int t = 0; t < grid.n_years(); ++t) {
      const double d = tables.median_duration[grid.cell(p, t)];
      if (!std::isnan(d)) {
        acc += d;
        ++n;
      }
    }
    if (n > 0) {
      src.pixel_mean[p] = acc / n;
      total += acc;
      count += n;
    }
  }
  if (count > 0) src.overall_mean = total / count;
  return src;
}

DurationSource DurationSource::from_full_table(const PixelGrid& grid,
                                               std::vector<double> cell_values) {
  DurationSource src;
  src.cell = std::move(cell_values);
  src.pixel_mean.assign(grid.n_pixels(), kNaN);
  double total = 0.0;
  for (int p = 0; p < grid.n_pixels(); ++p) {
    double acc = 0.0;
    for (int t = 0; t < grid.n_years(); ++t) acc += src.cell[grid.cell(p, t)];
    src.pixel_mean[p] = acc / grid.n_years();
    total += acc;
  }
  src.overall_mean = total / (grid.n_pixels() * grid.n_years());
  return src;
}

double DurationSource::value(int cell_index, int pixel) const {
  if (cell_index >= 0 && cell_index < static_cast<int>(cell.size()) &&
      !std::isnan(cell[cell_index]))
    return cell[cell_index];
  return pixel_value(pixel);
}

double DurationSource::pixel_value(int pixel) const {
  if (pixel < static_cast<int>(pixel_mean.size()) && !std::isnan(pixel_mean[pixel]))
    return pixel_mean[pixel];
  return overall_mean;
}

ArrivalPrediction predict_arrival(const PosteriorDraws& draws, int year, double nao,
                                  EffortMode mode, const DurationSource& durations,
                                  double mask_threshold) {
  if (draws.draws.empty()) throw ValidationError("predict: no posterior draws");
  if (std::isnan(nao)) throw ValidationError(cat("predict: missing NAO for year ", year));
  const PixelGrid& grid = draws.grid;
  const int D = grid.n_pixels();
  const int t_idx = grid.year_index(year);

  ArrivalPrediction out;
  out.year = year;
  out.mode = mode;
  out.day_q10.resize(D);
  out.day_q50.resize(D);
  out.day_q90.resize(D);
  out.day_mean.resize(D);
  out.masked = niche_mask(draws, durations, mask_threshold);

  std::vector<double> days(draws.draws.size());
  for (int p = 0; p < D; ++p) {
    const double log_offset = std::log(grid.pixels[p].area_km2 / draws.area_baseline_km2);
    for (size_t m = 0; m < draws.draws.size(); ++m) {
      const LatentState& s = draws.draws[m];
      const double x_bound = s.scalar(kBeta0GevMu) + s.x_gev_mu[p] +
                             s.scalar(kBeta1GevMu) * nao +
                             (draws.gev_only ? 0.0 : s.scalar(kThetaNicheGev) * s.x_niche[p]);
      double mu;
      if (mode == EffortMode::infinite) {
        mu = std::exp(x_bound);  // saturation limit, exactly
      } else if (draws.gev_only) {
        mu = saturating_g(x_bound, s.scalar(kThetaEff));
      } else {
        const double x_year_t =
            t_idx >= 0 ? s.x_year[t_idx] : year_field_extension(s, grid.years, year);
        const double log_lambda =
            s.scalar(kBeta0Ckl) + x_year_t + s.x_pref[p] + log_offset;
        const double d =
            t_idx >= 0 ? durations.value(grid.cell(p, t_idx), p) : durations.pixel_value(p);
        if (!(d > 0.0))
          throw ValidationError(cat("predict: no usable duration for pixel ", p));
        const double x_eff = effort_value(s.scalar(kThetaEff), s.scalar(kThetaPref),
                                          s.scalar(kThetaAct), log_lambda, 1.0 / d);
        mu = saturating_g(x_bound, x_eff);
      }
      const double sigma = std::exp(s.scalar(kBeta0GevSigma) + s.x_gev_sigma[p]);
      const double z_med = gev_quantile(0.5, {mu, sigma, s.scalar(kXi)});
      days[m] = z_to_day(z_med);
    }
    out.day_q10[p] = sample_quantile(days, 0.10);
    out.day_q50[p] = sample_quantile(days, 0.50);
    out.day_q90[p] = sample_quantile(days, 0.90);
    out.day_mean[p] = std::accumulate(days.begin(), days.end(), 0.0) / days.size();
  }
  return out;
}

std::vector<uint8_t> niche_mask(const PosteriorDraws& draws, const DurationSource& durations,
                                double threshold) {
  const int D = draws.grid.n_pixels();
  std::vector<uint8_t> masked(D, 0);
  if (threshold <= 0.0 || draws.gev_only) return masked;  // nothing masked
  if (!(threshold < 1.0)) throw ValidationError("niche_mask: threshold must lie in (0,1)");
  for (int p = 0; p < D; ++p) {
    const double d = durations.pixel_value(p);
    if (!(d > 0.0))
      throw ValidationError(cat("niche_mask: no usable duration for pixel ", p));
    double acc = 0.0;
    for (const auto& s : draws.draws) {
      const double pred = s.scalar(kBeta0Spc) + s.x_niche[p] + s.scalar(kBetaAct) / d;
      acc += -std::expm1(-std::exp(pred));
    }
    if (acc / draws.draws.size() < threshold) masked[p] = 1;
  }
  return masked;
}

std::vector<double> excursion_function(const std::vector<std::vector<double>>& field_draws,
                                       double u, bool positive) {
  if (field_draws.empty()) throw ValidationError("excursion: empty draw set");
  const size_t M = field_draws.size();
  const size_t D = field_draws[0].size();
  if (M < 1000) warn(cat("excursion: only ", M, " draws; at least 1000 recommended"));

  std::vector<double> marginal(D, 0.0);
  for (const auto& x : field_draws) {
    if (x.size() != D) throw ValidationError("excursion: ragged draw matrix");
    for (size_t s = 0; s < D; ++s)
      if (positive ? x[s] > u : x[s] < u) marginal[s] += 1.0;
  }
  for (double& v : marginal) v /= static_cast<double>(M);

  std::vector<size_t> order(D);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return marginal[a] > marginal[b]; });

  // incremental joint probability along the prefix
  std::vector<char> alive(M, 1);
  size_t alive_count = M;
  std::vector<double> F(D, 0.0);
  for (size_t j = 0; j < D; ++j) {
    const size_t s = order[j];
    for (size_t m = 0; m < M; ++m) {
      if (!alive[m]) continue;
      const double v = field_draws[m][s];
      if (!(positive ? v > u : v < u)) {
        alive[m] = 0;
        --alive_count;
      }
    }
    F[s] = static_cast<double>(alive_count) / static_cast<double>(M);
  }
  return F;
}

std::array<std::optional<double>, 4> landcover_correlation(
    const std::vector<double>& field_posterior_mean,
    const std::vector<std::array<double, 4>>& landcover) {
  const size_t D = field_posterior_mean.size();
  if (landcover.size() != D)
    throw ValidationError("landcover_correlation: field and land cover sizes differ");

  auto ranks = [](const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    size_t i = 0;
    while (i < n) {
      size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * (i + j) + 1.0;  // average rank for ties
      for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  auto pearson = [](const std::vector<double>& a, const std::vector<double>& b)
      -> std::optional<double> {
    const size_t n = a.size();
    double ma = 0, mb = 0;
    for (size_t i = 0; i < n; ++i) {
      ma += a[i];
      mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0, sbb = 0, sab = 0;
    for (size_t i = 0; i < n; ++i) {
      saa += (a[i] - ma) * (a[i] - ma);
      sbb += (b[i] - mb) * (b[i] - mb);
      sab += (a[i] - ma) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;  // constant input
    return sab / std::sqrt(saa * sbb);
  };

  const std::vector<double> field_ranks = ranks(field_posterior_mean);
  std::array<std::optional<double>, 4> out;
  for (int c = 0; c < 4; ++c) {
    std::vector<double> cls(D);
    for (size_t p = 0; p < D; ++p) cls[p] = landcover[p][c];
    out[c] = pearson(field_ranks, ranks(cls));
  }
  return out;
}

std::vector<std::vector<double>> field_draw_matrix(const PosteriorDraws& draws, FieldId f) {
  std::vector<std::vector<double>> out;
  out.reserve(draws.draws.size());
  for (const auto& s : draws.draws) out.push_back(s.field(f));
  return out;
}

}  // namespace arrival
