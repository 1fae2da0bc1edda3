#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "arrival/common.hpp"
#include "arrival/gev.hpp"
#include "arrival/posterior.hpp"
#include "arrival/simulate.hpp"

using namespace arrival;

namespace {

PosteriorDraws single_draw_posterior(int nx, int ny, const LatentState& s) {
  SimConfig cfg;
  cfg.nx = nx;
  cfg.ny = ny;
  cfg.years = {2001};
  PosteriorDraws d;
  d.grid = make_sim_grid(cfg);
  d.draws = {s};
  return d;
}

LatentState flat_state(int D, int T) {
  LatentState s;
  s.x_pref.assign(D, 0.0);
  s.x_year.assign(T, 0.0);
  s.x_niche.assign(D, 0.0);
  s.x_gev_mu.assign(D, 0.0);
  s.x_gev_sigma.assign(D, 0.0);
  s.scalars.fill(0.0);
  for (auto& h : s.hyper) h = {1.0, 50.0};
  return s;
}

}  // namespace

TEST_CASE("duration source fallback chain") {
  SimConfig cfg;
  cfg.nx = 2;
  cfg.ny = 1;
  cfg.years = {2001, 2002};
  PixelGrid grid = make_sim_grid(cfg);
  ResponseTables t;
  t.init(2, 2);
  t.n_ckl[grid.cell(0, 0)] = 1;
  t.median_duration[grid.cell(0, 0)] = 30.0;
  t.n_spc[grid.cell(0, 0)] = 0;

  const DurationSource src = DurationSource::from_tables(grid, t);
  CHECK(src.value(grid.cell(0, 0), 0) == 30.0);
  CHECK(src.value(grid.cell(0, 1), 0) == 30.0);  // pixel mean
  CHECK(src.value(grid.cell(1, 0), 1) == 30.0);  // overall mean
}

TEST_CASE("predict: frozen day for a known z-median") {
  // xi = 0, sigma = 1: z_med = mu - ln ln 2; pick mu so z_med = 1.2976
  const double target_z = 1.2976;
  const double mu = target_z + std::log(std::log(2.0));
  LatentState s = flat_state(4, 1);
  s.scalar(kBeta0GevMu) = std::log(mu);  // infinite mode: mu = exp(x_bound)
  PosteriorDraws draws = single_draw_posterior(2, 2, s);

  const DurationSource none = DurationSource::from_full_table(
      draws.grid, std::vector<double>(draws.grid.n_cells(), 60.0));
  const ArrivalPrediction pred =
      predict_arrival(draws, 2001, 0.0, EffortMode::infinite, none, 0.0);
  // frozen: 366 exp(-1.2976)
  CHECK(pred.day_q50[0] == doctest::Approx(99.986315677716297).epsilon(1e-9));
  CHECK(std::abs(pred.day_q50[0] - 100.0) < 0.1);

  // the debiased location parameter is exp(x_bound) exactly
  const double expect =
      z_to_day(gev_quantile(0.5, {std::exp(s.scalar(kBeta0GevMu)), 1.0, 0.0}));
  CHECK(pred.day_q50[0] == expect);
}

TEST_CASE("predict: debiased day is earlier and summaries are draw-order invariant") {
  SimConfig cfg;
  cfg.nx = 3;
  cfg.ny = 3;
  cfg.years = {2001, 2002};
  cfg.seed = 77;
  const SimData sim = simulate_dataset(cfg);

  // a small posterior cloud around the truth
  PosteriorDraws draws;
  draws.grid = sim.grid;
  RngStream rng(4, 0);
  for (int m = 0; m < 64; ++m) {
    LatentState s = sim.truth;
    for (int f = 0; f < kNumFields; ++f)
      for (double& v : s.field(static_cast<FieldId>(f))) v += 0.05 * rng.normal();
    s.scalar(kThetaPref) += 0.02 * rng.normal();
    draws.draws.push_back(std::move(s));
  }
  const DurationSource durations =
      DurationSource::from_full_table(sim.grid, sim.covariates.duration_min);

  const ArrivalPrediction obs =
      predict_arrival(draws, 2001, sim.covariates.nao[0], EffortMode::observed, durations, 0.0);
  const ArrivalPrediction deb =
      predict_arrival(draws, 2001, sim.covariates.nao[0], EffortMode::infinite, durations, 0.0);
  for (int p = 0; p < sim.grid.n_pixels(); ++p) {
    CHECK(deb.day_q50[p] < obs.day_q50[p]);
    CHECK(deb.day_mean[p] < obs.day_mean[p]);
    CHECK(obs.day_q10[p] <= obs.day_q50[p]);
    CHECK(obs.day_q50[p] <= obs.day_q90[p]);
  }

  // permuting the draws leaves every summary unchanged
  PosteriorDraws shuffled = draws;
  std::shuffle(shuffled.draws.begin(), shuffled.draws.end(), std::mt19937(3));
  const ArrivalPrediction obs2 = predict_arrival(shuffled, 2001, sim.covariates.nao[0],
                                                 EffortMode::observed, durations, 0.0);
  for (int p = 0; p < sim.grid.n_pixels(); ++p) {
    CHECK(obs2.day_q10[p] == obs.day_q10[p]);
    CHECK(obs2.day_q50[p] == obs.day_q50[p]);
    CHECK(obs2.day_q90[p] == obs.day_q90[p]);
  }

  // out-of-range year: the temporal extension still produces valid days
  const ArrivalPrediction next = predict_arrival(draws, 2007, 0.3, EffortMode::observed,
                                                 durations, 0.0);
  for (int p = 0; p < sim.grid.n_pixels(); ++p) {
    CHECK(next.day_q50[p] > 0.0);
    CHECK(next.day_q50[p] <= 366.0);
  }

  CHECK_THROWS(predict_arrival(draws, 2001, std::numeric_limits<double>::quiet_NaN(),
                               EffortMode::observed, durations, 0.0));
}

TEST_CASE("niche mask thresholds") {
  // p_spc = 0.5 everywhere: cloglog predictor = log(-log(0.5))
  LatentState s = flat_state(4, 1);
  const double d_mean = 60.0;
  auto make_draws = [&](double p_target) {
    LatentState v = s;
    // beta_act = 0, x_niche = 0: p = 1 - exp(-exp(beta0_spc))
    v.scalar(kBeta0Spc) = std::log(-std::log(1.0 - p_target));
    PosteriorDraws draws = single_draw_posterior(2, 2, v);
    return draws;
  };
  const DurationSource src = DurationSource::from_full_table(
      single_draw_posterior(2, 2, s).grid, std::vector<double>(4, d_mean));

  const auto unmasked = niche_mask(make_draws(0.5), src, 0.01);
  for (uint8_t m : unmasked) CHECK(m == 0);

  const auto masked = niche_mask(make_draws(0.005), src, 0.01);
  for (uint8_t m : masked) CHECK(m == 1);

  // threshold zero masks nothing
  const auto none = niche_mask(make_draws(0.005), src, 0.0);
  for (uint8_t m : none) CHECK(m == 0);

  // raising the threshold never unmasks
  const auto lo = niche_mask(make_draws(0.03), src, 0.01);
  const auto hi = niche_mask(make_draws(0.03), src, 0.2);
  for (size_t p = 0; p < lo.size(); ++p) CHECK(hi[p] >= lo[p]);
}

TEST_CASE("excursion functions match the brute-force prefix oracle") {
  RngStream rng(11, 0);
  const int D = 10, M = 10000;
  std::vector<std::vector<double>> draws(M, std::vector<double>(D));
  for (auto& row : draws) {
    const double shared = rng.normal();  // induce joint structure
    for (int s = 0; s < D; ++s) row[s] = 0.7 * shared + 0.7 * rng.normal() + 0.1 * s;
  }
  const double u = 0.4;

  for (bool positive : {true, false}) {
    const auto F = excursion_function(draws, u, positive);

    // brute force: marginal ordering, then independent prefix counting
    std::vector<double> marginal(D, 0.0);
    for (const auto& row : draws)
      for (int s = 0; s < D; ++s)
        if (positive ? row[s] > u : row[s] < u) marginal[s] += 1.0;
    for (double& v : marginal) v /= M;
    std::vector<int> order(D);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return marginal[a] > marginal[b]; });
    double prev = 1.0;
    for (int j = 0; j < D; ++j) {
      long long joint = 0;
      for (const auto& row : draws) {
        bool all = true;
        for (int i = 0; i <= j; ++i) {
          const double v = row[order[i]];
          if (!(positive ? v > u : v < u)) {
            all = false;
            break;
          }
        }
        if (all) ++joint;
      }
      const double expect = static_cast<double>(joint) / M;
      CHECK(F[order[j]] == expect);  // exact: same counts, same division
      CHECK(F[order[j]] <= marginal[order[j]]);
      CHECK(F[order[j]] <= prev);
      CHECK(F[order[j]] >= 0.0);
      CHECK(F[order[j]] <= 1.0);
      prev = F[order[j]];
    }
  }

  // D = 1: the function is the marginal probability
  std::vector<std::vector<double>> one(M, std::vector<double>(1));
  long long above = 0;
  for (auto& row : one) {
    row[0] = rng.normal();
    if (row[0] > u) ++above;
  }
  const auto F1 = excursion_function(one, u, true);
  CHECK(F1[0] == static_cast<double>(above) / M);

  // u below everything: F is identically one
  const auto Fall = excursion_function(draws, -100.0, true);
  for (double f : Fall) CHECK(f == 1.0);

  CHECK_THROWS(excursion_function({}, 0.0, true));
}

TEST_CASE("landcover correlations") {
  const int D = 500;
  std::vector<std::array<double, 4>> lc(D);
  RngStream rng(13, 0);
  for (auto& row : lc) {
    double total = 0.0;
    for (double& v : row) {
      v = rng.uniform();
      total += v;
    }
    for (double& v : row) v /= total;
  }

  // the field IS the developed proportion: rho = 1
  std::vector<double> developed(D);
  for (int p = 0; p < D; ++p) developed[p] = lc[p][0];
  auto rho = landcover_correlation(developed, lc);
  REQUIRE(rho[0].has_value());
  CHECK(*rho[0] == doctest::Approx(1.0).epsilon(1e-12));

  // negated forest: rho = -1 against forest
  std::vector<double> neg_forest(D);
  for (int p = 0; p < D; ++p) neg_forest[p] = -lc[p][1];
  rho = landcover_correlation(neg_forest, lc);
  REQUIRE(rho[1].has_value());
  CHECK(*rho[1] == doctest::Approx(-1.0).epsilon(1e-12));

  // an independent field decorrelates
  std::vector<double> noise(D);
  for (double& v : noise) v = rng.normal();
  rho = landcover_correlation(noise, lc);
  for (int c = 0; c < 4; ++c) {
    REQUIRE(rho[c].has_value());
    CHECK(std::abs(*rho[c]) < 0.15);
  }

  // constant field: undefined, flagged as missing
  std::vector<double> constant(D, 2.0);
  rho = landcover_correlation(constant, lc);
  for (int c = 0; c < 4; ++c) CHECK_FALSE(rho[c].has_value());

  // ties get average ranks: a two-level field against itself is still 1
  std::vector<double> two_level(D);
  for (int p = 0; p < D; ++p) two_level[p] = p % 2;
  std::vector<std::array<double, 4>> lc2(D);
  for (int p = 0; p < D; ++p) lc2[p] = {two_level[p], 0.5, 0.5, 0.5};
  rho = landcover_correlation(two_level, lc2);
  REQUIRE(rho[0].has_value());
  CHECK(*rho[0] == doctest::Approx(1.0).epsilon(1e-12));
}
