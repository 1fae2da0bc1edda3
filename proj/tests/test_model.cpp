#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "arrival/common.hpp"
#include "arrival/model.hpp"
#include "arrival/simulate.hpp"

using namespace arrival;

namespace {

SimConfig small_sim_config(int nx, int ny, int t_years, uint64_t seed) {
  SimConfig cfg;
  cfg.nx = nx;
  cfg.ny = ny;
  cfg.years.clear();
  for (int y = 0; y < t_years; ++y) cfg.years.push_back(2001 + y);
  cfg.n_routes = std::max(2, nx * ny / 3);
  cfg.seed = seed;
  return cfg;
}

// a state with every sharing pathway active, mildly perturbed from truth
LatentState perturbed_state(const Model& model, uint64_t seed) {
  LatentState s = model.initial_state();
  RngStream rng(seed, 900);
  for (int f = 0; f < kNumFields; ++f) {
    auto& field = s.field(static_cast<FieldId>(f));
    for (double& v : field) v = 0.3 * rng.normal();
    center_field(&field);
  }
  s.scalar(kBeta0Bbs) = 1.2;
  s.scalar(kBeta0Ckl) = 2.5;
  s.scalar(kBeta0Spc) = -0.4;
  s.scalar(kBetaAct) = -2.0;
  s.scalar(kBeta0GevMu) = 0.5;
  s.scalar(kBeta1GevMu) = 0.05;
  s.scalar(kBeta0GevSigma) = -1.5;
  s.scalar(kThetaEff) = 0.1;
  s.scalar(kThetaPref) = 0.25;
  s.scalar(kThetaAct) = -0.2;
  s.scalar(kThetaNicheGev) = 0.06;
  // mildly positive shape: the support's lower endpoint sits below zero,
  // so every (positive) simulated z stays inside it
  s.scalar(kXi) = 0.1;
  for (int f = 0; f < kNumFields; ++f) s.hyper[f] = {0.8, 70.0};
  s.hyper[static_cast<int>(FieldId::year)] = {0.8, 2.0};
  return s;
}

}  // namespace

TEST_CASE("effort combination") {
  // posterior-mean sharing values: 0 + 0.191 * log(e) - 0.15 / 1 = 0.041
  CHECK(effort_value(0.0, 0.191, -0.15, 1.0, 1.0) ==
        doctest::Approx(0.041).epsilon(1e-14));
  // infinite duration: the activity term vanishes
  CHECK(effort_value(0.3, 0.191, 123.0, 2.0, 0.0) ==
        doctest::Approx(0.3 + 0.191 * 2.0).epsilon(1e-14));
  CHECK(effort_value(0.0, 0.0, 0.0, 5.0, 0.1) == 0.0);
  CHECK_THROWS(effort_value(0.0, 0.1, 0.1, 1.0, -2.0));
}

TEST_CASE("saturating sharing function") {
  CHECK(saturating_g(0.0, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  // frozen: g(ln 2, ln 3) = 2 / (1 + 1/3) = 1.5
  CHECK(saturating_g(std::log(2.0), std::log(3.0)) == doctest::Approx(1.5).epsilon(1e-14));
  // saturation limit
  CHECK(saturating_g(0.7, 60.0) == doctest::Approx(std::exp(0.7)).epsilon(1e-12));

  // strictly increasing in both arguments, always positive
  double prev = 0.0;
  for (double xe = -6.0; xe <= 6.0; xe += 0.25) {
    const double g = saturating_g(0.3, xe);
    CHECK(g > 0.0);
    CHECK(g > prev);
    CHECK(g < std::exp(0.3));
    prev = g;
  }
  for (double xb : {-1.0, 0.0, 2.0})
    CHECK(saturating_g(xb + 0.1, 0.4) > saturating_g(xb, 0.4));

  // the two partials used by the gradients
  const double h = 1e-6;
  for (double xb : {-0.5, 0.8})
    for (double xe : {-2.0, 0.0, 1.5}) {
      const double g = saturating_g(xb, xe);
      const double fd_bound = (saturating_g(xb + h, xe) - saturating_g(xb - h, xe)) / (2 * h);
      const double fd_eff = (saturating_g(xb, xe + h) - saturating_g(xb, xe - h)) / (2 * h);
      CHECK(fd_bound == doctest::Approx(g).epsilon(1e-8));  // dg/dx_bound = g
      CHECK(fd_eff == doctest::Approx(saturating_g_deffort(g, xe)).epsilon(1e-8));
    }
}

TEST_CASE("predictors at the zero state") {
  SimConfig cfg = small_sim_config(2, 2, 1, 3);
  SimData sim = simulate_dataset(cfg);
  for (double& v : sim.tables.nao) v = 0.0;
  ModelConfig mc;
  Model model(sim.grid, sim.tables, mc);
  LatentState zero = model.initial_state();

  const PredictorValues pv = model.predictors(zero, EffortDurations::infinite);
  for (int p = 0; p < sim.grid.n_pixels(); ++p) {
    CHECK(pv.log_lambda_bbs[p] == 0.0);  // lambda_bbs = 1
    CHECK(pv.log_sigma[p] == 0.0);       // sigma = 1
    for (int t = 0; t < sim.grid.n_years(); ++t) {
      const int c = sim.grid.cell(p, t);
      // lambda_ckl = area/400
      CHECK(std::exp(pv.log_lambda_ckl[c]) ==
            doctest::Approx(sim.grid.pixels[p].area_km2 / 400.0).epsilon(1e-12));
      // mu = g(0, 0) = 0.5 at theta_eff = 0 with vanished activity
      CHECK(pv.mu[c] == doctest::Approx(0.5).epsilon(1e-12));
      if (sim.tables.n_ckl[c] > 0) {
        // cloglog predictor 0 means p_spc = 1 - exp(-1)
        CHECK(-std::expm1(-std::exp(pv.spc_predictor[c])) ==
              doctest::Approx(0.63212055882855768).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("niche sharing arithmetic and NAO monotonicity") {
  SimConfig cfg = small_sim_config(2, 2, 1, 5);
  SimData sim = simulate_dataset(cfg);
  ModelConfig mc;
  Model model(sim.grid, sim.tables, mc);

  LatentState s = model.initial_state();
  s.scalar(kThetaNicheGev) = 0.049;  // reported posterior mean
  s.x_niche.assign(sim.grid.n_pixels(), 0.0);
  s.x_niche[1] = 2.0;  // uncentered on purpose: isolates the shared term
  const PredictorValues pv = model.predictors(s, EffortDurations::infinite);
  const int c0 = sim.grid.cell(0, 0), c1 = sim.grid.cell(1, 0);
  // x_bound gains exactly 0.049 * 2 = 0.098 at pixel 1
  CHECK(std::log(pv.mu[c1]) - std::log(pv.mu[c0]) ==
        doctest::Approx(0.098).epsilon(1e-10));

  // larger NAO with a positive coefficient raises mu
  LatentState a = model.initial_state();
  a.scalar(kBeta1GevMu) = 0.4;
  auto tables_hi = sim.tables;
  tables_hi.nao[0] = sim.tables.nao[0] + 1.0;
  Model model_hi(sim.grid, tables_hi, mc);
  const double mu_lo = model.predictors(a, EffortDurations::infinite).mu[c0];
  const double mu_hi = model_hi.predictors(a, EffortDurations::infinite).mu[c0];
  CHECK(mu_hi > mu_lo);
}

TEST_CASE("joint posterior: hand-computed single Poisson cell") {
  // one pixel, one year, N^ckl = 2, area 400 km^2, everything else empty
  std::vector<Pixel> px = {{0, 0.0, 0.0, 0, 0, 400.0}};
  PixelGrid grid = make_grid(px, {2001}, 20.0);
  ResponseTables tables;
  tables.init(1, 1);
  tables.n_ckl[0] = 2;
  tables.median_duration[0] = 30.0;
  tables.n_spc[0] = 0;
  tables.nao[0] = 0.0;
  ModelConfig mc;
  mc.use_bbs = mc.use_spc = mc.use_gev = false;
  Model model(grid, tables, mc);
  LatentState zero = model.initial_state();
  // log lambda = 0: term = 2*0 - 1 - log 2
  CHECK(model.breakdown(zero).ckl == doctest::Approx(-1.6931471805599453).epsilon(1e-14));
}

TEST_CASE("posterior decomposes additively over data tables") {
  SimConfig cfg = small_sim_config(3, 3, 2, 11);
  SimData sim = simulate_dataset(cfg);
  LatentState s;
  {
    ModelConfig mc;
    Model model(sim.grid, sim.tables, mc);
    s = perturbed_state(model, 4);
    const PosteriorBreakdown full = model.breakdown(s);
    CHECK(std::isfinite(full.total()));

    for (int drop = 0; drop < 4; ++drop) {
      ModelConfig mc2;
      if (drop == 0) mc2.use_bbs = false;
      if (drop == 1) mc2.use_ckl = false;
      if (drop == 2) mc2.use_spc = false;
      if (drop == 3) mc2.use_gev = false;
      Model reduced(sim.grid, sim.tables, mc2);
      const double removed = drop == 0   ? full.bbs
                             : drop == 1 ? full.ckl
                             : drop == 2 ? full.spc
                                         : full.gev;
      CHECK(reduced.joint_log_posterior(s) ==
            doctest::Approx(full.total() - removed).epsilon(1e-12));
    }
  }
}

TEST_CASE("gev-only configuration excludes count terms and freezes sharing") {
  SimConfig cfg = small_sim_config(3, 3, 2, 13);
  SimData sim = simulate_dataset(cfg);
  ModelConfig mc;
  mc.gev_only = true;
  Model model(sim.grid, sim.tables, mc);
  CHECK_FALSE(model.field_active(FieldId::pref));
  CHECK_FALSE(model.field_active(FieldId::niche));
  CHECK(model.field_active(FieldId::gev_mu));
  CHECK(model.scalar_block(ScalarBlockId::sharing).empty());
  CHECK(model.scalar_block(ScalarBlockId::counts).empty());
  CHECK(model.scalar_block(ScalarBlockId::gev).size() == 4);

  LatentState s = model.initial_state();
  const PosteriorBreakdown b = model.breakdown(s);
  CHECK(b.bbs == 0.0);
  CHECK(b.ckl == 0.0);
  CHECK(b.spc == 0.0);
  CHECK(b.gev != 0.0);
  CHECK_THROWS(model.block_gradient(s, FieldId::pref, nullptr));
}

TEST_CASE("xi truncation zeroes the posterior") {
  SimConfig cfg = small_sim_config(2, 2, 1, 17);
  SimData sim = simulate_dataset(cfg);
  ModelConfig mc;
  Model model(sim.grid, sim.tables, mc);
  LatentState s = model.initial_state();
  s.scalar(kXi) = -1.2;
  CHECK(model.joint_log_posterior(s) == -std::numeric_limits<double>::infinity());
  s.scalar(kXi) = 0.7;
  CHECK(model.joint_log_posterior(s) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("prior-only gradient equals the Vecchia prior gradient") {
  SimConfig cfg = small_sim_config(3, 3, 2, 19);
  SimData sim = simulate_dataset(cfg);
  ModelConfig mc;
  mc.use_bbs = mc.use_ckl = mc.use_spc = mc.use_gev = false;
  Model model(sim.grid, sim.tables, mc);
  LatentState s = perturbed_state(model, 7);

  for (FieldId f : {FieldId::pref, FieldId::niche, FieldId::gev_mu}) {
    std::vector<double> g, prior;
    model.block_gradient(s, f, &g);
    model.factor(f, s.hyper[static_cast<int>(f)]).gradient(s.field(f), &prior);
    for (size_t i = 0; i < g.size(); ++i) CHECK(g[i] == prior[i]);
  }
}

TEST_CASE("with sharing at zero the GEV terms ignore x_pref and x_niche") {
  SimConfig cfg = small_sim_config(3, 3, 2, 23);
  SimData sim = simulate_dataset(cfg);
  ModelConfig mc;
  mc.use_bbs = mc.use_ckl = mc.use_spc = false;  // GEV data only
  Model model(sim.grid, sim.tables, mc);
  LatentState s = perturbed_state(model, 8);
  s.scalar(kThetaPref) = 0.0;
  s.scalar(kThetaAct) = 0.0;
  s.scalar(kThetaNicheGev) = 0.0;

  for (FieldId f : {FieldId::pref, FieldId::niche, FieldId::year}) {
    std::vector<double> g, prior;
    model.block_gradient(s, f, &g);
    model.factor(f, s.hyper[static_cast<int>(f)]).gradient(s.field(f), &prior);
    for (size_t i = 0; i < g.size(); ++i) CHECK(g[i] == prior[i]);
  }
}

TEST_CASE("block gradients match finite differences (synthetic instance)") {
  SimConfig cfg = small_sim_config(3, 3, 2, 29);
  SimData sim = simulate_dataset(cfg);
  ModelConfig mc;
  Model model(sim.grid, sim.tables, mc);
  LatentState s = perturbed_state(model, 5);
  REQUIRE(std::isfinite(model.joint_log_posterior(s)));

  const double h = 1e-5;
  for (int f = 0; f < kNumFields; ++f) {
    const FieldId id = static_cast<FieldId>(f);
    std::vector<double> grad;
    model.block_gradient(s, id, &grad);
    auto& field = s.field(id);
    for (size_t i = 0; i < field.size(); ++i) {
      const double saved = field[i];
      field[i] = saved + h;
      const double up = model.joint_log_posterior(s);
      field[i] = saved - h;
      const double dn = model.joint_log_posterior(s);
      field[i] = saved;
      const double fd = (up - dn) / (2 * h);
      CAPTURE(kFieldNames[f]);
      CAPTURE(i);
      CHECK(std::abs(grad[i] - fd) <= 1e-4 * std::max({std::abs(grad[i]), std::abs(fd), 1.0}));
    }
  }
}

TEST_CASE("mu stays inside (0, exp(x_bound)) and grows with effort") {
  SimConfig cfg = small_sim_config(3, 3, 2, 31);
  SimData sim = simulate_dataset(cfg);
  ModelConfig mc;
  Model model(sim.grid, sim.tables, mc);
  LatentState s = perturbed_state(model, 6);
  s.scalar(kThetaAct) = -0.4;  // negative activity: removing it raises effort

  const PredictorValues obs = model.predictors(s, EffortDurations::observed);
  const PredictorValues inf = model.predictors(s, EffortDurations::infinite);
  for (int p = 0; p < sim.grid.n_pixels(); ++p) {
    for (int t = 0; t < sim.grid.n_years(); ++t) {
      const int c = sim.grid.cell(p, t);
      const double x_bound =
          s.scalar(kBeta0GevMu) + s.x_gev_mu[p] + s.scalar(kBeta1GevMu) * sim.tables.nao[t] +
          s.scalar(kThetaNicheGev) * s.x_niche[p];
      CHECK(inf.mu[c] > 0.0);
      CHECK(inf.mu[c] < std::exp(x_bound));
      if (!std::isnan(obs.mu[c])) CHECK(obs.mu[c] < inf.mu[c]);
    }
  }
}
