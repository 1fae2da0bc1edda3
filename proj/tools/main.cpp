// arrival: spatiotemporal fusion of species-observation tables with
// GEV-distributed first arrivals, MALA-within-Gibbs inference, and
// bias-corrected prediction.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>

#include "arrival/common.hpp"
#include "arrival/config.hpp"
#include "arrival/csv.hpp"
#include "arrival/io.hpp"
#include "arrival/mcmc.hpp"
#include "arrival/model.hpp"
#include "arrival/posterior.hpp"
#include "arrival/simulate.hpp"
#include "arrival/tables.hpp"

namespace fs = std::filesystem;
using namespace arrival;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string run_dir;
  uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool gev_only = false;
};

Config load_config(const CommonArgs& args) {
  if (args.config_path.empty()) return Config{};
  return Config::parse_file(args.config_path);
}

InputPaths input_paths(const Config& cfg) {
  const std::string dir = cfg.get_string("inputs.dir", ".");
  InputPaths p = InputPaths::in_dir(dir);
  p.pixels = cfg.get_string("inputs.pixels", p.pixels);
  p.checklists = cfg.get_string("inputs.checklists", p.checklists);
  p.occurrences = cfg.get_string("inputs.occurrences", p.occurrences);
  p.bbs = cfg.get_string("inputs.bbs", p.bbs);
  p.bbs_segments = cfg.get_string("inputs.bbs_segments", p.bbs_segments);
  p.nao = cfg.get_string("inputs.nao", p.nao);
  p.landcover = cfg.get_string("inputs.landcover", p.landcover);
  return p;
}

ModelConfig model_config(const Config& cfg, const CommonArgs& args) {
  ModelConfig m;
  m.gev_only = cfg.get_flag("model.gev_only", m.gev_only) || args.gev_only;
  m.share_niche_gev = cfg.get_flag("model.share_niche_gev", m.share_niche_gev);
  m.area_baseline_km2 = cfg.get_number("model.area_baseline_km2", m.area_baseline_km2);
  m.xi_lower = cfg.get_number("model.xi_lower", m.xi_lower);
  m.xi_upper = cfg.get_number("model.xi_upper", m.xi_upper);
  m.scalar_prior_sd = cfg.get_number("model.scalar_prior_sd", m.scalar_prior_sd);
  m.vecchia_k = static_cast<int>(cfg.get_integer("model.vecchia_k", m.vecchia_k));
  m.pc_spatial.range0 = cfg.get_number("model.pc.spatial.range0_km", m.pc_spatial.range0);
  m.pc_spatial.alpha_range =
      cfg.get_number("model.pc.spatial.alpha_range", m.pc_spatial.alpha_range);
  m.pc_spatial.sd0 = cfg.get_number("model.pc.spatial.sd0", m.pc_spatial.sd0);
  m.pc_spatial.alpha_sd = cfg.get_number("model.pc.spatial.alpha_sd", m.pc_spatial.alpha_sd);
  m.pc_temporal.range0 = cfg.get_number("model.pc.temporal.range0_years", m.pc_temporal.range0);
  m.pc_temporal.alpha_range =
      cfg.get_number("model.pc.temporal.alpha_range", m.pc_temporal.alpha_range);
  m.pc_temporal.sd0 = cfg.get_number("model.pc.temporal.sd0", m.pc_temporal.sd0);
  m.pc_temporal.alpha_sd = cfg.get_number("model.pc.temporal.alpha_sd", m.pc_temporal.alpha_sd);
  return m;
}

ChainConfig chain_config(const Config& cfg, const CommonArgs& args) {
  ChainConfig c;
  c.iterations = cfg.get_integer("chain.iterations", c.iterations);
  c.burn_in = cfg.get_integer("chain.burn_in", c.burn_in);
  c.thin = cfg.get_integer("chain.thin", c.thin);
  c.seed = static_cast<uint64_t>(cfg.get_integer("chain.seed", 1));
  if (args.seed_set) c.seed = args.seed;
  c.adapt_horizon = cfg.get_integer("chain.adapt_horizon", c.adapt_horizon);
  c.target_accept_mala = cfg.get_number("chain.target_accept_mala", c.target_accept_mala);
  c.target_accept_rw = cfg.get_number("chain.target_accept_rw", c.target_accept_rw);
  c.init_step_field = cfg.get_number("chain.step.field", c.init_step_field);
  c.init_step_scalar = cfg.get_number("chain.step.scalar", c.init_step_scalar);
  c.init_step_hyper = cfg.get_number("chain.step.hyper", c.init_step_hyper);
  c.staged_init = cfg.get_flag("chain.staged_init", c.staged_init);
  c.staged_iterations = cfg.get_integer("chain.staged_iterations", c.staged_iterations);
  return c;
}

SimConfig sim_config(const Config& cfg, const CommonArgs& args) {
  SimConfig s;
  s.nx = static_cast<int>(cfg.get_integer("sim.nx", s.nx));
  s.ny = static_cast<int>(cfg.get_integer("sim.ny", s.ny));
  s.pixel_width_km = cfg.get_number("sim.pixel_width_km", s.pixel_width_km);
  s.lon0 = cfg.get_number("sim.lon0", s.lon0);
  s.lat0 = cfg.get_number("sim.lat0", s.lat0);
  if (cfg.has("sim.years")) s.years = cfg.get_int_list("sim.years");
  s.overdispersion_r = cfg.get_number("sim.r", s.overdispersion_r);
  if (cfg.has("sim.nao")) s.nao = cfg.get_number_list("sim.nao");
  s.duration_log_mean = cfg.get_number("sim.duration_log_mean", s.duration_log_mean);
  s.duration_log_sd = cfg.get_number("sim.duration_log_sd", s.duration_log_sd);
  s.n_routes = static_cast<int>(cfg.get_integer("sim.n_routes", s.n_routes));
  s.min_stops = static_cast<int>(cfg.get_integer("sim.min_stops", s.min_stops));
  s.vecchia_k = static_cast<int>(cfg.get_integer("model.vecchia_k", s.vecchia_k));
  s.seed = static_cast<uint64_t>(cfg.get_integer("sim.seed", 1));
  if (args.seed_set) s.seed = args.seed;
  for (int i = 0; i < kNumScalars; ++i)
    s.true_scalars[i] = cfg.get_number(cat("sim.true.", kScalarNames[i]), s.true_scalars[i]);
  for (int f = 0; f < kNumFields; ++f) {
    s.true_hyper[f].sd = cfg.get_number(cat("sim.true.sd_", kFieldNames[f]), s.true_hyper[f].sd);
    s.true_hyper[f].range =
        cfg.get_number(cat("sim.true.range_", kFieldNames[f]), s.true_hyper[f].range);
  }
  return s;
}

void print_default_config() {
  const ModelConfig m;
  const ChainConfig c;
  const SimConfig s;
  std::cout
      << "# arrival run configuration (key = value; '#' comments)\n"
      << "inputs.dir = .\n"
      << "# model.years =            # e.g. 2001:2021; empty infers from checklists\n"
      << "model.pixel_width_km = 20\n"
      << "model.gev_only = false\n"
      << "model.share_niche_gev = true\n"
      << "model.area_baseline_km2 = " << m.area_baseline_km2 << "\n"
      << "model.xi_lower = " << m.xi_lower << "\n"
      << "model.xi_upper = " << m.xi_upper << "\n"
      << "model.scalar_prior_sd = " << m.scalar_prior_sd << "\n"
      << "model.vecchia_k = " << m.vecchia_k << "\n"
      << "model.pc.spatial.range0_km = " << m.pc_spatial.range0 << "\n"
      << "model.pc.spatial.alpha_range = " << m.pc_spatial.alpha_range << "\n"
      << "model.pc.spatial.sd0 = " << m.pc_spatial.sd0 << "\n"
      << "model.pc.spatial.alpha_sd = " << m.pc_spatial.alpha_sd << "\n"
      << "model.pc.temporal.range0_years = " << m.pc_temporal.range0 << "\n"
      << "model.pc.temporal.alpha_range = " << m.pc_temporal.alpha_range << "\n"
      << "model.pc.temporal.sd0 = " << m.pc_temporal.sd0 << "\n"
      << "model.pc.temporal.alpha_sd = " << m.pc_temporal.alpha_sd << "\n"
      << "chain.iterations = " << c.iterations << "\n"
      << "chain.burn_in = " << c.burn_in << "\n"
      << "chain.thin = " << c.thin << "\n"
      << "chain.seed = 1\n"
      << "chain.adapt_horizon = -1   # -1 adapts through the burn-in\n"
      << "chain.target_accept_mala = " << c.target_accept_mala << "\n"
      << "chain.target_accept_rw = " << c.target_accept_rw << "\n"
      << "chain.step.field = " << c.init_step_field << "\n"
      << "chain.step.scalar = " << c.init_step_scalar << "\n"
      << "chain.step.hyper = " << c.init_step_hyper << "\n"
      << "chain.staged_init = true\n"
      << "chain.staged_iterations = " << c.staged_iterations << "\n"
      << "predict.year = 0\n"
      << "predict.mode = observed    # or infinite\n"
      << "predict.mask_threshold = 0.01\n"
      << "# predict.nao =            # override; default looks up nao.csv\n"
      << "excursions.field = x_niche\n"
      << "excursions.u = 0\n"
      << "excursions.sign = positive # or negative\n"
      << "sim.nx = " << s.nx << "\n"
      << "sim.ny = " << s.ny << "\n"
      << "sim.years = 2001:2006\n"
      << "sim.r = " << s.overdispersion_r << "     # <= 0 for pure Poisson counts\n"
      << "sim.n_routes = " << s.n_routes << "\n"
      << "sim.seed = 1\n"
      << "study.replicates = 0       # > 0: simulate runs the recovery study\n"
      << "study.check_cells = 50\n"
      << "study.interval = 0.8\n";
}

RunManifest start_manifest(const std::string& command, const CommonArgs& args, uint64_t seed) {
  RunManifest man;
  man.command = command;
  man.config_path = args.config_path;
  if (!args.config_path.empty()) man.config_hash = file_hash(args.config_path);
  man.seed = seed;
  man.version = kVersionString;
  man.started_utc = utc_now();
  return man;
}

void add_input_hashes(RunManifest* man, const InputPaths& p) {
  for (const std::string& f :
       {p.pixels, p.checklists, p.occurrences, p.bbs, p.bbs_segments, p.nao})
    man->input_hashes.emplace_back(f, file_hash(f));
  std::ifstream probe(p.landcover);
  if (probe.good()) man->input_hashes.emplace_back(p.landcover, file_hash(p.landcover));
}

void finish_manifest(RunManifest man, const std::string& out_dir,
                     std::vector<std::string> outputs, const ChainConfig* chain = nullptr) {
  man.outputs = std::move(outputs);
  man.finished_utc = utc_now();
  const std::string path = out_dir + "/manifest.json";
  man.write(path);
  if (chain) {
    // the chain protocol rides along for `diagnose`
    nlohmann::json j;
    {
      std::ifstream in(path);
      in >> j;
    }
    j["chain"] = {{"iterations", chain->iterations},
                  {"burn_in", chain->burn_in},
                  {"thin", chain->thin}};
    std::ofstream out(path);
    out << j.dump(2) << "\n";
  }
}

std::pair<PixelGrid, ResponseTables> load_and_aggregate(const Config& cfg) {
  const InputPaths paths = input_paths(cfg);
  std::vector<int> years = cfg.get_int_list("model.years");
  const double width = cfg.get_number("model.pixel_width_km", 20.0);
  RawInputs inputs = load_inputs(paths, years, width);
  AggregateStats stats;
  ResponseTables tables = build_tables(inputs, &stats);
  return {std::move(inputs.grid), std::move(tables)};
}

int cmd_ingest(const CommonArgs& args) {
  const Config cfg = load_config(args);
  RunManifest man = start_manifest("ingest", args, 0);
  add_input_hashes(&man, input_paths(cfg));
  auto [grid, tables] = load_and_aggregate(cfg);
  fs::create_directories(args.out_dir);
  const std::string out = args.out_dir + "/tables.csv";
  write_tables_csv(out, grid, tables);
  long long n_z = 0;
  for (int c = 0; c < grid.n_cells(); ++c)
    if (tables.has_z(c)) ++n_z;
  std::cout << "ingested " << grid.n_pixels() << " pixels x " << grid.n_years() << " years; "
            << tables.routes.size() << " route-years; " << n_z << " first-arrival cells\n";
  finish_manifest(std::move(man), args.out_dir, {out});
  return 0;
}

int cmd_simulate(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const SimConfig sim_cfg = sim_config(cfg, args);
  RunManifest man = start_manifest("simulate", args, sim_cfg.seed);
  fs::create_directories(args.out_dir);

  const long long replicates = cfg.get_integer("study.replicates", 0);
  if (replicates > 0) {
    RecoveryConfig rc;
    rc.sim = sim_cfg;
    rc.chain = chain_config(cfg, args);
    rc.model = model_config(cfg, args);
    rc.replicates = static_cast<int>(replicates);
    rc.check_cells = static_cast<int>(cfg.get_integer("study.check_cells", rc.check_cells));
    rc.interval = cfg.get_number("study.interval", rc.interval);
    rc.threads = args.threads > 0 ? args.threads : 1;
    rc.seed = sim_cfg.seed;
    const RecoveryReport report = run_recovery_study(rc);
    const std::string rec = args.out_dir + "/recovery.csv";
    const std::string box = args.out_dir + "/boxplot_data.csv";
    write_recovery_csv(rec, box, report);
    int failed = 0;
    for (const auto& r : report.replicates)
      if (r.failed) ++failed;
    std::cout << "recovery study: " << report.replicates.size() << " replicates, " << failed
              << " failed\n";
    finish_manifest(std::move(man), args.out_dir, {rec, box});
    return 0;
  }

  const SimData sim = simulate_dataset(sim_cfg);
  write_sim_csv(args.out_dir, sim);
  std::cout << "simulated " << sim.grid.n_pixels() << " pixels x " << sim.grid.n_years()
            << " years; " << sim.checklists.size() << " checklists; " << sim.occurrences.size()
            << " occurrence records\n";
  finish_manifest(std::move(man), args.out_dir,
                  {args.out_dir + "/pixels.csv", args.out_dir + "/checklists.csv",
                   args.out_dir + "/occurrences.csv", args.out_dir + "/bbs.csv",
                   args.out_dir + "/bbs_segments.csv", args.out_dir + "/nao.csv",
                   args.out_dir + "/landcover.csv", args.out_dir + "/truth.bin",
                   args.out_dir + "/durations_full.csv"});
  return 0;
}

int cmd_fit(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const ChainConfig chain_cfg = chain_config(cfg, args);
  RunManifest man = start_manifest("fit", args, chain_cfg.seed);
  add_input_hashes(&man, input_paths(cfg));

  auto [grid, tables] = load_and_aggregate(cfg);
  const ModelConfig mc = model_config(cfg, args);
  Model model(grid, tables, mc);
  const ChainOutput chain = run_chain(model, chain_cfg);

  fs::create_directories(args.out_dir);
  const std::string draws_path = args.out_dir + "/draws.bin";
  const std::string trace_path = args.out_dir + "/trace.csv";
  const std::string diag_path = args.out_dir + "/diagnostics.csv";
  write_draws(draws_path, grid, chain.draws, mc.gev_only);
  write_trace_csv(trace_path, chain);
  write_diagnostics_csv(diag_path, chain);
  std::cout << "fit: " << chain.draws.size() << " draws recorded (iterations="
            << chain.iterations << ", burn_in=" << chain.burn_in << ", thin=" << chain.thin
            << ", seed=" << chain.seed << ")\n";
  finish_manifest(std::move(man), args.out_dir, {draws_path, trace_path, diag_path},
                  &chain_cfg);
  return 0;
}

PosteriorDraws load_run_draws(const CommonArgs& args, const Config& cfg) {
  if (args.run_dir.empty())
    throw ValidationError("this command needs --run <fit output directory>");
  const DrawsFile file = read_draws(args.run_dir + "/draws.bin");
  const InputPaths paths = input_paths(cfg);
  RawInputs inputs =
      load_inputs(paths, file.years, cfg.get_number("model.pixel_width_km", 20.0));
  if (inputs.grid.n_pixels() != file.n_pixels)
    throw ValidationError(cat("draws.bin has ", file.n_pixels, " pixels but ", paths.pixels,
                              " defines ", inputs.grid.n_pixels()));
  PosteriorDraws draws;
  draws.grid = std::move(inputs.grid);
  draws.draws = std::move(file.draws);
  draws.gev_only = file.gev_only;
  draws.area_baseline_km2 = cfg.get_number("model.area_baseline_km2", 400.0);
  if (draws.draws.empty()) throw ValidationError("run contains no posterior draws");
  return draws;
}

int cmd_predict(const CommonArgs& args) {
  const Config cfg = load_config(args);
  RunManifest man = start_manifest("predict", args, 0);
  const PosteriorDraws draws = load_run_draws(args, cfg);

  const int year = static_cast<int>(cfg.get_integer("predict.year", 0));
  if (year == 0) throw ValidationError("predict.year must be set in the config");
  const std::string mode_str = cfg.get_string("predict.mode", "observed");
  EffortMode mode;
  if (mode_str == "observed")
    mode = EffortMode::observed;
  else if (mode_str == "infinite")
    mode = EffortMode::infinite;
  else
    throw ValidationError(cat("predict.mode must be observed or infinite, got ", mode_str));
  const double threshold = cfg.get_number("predict.mask_threshold", 0.01);

  double nao = cfg.get_number("predict.nao", std::numeric_limits<double>::quiet_NaN());
  if (std::isnan(nao)) {
    CsvReader nao_csv(input_paths(cfg).nao);
    const int c_year = nao_csv.column("year");
    const int c_value = nao_csv.column("value");
    while (nao_csv.next_row()) {
      if (nao_csv.integer(c_year) == year) {
        nao = nao_csv.number(c_value);
        break;
      }
    }
    if (std::isnan(nao))
      throw ValidationError(
          cat("no NAO value for year ", year, "; provide predict.nao or extend nao.csv"));
  }

  // observed durations aggregated from the checklist table
  auto [grid2, tables] = load_and_aggregate(cfg);
  (void)grid2;
  const DurationSource durations = DurationSource::from_tables(draws.grid, tables);

  const ArrivalPrediction pred = predict_arrival(draws, year, nao, mode, durations, threshold);
  fs::create_directories(args.out_dir);
  const std::string out = args.out_dir + "/arrival_pred.csv";
  CsvWriter csv(out, {"pixel_id", "year", "mode", "q10", "q50", "q90", "masked"});
  for (int p = 0; p < draws.grid.n_pixels(); ++p) {
    csv.row({CsvWriter::num(p), CsvWriter::num(year),
             mode == EffortMode::infinite ? "infinite" : "observed",
             CsvWriter::num(pred.day_q10[p]), CsvWriter::num(pred.day_q50[p]),
             CsvWriter::num(pred.day_q90[p]),
             CsvWriter::num(static_cast<long long>(pred.masked[p]))});
  }
  std::cout << "predicted year " << year << " in " << mode_str << " mode ("
            << draws.draws.size() << " draws)\n";
  finish_manifest(std::move(man), args.out_dir, {out});
  return 0;
}

int cmd_excursions(const CommonArgs& args) {
  const Config cfg = load_config(args);
  RunManifest man = start_manifest("excursions", args, 0);
  const PosteriorDraws draws = load_run_draws(args, cfg);

  const std::string field_name = cfg.get_string("excursions.field", "x_niche");
  int field_idx = -1;
  for (int f = 0; f < kNumFields; ++f)
    if (field_name == kFieldNames[f]) field_idx = f;
  if (field_idx < 0 || static_cast<FieldId>(field_idx) == FieldId::year)
    throw ValidationError(cat("excursions.field must name a spatial field, got ", field_name));
  const double u = cfg.get_number("excursions.u", 0.0);
  const std::string sign = cfg.get_string("excursions.sign", "positive");
  if (sign != "positive" && sign != "negative")
    throw ValidationError(cat("excursions.sign must be positive or negative, got ", sign));

  const auto matrix = field_draw_matrix(draws, static_cast<FieldId>(field_idx));
  const auto F = excursion_function(matrix, u, sign == "positive");

  fs::create_directories(args.out_dir);
  const std::string out = args.out_dir + "/excursions.csv";
  CsvWriter csv(out, {"pixel_id", "field", "u", "sign", "F"});
  for (int p = 0; p < draws.grid.n_pixels(); ++p)
    csv.row({CsvWriter::num(p), field_name, CsvWriter::num(u), sign, CsvWriter::num(F[p])});
  std::cout << "excursion function for " << field_name << " at u=" << u << " (" << sign << ")\n";
  finish_manifest(std::move(man), args.out_dir, {out});
  return 0;
}

int cmd_correlate(const CommonArgs& args) {
  const Config cfg = load_config(args);
  RunManifest man = start_manifest("correlate", args, 0);
  const PosteriorDraws draws = load_run_draws(args, cfg);

  const InputPaths paths = input_paths(cfg);
  RawInputs inputs =
      load_inputs(paths, draws.grid.years, cfg.get_number("model.pixel_width_km", 20.0));
  if (inputs.landcover.empty()) throw ValidationError(cat("correlate needs ", paths.landcover));

  fs::create_directories(args.out_dir);
  const std::string out = args.out_dir + "/landcover_corr.csv";
  CsvWriter csv(out, {"field", "class", "rho"});
  for (FieldId f : {FieldId::pref, FieldId::niche, FieldId::gev_mu, FieldId::gev_sigma}) {
    std::vector<double> mean(draws.grid.n_pixels(), 0.0);
    for (const auto& s : draws.draws)
      for (int p = 0; p < draws.grid.n_pixels(); ++p) mean[p] += s.field(f)[p];
    for (double& v : mean) v /= draws.draws.size();
    const auto rho = landcover_correlation(mean, inputs.landcover);
    for (int c = 0; c < 4; ++c) {
      csv.row({kFieldNames[static_cast<int>(f)], kLandcoverClasses[c],
               rho[c] ? CsvWriter::num(*rho[c]) : ""});
      if (!rho[c])
        warn(cat("correlation undefined (constant input) for ", kFieldNames[static_cast<int>(f)],
                 " vs ", kLandcoverClasses[c]));
    }
  }
  std::cout << "land-cover correlations written\n";
  finish_manifest(std::move(man), args.out_dir, {out});
  return 0;
}

int cmd_diagnose(const CommonArgs& args) {
  if (args.run_dir.empty())
    throw ValidationError("diagnose needs --run <fit output directory>");
  const std::string trace_path = args.run_dir + "/trace.csv";
  {
    std::ifstream probe(trace_path);
    if (!probe.good()) throw ValidationError(cat(trace_path, ": missing trace"));
  }

  long long burn_in = 0;
  {
    std::ifstream in(args.run_dir + "/manifest.json");
    if (in.good()) {
      nlohmann::json j;
      in >> j;
      if (j.contains("chain")) burn_in = j["chain"]["burn_in"].get<long long>();
    } else {
      warn("no manifest.json in run dir; treating the whole trace as post burn-in");
    }
  }

  CsvReader trace(trace_path);
  std::map<std::string, int> scalar_cols;
  for (const char* name : kScalarNames) scalar_cols[name] = trace.column(name);
  std::map<std::string, int> acc_cols;
  for (const char* name : block_names())
    if (auto col = trace.find_column(cat("acc_", name))) acc_cols[name] = *col;
  const int c_iter = trace.column("iteration");

  std::map<std::string, std::vector<double>> series;
  std::map<std::string, std::pair<long long, long long>> acc;  // accepted, ran
  long long rows = 0;
  while (trace.next_row()) {
    ++rows;
    if (trace.integer(c_iter) <= burn_in) continue;
    for (const auto& [name, col] : scalar_cols) series[name].push_back(trace.number(col));
    for (const auto& [name, col] : acc_cols) {
      if (trace.empty_field(col)) continue;
      acc[name].second += 1;
      acc[name].first += trace.integer(col);
    }
  }
  if (series.empty() || series.begin()->second.empty())
    throw ValidationError(
        cat("run has no post burn-in draws (burn_in=", burn_in, ", trace rows=", rows, ")"));

  const std::string out_dir = args.out_dir.empty() ? args.run_dir : args.out_dir;
  fs::create_directories(out_dir);
  const std::string out = out_dir + "/diagnose.csv";
  CsvWriter csv(out, {"metric", "name", "value"});
  std::cout << "scalar ESS (post burn-in, " << series.begin()->second.size()
            << " iterations):\n";
  for (const char* name : kScalarNames) {
    const auto& s = series[name];
    double ess = 0.0;
    if (s.size() >= 10) {
      const EssResult r = effective_sample_size(s);
      ess = r.degenerate ? 0.0 : r.ess;
      if (r.degenerate) warn(cat("trace for ", name, " is constant; ESS reported as 0"));
    }
    csv.row({"ess", name, CsvWriter::num(ess)});
    std::cout << "  " << name << ": " << ess << "\n";
  }
  for (const auto& [name, counts] : acc) {
    const double rate =
        counts.second > 0 ? static_cast<double>(counts.first) / counts.second : 0.0;
    csv.row({"accept_rate", name, CsvWriter::num(rate)});
  }
  csv.row({"chain", "burn_in", CsvWriter::num(burn_in)});

  // tidy long-format trace for plotting
  const std::string tidy = out_dir + "/trace_tidy.csv";
  CsvWriter tcsv(tidy, {"iteration", "scalar", "value", "post_burn_in"});
  CsvReader trace2(trace_path);
  const int c_iter2 = trace2.column("iteration");
  while (trace2.next_row()) {
    const long long iter = trace2.integer(c_iter2);
    for (const auto& [name, col] : scalar_cols)
      tcsv.row({CsvWriter::num(iter), name, trace2.field(col), iter > burn_in ? "1" : "0"});
  }
  std::cout << "diagnostics written to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bias-corrected first-arrival modelling from fused species observation tables"};
  app.require_subcommand(0, 1);

  CommonArgs args;
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the default configuration and exit");

  auto add_common = [&](CLI::App* sub, bool needs_run) {
    sub->add_option("--config", args.config_path, "Run configuration file");
    sub->add_option("--out", args.out_dir, "Output directory")->required();
    sub->add_option("--seed", args.seed, "Random seed (overrides the config)")
        ->each([&](const std::string&) { args.seed_set = true; });
    sub->add_option("--threads", args.threads, "Worker threads (replicate-level parallelism)");
    sub->add_flag("--gev-only", args.gev_only,
                  "Comparison model: arrival dates only, no niche or effort sharing");
    if (needs_run)
      sub->add_option("--run", args.run_dir, "Fit output directory")->required();
  };

  CLI::App* ingest = app.add_subcommand("ingest", "Validate inputs and write tables.csv");
  add_common(ingest, false);
  CLI::App* simulate =
      app.add_subcommand("simulate", "Generate a synthetic dataset (or recovery study)");
  add_common(simulate, false);
  CLI::App* fit = app.add_subcommand("fit", "Run the MALA-within-Gibbs sampler");
  add_common(fit, false);
  CLI::App* predict = app.add_subcommand("predict", "Arrival-date prediction from a fit");
  add_common(predict, true);
  CLI::App* excursions = app.add_subcommand("excursions", "Excursion functions of a field");
  add_common(excursions, true);
  CLI::App* correlate = app.add_subcommand("correlate", "Land-cover rank correlations");
  add_common(correlate, true);
  CLI::App* diagnose = app.add_subcommand("diagnose", "Chain diagnostics from trace.csv");
  diagnose->add_option("--run", args.run_dir, "Fit output directory")->required();
  diagnose->add_option("--out", args.out_dir, "Output directory (default: the run dir)");
  diagnose->add_option("--config", args.config_path, "Run configuration file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints usage or the error
    return code == 0 ? 0 : 1;     // validation failures exit 1
  }

  if (print_config) {
    print_default_config();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cout << app.help();
    return 1;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(args);
    if (simulate->parsed()) return cmd_simulate(args);
    if (fit->parsed()) return cmd_fit(args);
    if (predict->parsed()) return cmd_predict(args);
    if (excursions->parsed()) return cmd_excursions(args);
    if (correlate->parsed()) return cmd_correlate(args);
    if (diagnose->parsed()) return cmd_diagnose(args);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
