#include "arrival/tables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arrival/common.hpp"
#include "arrival/csv.hpp"
#include "arrival/gev.hpp"

namespace arrival {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

void ResponseTables::init(int D, int T) {
  n_pixels = D;
  n_years = T;
  n_ckl.assign(static_cast<size_t>(D) * T, 0);
  median_duration.assign(static_cast<size_t>(D) * T, kNaN);
  n_spc.assign(static_cast<size_t>(D) * T, -1);
  z.assign(static_cast<size_t>(D) * T, kNaN);
  nao.assign(T, kNaN);
}

bool ResponseTables::has_z(int cell) const { return !std::isnan(z[cell]); }

void ResponseTables::check_invariants() const {
  for (size_t c = 0; c < n_ckl.size(); ++c) {
    if (n_ckl[c] < 0) throw ValidationError(cat("tables: negative N^ckl at cell ", c));
    if (n_ckl[c] == 0) {
      if (n_spc[c] != -1 || !std::isnan(median_duration[c]) || !std::isnan(z[c]))
        throw ValidationError(cat("tables: cell ", c, " has entries but no checklists"));
      continue;
    }
    if (std::isnan(median_duration[c]))
      throw ValidationError(cat("tables: cell ", c, " has checklists but no duration"));
    if (n_spc[c] < 0 || n_spc[c] > n_ckl[c])
      throw ValidationError(cat("tables: cell ", c, ": N^spc ", n_spc[c],
                                " outside [0, N^ckl=", n_ckl[c], "]"));
    if (!std::isnan(z[c])) {
      if (n_spc[c] < 1) throw ValidationError(cat("tables: cell ", c, " has z but N^spc = 0"));
      if (!(z[c] > 0.0)) throw ValidationError(cat("tables: cell ", c, " has z <= 0"));
    }
  }
}

void aggregate_checklists(const std::vector<RawChecklist>& records, const PixelGrid& grid,
                          ResponseTables* tables, AggregateStats* stats) {
  const int T = grid.n_years();
  std::vector<std::vector<double>> durations(static_cast<size_t>(grid.n_pixels()) * T);
  for (const auto& rec : records) {
    if (rec.duration_min < 0.0) {
      ++stats->checklists_bad_duration;
      continue;
    }
    const int t = grid.year_index(rec.year);
    if (t < 0) {
      ++stats->checklists_bad_year;
      continue;
    }
    const int pixel = grid.locate(rec.lon, rec.lat);
    if (pixel < 0) {
      ++stats->checklists_outside_grid;
      continue;
    }
    durations[grid.cell(pixel, t)].push_back(rec.duration_min);
    ++stats->checklists_accepted;
  }
  if (stats->checklists_outside_grid > 0)
    warn(cat(stats->checklists_outside_grid, " checklist record(s) outside the grid, dropped"));
  if (stats->checklists_bad_year > 0)
    warn(cat(stats->checklists_bad_year, " checklist record(s) outside modeled years, dropped"));
  if (stats->checklists_bad_duration > 0)
    warn(cat(stats->checklists_bad_duration, " checklist record(s) with negative duration, rejected"));

  for (size_t c = 0; c < durations.size(); ++c) {
    auto& d = durations[c];
    if (d.empty()) continue;
    tables->n_ckl[c] = static_cast<long long>(d.size());
    std::sort(d.begin(), d.end());
    const size_t n = d.size();
    tables->median_duration[c] =
        (n % 2 == 1) ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
    tables->n_spc[c] = 0;  // present (possibly zero) wherever checklists exist
  }
}

void aggregate_occurrences(const std::vector<RawOccurrence>& records, const PixelGrid& grid,
                           ResponseTables* tables, AggregateStats* stats) {
  const int T = grid.n_years();
  std::vector<double> min_day(static_cast<size_t>(grid.n_pixels()) * T,
                              std::numeric_limits<double>::infinity());
  for (const auto& rec : records) {
    if (rec.present != 0 && rec.present != 1) {
      ++stats->occurrences_bad_flag;
      continue;
    }
    const int t = grid.year_index(rec.year);
    if (t < 0) {
      ++stats->occurrences_bad_year;
      continue;
    }
    const int pixel = grid.locate(rec.lon, rec.lat);
    if (pixel < 0) {
      ++stats->occurrences_outside_grid;
      continue;
    }
    if (rec.present == 0) continue;
    double day = rec.day;
    if (!(day > 0.0) || day > 366.0) {
      ++stats->occurrences_bad_day;
      continue;
    }
    if (day == 366.0) {
      day = 365.5;  // boundary day would transform to z = 0
      ++stats->occurrences_clamped_day;
    }
    const int c = grid.cell(pixel, t);
    if (tables->n_ckl[c] == 0)
      throw ValidationError(cat("occurrence at pixel ", pixel, ", year ", rec.year,
                                " references a cell with no checklists"));
    if (tables->n_spc[c] + 1 > tables->n_ckl[c])
      throw ValidationError(cat("pixel ", pixel, ", year ", rec.year, ": occurrence count exceeds ",
                                "checklist count ", tables->n_ckl[c]));
    ++tables->n_spc[c];
    ++stats->occurrences_present;
    min_day[c] = std::min(min_day[c], day);
  }
  if (stats->occurrences_bad_flag > 0)
    warn(cat(stats->occurrences_bad_flag, " occurrence record(s) with presence flag outside {0,1}, rejected"));
  if (stats->occurrences_outside_grid > 0)
    warn(cat(stats->occurrences_outside_grid, " occurrence record(s) outside the grid, dropped"));
  if (stats->occurrences_bad_year > 0)
    warn(cat(stats->occurrences_bad_year, " occurrence record(s) outside modeled years, dropped"));
  if (stats->occurrences_bad_day > 0)
    warn(cat(stats->occurrences_bad_day, " occurrence record(s) with day outside (0,366], rejected"));
  if (stats->occurrences_clamped_day > 0)
    warn(cat(stats->occurrences_clamped_day, " occurrence day(s) at 366 clamped to 365.5"));

  for (size_t c = 0; c < min_day.size(); ++c)
    if (std::isfinite(min_day[c])) tables->z[c] = date_to_z(min_day[c]);
}

ResponseTables build_tables(const RawInputs& inputs, AggregateStats* stats) {
  ResponseTables tables;
  tables.init(inputs.grid.n_pixels(), inputs.grid.n_years());
  aggregate_checklists(inputs.checklists, inputs.grid, &tables, stats);
  aggregate_occurrences(inputs.occurrences, inputs.grid, &tables, stats);
  tables.routes = inputs.routes;
  for (const auto& r : tables.routes) {
    if (inputs.grid.year_index(r.year) < 0)
      throw ValidationError(cat("bbs route ", r.route_id, ": year ", r.year, " is not modeled"));
  }
  for (int t = 0; t < inputs.grid.n_years(); ++t) {
    auto it = inputs.nao.find(inputs.grid.years[t]);
    if (it == inputs.nao.end())
      throw ValidationError(cat("nao: missing value for modeled year ", inputs.grid.years[t]));
    tables.nao[t] = it->second;
  }
  tables.landcover = inputs.landcover;
  tables.check_invariants();
  return tables;
}

void write_tables_csv(const std::string& path, const PixelGrid& grid,
                      const ResponseTables& tables) {
  CsvWriter out(path, {"pixel_id", "year", "n_ckl", "median_duration_min", "n_spc", "z", "nao"});
  for (int p = 0; p < grid.n_pixels(); ++p) {
    for (int t = 0; t < grid.n_years(); ++t) {
      const int c = grid.cell(p, t);
      std::vector<std::string> row(7);
      row[0] = CsvWriter::num(p);
      row[1] = CsvWriter::num(static_cast<long long>(grid.years[t]));
      row[2] = CsvWriter::num(tables.n_ckl[c]);
      row[3] = tables.n_ckl[c] > 0 ? CsvWriter::num(tables.median_duration[c]) : "";
      row[4] = tables.n_ckl[c] > 0 ? CsvWriter::num(tables.n_spc[c]) : "";
      row[5] = tables.has_z(c) ? CsvWriter::num(tables.z[c]) : "";
      row[6] = CsvWriter::num(tables.nao[t]);
      out.row(row);
    }
  }
}

}  // namespace arrival
