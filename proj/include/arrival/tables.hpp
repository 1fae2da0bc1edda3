#pragma once

// The four model response tables, aggregated from raw records.

#include <string>
#include <vector>

#include "arrival/grid.hpp"

namespace arrival {

// Dense over pixel-year cells (index = grid.cell(pixel, year_idx)).
// n_ckl = 0 marks an unobserved cell: no duration, no occurrence count,
// no arrival entry. z is NaN where absent.
struct ResponseTables {
  int n_pixels = 0;
  int n_years = 0;
  std::vector<long long> n_ckl;         // checklist counts, 0 default
  std::vector<double> median_duration;  // minutes; NaN where n_ckl = 0
  std::vector<long long> n_spc;         // occurrence counts; -1 where n_ckl = 0
  std::vector<double> z;                // transformed first arrival; NaN absent
  std::vector<RouteDef> routes;         // BBS counts with per-year route info
  std::vector<double> nao;              // per year index
  std::vector<std::array<double, 4>> landcover;  // per pixel; may be empty

  void init(int D, int T);
  bool has_z(int cell) const;

  // Invariants: n_spc <= n_ckl, z > 0, z present => n_spc >= 1 => n_ckl >= 1.
  void check_invariants() const;
};

struct AggregateStats {
  long long checklists_accepted = 0;
  long long checklists_outside_grid = 0;
  long long checklists_bad_year = 0;
  long long checklists_bad_duration = 0;
  long long occurrences_present = 0;
  long long occurrences_outside_grid = 0;
  long long occurrences_bad_year = 0;
  long long occurrences_bad_flag = 0;
  long long occurrences_bad_day = 0;
  long long occurrences_clamped_day = 0;
};

// Bins checklist records into N^ckl and per-cell median duration.
// Records outside the grid, outside the modeled years, or with negative
// duration are counted in stats and dropped with a warning.
void aggregate_checklists(const std::vector<RawChecklist>& records, const PixelGrid& grid,
                          ResponseTables* tables, AggregateStats* stats);

// Sums presence flags into N^spc and sets z = -log(min_day/366) where at
// least one presence exists. Day 366 is clamped to 365.5 to keep z > 0.
// Occurrences landing in cells without checklists, or pushing
// N^spc > N^ckl, are invariant violations and throw.
void aggregate_occurrences(const std::vector<RawOccurrence>& records, const PixelGrid& grid,
                           ResponseTables* tables, AggregateStats* stats);

// Full pipeline over loaded inputs; validates NAO coverage of all years.
ResponseTables build_tables(const RawInputs& inputs, AggregateStats* stats);

// One row per pixel-year, empty cells for absent entries.
void write_tables_csv(const std::string& path, const PixelGrid& grid,
                      const ResponseTables& tables);

}  // namespace arrival
