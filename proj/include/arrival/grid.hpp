#pragma once

// Spatial/temporal indexing and the raw-record ingestion surface.

#include <array>
#include <map>
#include <string>
#include <vector>

#include "arrival/gp.hpp"

namespace arrival {

struct Pixel {
  int id = 0;
  double lon = 0.0, lat = 0.0;
  double x_km = 0.0, y_km = 0.0;  // equirectangular projection, grid centroid origin
  double area_km2 = 0.0;
};

struct PixelGrid {
  std::vector<Pixel> pixels;  // ids contiguous from 0
  std::vector<int> years;     // modeled years, ascending
  double pixel_width_km = 20.0;

  int n_pixels() const { return static_cast<int>(pixels.size()); }
  int n_years() const { return static_cast<int>(years.size()); }
  int n_cells() const { return n_pixels() * n_years(); }
  int cell(int pixel, int year_idx) const { return pixel * n_years() + year_idx; }
  int year_index(int year) const;  // -1 when not modeled

  // Half-open box assignment in projected km: a point belongs to pixel p
  // when x in [cx - w/2, cx + w/2) and y likewise. Returns -1 outside all
  // pixels; overlapping claims resolve to the lowest pixel id.
  int locate(double lon, double lat) const;

  void project(double lon, double lat, double* x_km, double* y_km) const;

  std::vector<Point2> pixel_points() const;
  std::vector<Point2> year_points() const;

 private:
  double lon0_ = 0.0, lat0_ = 0.0;  // projection origin
  friend PixelGrid make_grid(std::vector<Pixel>, std::vector<int>, double);
};

// Projects pixel centres about the lon/lat centroid and validates ids.
PixelGrid make_grid(std::vector<Pixel> pixels, std::vector<int> years, double pixel_width_km);

struct RouteSegment {
  int pixel_id = 0;
  double weight = 0.0;  // fraction of route length, sums to 1 per route
};

struct RouteDef {
  long long route_id = 0;
  int year = 0;
  std::vector<RouteSegment> segments;
  int stops_visited = 50;  // in [1, 50]
  long long count = 0;     // observed route count
};

// Per-pixel Poisson multipliers: weight * stops/50, so a fully surveyed
// route's multipliers sum to one.
std::vector<std::pair<int, double>> route_intensity_weights(const RouteDef& route);

struct RawChecklist {
  double lon = 0.0, lat = 0.0;
  int year = 0;
  double duration_min = 0.0;
};

struct RawOccurrence {
  double lon = 0.0, lat = 0.0;
  int year = 0;
  double day = 0.0;
  int present = 0;
};

struct InputPaths {
  std::string pixels;
  std::string checklists;
  std::string occurrences;
  std::string bbs;
  std::string bbs_segments;
  std::string nao;
  std::string landcover;  // optional; empty string skips

  // Standard file names under one directory.
  static InputPaths in_dir(const std::string& dir);
};

struct RawInputs {
  PixelGrid grid;
  std::vector<RawChecklist> checklists;
  std::vector<RawOccurrence> occurrences;
  std::vector<RouteDef> routes;
  std::map<int, double> nao;                     // year -> value
  std::vector<std::array<double, 4>> landcover;  // developed/forest/vegetation/water; empty if absent
};

// Parses and schema-validates every input file. `years` empty means infer
// the contiguous range spanned by checklist records.
RawInputs load_inputs(const InputPaths& paths, std::vector<int> years, double pixel_width_km);

}  // namespace arrival
