#include "arrival/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "arrival/common.hpp"
#include "arrival/csv.hpp"

namespace arrival {

namespace {
constexpr double kEarthRadiusKm = 6371.0;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}  // namespace

int PixelGrid::year_index(int year) const {
  auto it = std::lower_bound(years.begin(), years.end(), year);
  if (it == years.end() || *it != year) return -1;
  return static_cast<int>(it - years.begin());
}

void PixelGrid::project(double lon, double lat, double* x_km, double* y_km) const {
  *x_km = kEarthRadiusKm * (lon - lon0_) * kDegToRad * std::cos(lat0_ * kDegToRad);
  *y_km = kEarthRadiusKm * (lat - lat0_) * kDegToRad;
}

int PixelGrid::locate(double lon, double lat) const {
  double x, y;
  project(lon, lat, &x, &y);
  const double half = pixel_width_km / 2.0;
  for (const auto& p : pixels) {
    if (x >= p.x_km - half && x < p.x_km + half && y >= p.y_km - half && y < p.y_km + half)
      return p.id;
  }
  return -1;
}

std::vector<Point2> PixelGrid::pixel_points() const {
  std::vector<Point2> out(pixels.size());
  for (size_t i = 0; i < pixels.size(); ++i) out[i] = {pixels[i].x_km, pixels[i].y_km};
  return out;
}

std::vector<Point2> PixelGrid::year_points() const {
  std::vector<Point2> out(years.size());
  for (size_t i = 0; i < years.size(); ++i) out[i] = {static_cast<double>(years[i]), 0.0};
  return out;
}

PixelGrid make_grid(std::vector<Pixel> pixels, std::vector<int> years, double pixel_width_km) {
  if (pixels.empty()) throw ValidationError("grid: no pixels");
  if (years.empty()) throw ValidationError("grid: no modeled years");
  if (!(pixel_width_km > 0.0)) throw ValidationError("grid: pixel width must be positive");
  std::sort(years.begin(), years.end());
  if (std::adjacent_find(years.begin(), years.end()) != years.end())
    throw ValidationError("grid: duplicate years");
  std::sort(pixels.begin(), pixels.end(), [](const Pixel& a, const Pixel& b) { return a.id < b.id; });
  for (size_t i = 0; i < pixels.size(); ++i) {
    if (pixels[i].id != static_cast<int>(i))
      throw ValidationError(cat("grid: pixel ids must be contiguous from 0; found id ", pixels[i].id,
                                " at rank ", i));
    if (!(pixels[i].area_km2 > 0.0))
      throw ValidationError(cat("grid: pixel ", pixels[i].id, " has non-positive area"));
  }

  PixelGrid g;
  g.pixel_width_km = pixel_width_km;
  g.years = std::move(years);
  double lon0 = 0.0, lat0 = 0.0;
  for (const auto& p : pixels) {
    lon0 += p.lon;
    lat0 += p.lat;
  }
  g.lon0_ = lon0 / pixels.size();
  g.lat0_ = lat0 / pixels.size();
  g.pixels = std::move(pixels);
  for (auto& p : g.pixels) g.project(p.lon, p.lat, &p.x_km, &p.y_km);
  return g;
}

std::vector<std::pair<int, double>> route_intensity_weights(const RouteDef& route) {
  std::vector<std::pair<int, double>> out;
  out.reserve(route.segments.size());
  const double stops_frac = static_cast<double>(route.stops_visited) / 50.0;
  for (const auto& seg : route.segments) out.emplace_back(seg.pixel_id, seg.weight * stops_frac);
  return out;
}

InputPaths InputPaths::in_dir(const std::string& dir) {
  InputPaths p;
  p.pixels = dir + "/pixels.csv";
  p.checklists = dir + "/checklists.csv";
  p.occurrences = dir + "/occurrences.csv";
  p.bbs = dir + "/bbs.csv";
  p.bbs_segments = dir + "/bbs_segments.csv";
  p.nao = dir + "/nao.csv";
  p.landcover = dir + "/landcover.csv";
  return p;
}

namespace {

std::vector<Pixel> load_pixels(const std::string& path) {
  CsvReader csv(path);
  const int c_id = csv.column("pixel_id");
  const int c_lon = csv.column("lon");
  const int c_lat = csv.column("lat");
  const int c_area = csv.column("area_km2");
  std::vector<Pixel> pixels;
  std::set<int> seen;
  while (csv.next_row()) {
    Pixel p;
    p.id = static_cast<int>(csv.integer(c_id));
    p.lon = csv.number(c_lon);
    p.lat = csv.number(c_lat);
    p.area_km2 = csv.number(c_area);
    if (!seen.insert(p.id).second) csv.fail(cat("duplicate pixel_id ", p.id));
    pixels.push_back(p);
  }
  return pixels;
}

std::vector<RawChecklist> load_checklists(const std::string& path) {
  CsvReader csv(path);
  const int c_lon = csv.column("lon");
  const int c_lat = csv.column("lat");
  const int c_year = csv.column("year");
  const int c_dur = csv.column("duration_min");
  std::vector<RawChecklist> out;
  while (csv.next_row())
    out.push_back({csv.number(c_lon), csv.number(c_lat),
                   static_cast<int>(csv.integer(c_year)), csv.number(c_dur)});
  return out;
}

std::vector<RawOccurrence> load_occurrences(const std::string& path) {
  CsvReader csv(path);
  const int c_lon = csv.column("lon");
  const int c_lat = csv.column("lat");
  const int c_year = csv.column("year");
  const int c_day = csv.column("day");
  const int c_present = csv.column("present");
  std::vector<RawOccurrence> out;
  while (csv.next_row())
    out.push_back({csv.number(c_lon), csv.number(c_lat),
                   static_cast<int>(csv.integer(c_year)), csv.number(c_day),
                   static_cast<int>(csv.integer(c_present))});
  return out;
}

std::vector<RouteDef> load_routes(const std::string& bbs_path, const std::string& seg_path,
                                  const PixelGrid& grid) {
  // segments keyed by route id; shared across years of the same route
  std::map<long long, std::vector<RouteSegment>> segments;
  {
    CsvReader csv(seg_path);
    const int c_route = csv.column("route_id");
    const int c_pixel = csv.column("pixel_id");
    const int c_weight = csv.column("weight");
    while (csv.next_row()) {
      RouteSegment seg{static_cast<int>(csv.integer(c_pixel)), csv.number(c_weight)};
      if (seg.pixel_id < 0 || seg.pixel_id >= grid.n_pixels())
        csv.fail(cat("segment references unknown pixel_id ", seg.pixel_id));
      if (seg.weight < 0.0 || seg.weight > 1.0)
        csv.fail(cat("segment weight ", seg.weight, " outside [0,1]"));
      segments[csv.integer(c_route)].push_back(seg);
    }
  }
  for (const auto& [route_id, segs] : segments) {
    double total = 0.0;
    for (const auto& s : segs) total += s.weight;
    if (std::abs(total - 1.0) > 1e-9)
      throw ValidationError(cat(seg_path, ": route ", route_id, " weights sum ", total,
                                ", expected 1"));
  }

  std::vector<RouteDef> routes;
  CsvReader csv(bbs_path);
  const int c_route = csv.column("route_id");
  const int c_year = csv.column("year");
  const int c_count = csv.column("count");
  const int c_stops = csv.column("stops");
  while (csv.next_row()) {
    RouteDef r;
    r.route_id = csv.integer(c_route);
    r.year = static_cast<int>(csv.integer(c_year));
    r.count = csv.integer(c_count);
    r.stops_visited = static_cast<int>(csv.integer(c_stops));
    if (r.count < 0) csv.fail(cat("negative BBS count ", r.count));
    if (r.stops_visited < 1 || r.stops_visited > 50)
      csv.fail(cat("stops ", r.stops_visited, " outside [1,50]"));
    auto it = segments.find(r.route_id);
    if (it == segments.end())
      csv.fail(cat("route ", r.route_id, " has no segments in ", seg_path));
    r.segments = it->second;
    routes.push_back(std::move(r));
  }
  return routes;
}

std::map<int, double> load_nao(const std::string& path) {
  CsvReader csv(path);
  const int c_year = csv.column("year");
  const int c_value = csv.column("value");
  std::map<int, double> out;
  while (csv.next_row()) out[static_cast<int>(csv.integer(c_year))] = csv.number(c_value);
  return out;
}

std::vector<std::array<double, 4>> load_landcover(const std::string& path, int n_pixels) {
  CsvReader csv(path);
  const int c_pixel = csv.column("pixel_id");
  const int cols[4] = {csv.column("developed"), csv.column("forest"),
                       csv.column("vegetation"), csv.column("water")};
  std::vector<std::array<double, 4>> out(n_pixels, {0, 0, 0, 0});
  std::vector<char> seen(n_pixels, 0);
  while (csv.next_row()) {
    int p = static_cast<int>(csv.integer(c_pixel));
    if (p < 0 || p >= n_pixels) csv.fail(cat("unknown pixel_id ", p));
    for (int c = 0; c < 4; ++c) {
      double v = csv.number(cols[c]);
      if (v < 0.0 || v > 1.0) csv.fail(cat("proportion ", v, " outside [0,1]"));
      out[p][c] = v;
    }
    seen[p] = 1;
  }
  for (int p = 0; p < n_pixels; ++p)
    if (!seen[p]) throw ValidationError(cat(path, ": missing land cover for pixel ", p));
  return out;
}

}  // namespace

RawInputs load_inputs(const InputPaths& paths, std::vector<int> years, double pixel_width_km) {
  RawInputs in;
  std::vector<Pixel> pixels = load_pixels(paths.pixels);
  in.checklists = load_checklists(paths.checklists);
  if (years.empty()) {
    // infer the contiguous range covered by checklist records
    int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
    for (const auto& c : in.checklists) {
      lo = std::min(lo, c.year);
      hi = std::max(hi, c.year);
    }
    if (lo > hi) throw ValidationError("load_inputs: no checklist records and no explicit years");
    for (int y = lo; y <= hi; ++y) years.push_back(y);
  }
  in.grid = make_grid(std::move(pixels), std::move(years), pixel_width_km);
  in.occurrences = load_occurrences(paths.occurrences);
  in.routes = load_routes(paths.bbs, paths.bbs_segments, in.grid);
  in.nao = load_nao(paths.nao);
  if (!paths.landcover.empty()) {
    std::ifstream probe(paths.landcover);
    if (probe.good()) in.landcover = load_landcover(paths.landcover, in.grid.n_pixels());
  }
  return in;
}

}  // namespace arrival
