#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "arrival/common.hpp"
#include "arrival/config.hpp"
#include "arrival/csv.hpp"
#include "arrival/grid.hpp"
#include "arrival/tables.hpp"

using namespace arrival;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("arrival_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    fs::path p = path / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
};

// 2x2 grid of 20 km pixels around lon 0 / lat 0; pixel centres chosen so
// the projection lands them exactly 20 km apart
std::vector<Pixel> four_pixels() {
  const double dlat = 20.0 / (6371.0 * M_PI / 180.0);
  const double dlon = dlat;  // cos(lat0) with lat0 = 0
  std::vector<Pixel> px(4);
  px[0] = {0, 0.0, 0.0, 0, 0, 400.0};
  px[1] = {1, dlon, 0.0, 0, 0, 400.0};
  px[2] = {2, 0.0, dlat, 0, 0, 400.0};
  px[3] = {3, dlon, dlat, 0, 0, 390.0};
  return px;
}

}  // namespace

TEST_CASE("csv reader basics") {
  TempDir tmp;
  auto p = tmp.file("t.csv", "a,b,c\n1,2.5,x\n,3,y\n");
  CsvReader csv(p);
  CHECK(csv.column("a") == 0);
  CHECK_THROWS(csv.column("missing"));
  REQUIRE(csv.next_row());
  CHECK(csv.integer(0) == 1);
  CHECK(csv.number(1) == 2.5);
  CHECK_THROWS(csv.number(2));
  REQUIRE(csv.next_row());
  CHECK(csv.empty_field(0));
  CHECK_FALSE(csv.next_row());
}

TEST_CASE("csv errors carry file and line") {
  TempDir tmp;
  auto p = tmp.file("bad.csv", "a,b\n1\n");
  CsvReader csv(p);
  try {
    csv.next_row();
    FAIL("expected error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bad.csv:2") != std::string::npos);
  }
}

TEST_CASE("config parsing") {
  const Config c = Config::parse_string(
      "# comment\nchain.iterations = 100\nmodel.gev_only = true\n"
      "years = 2001:2004\nsteps = 0.1, 0.2\nname = run1\n");
  CHECK(c.get_integer("chain.iterations", 0) == 100);
  CHECK(c.get_flag("model.gev_only", false));
  CHECK(c.get_flag("absent", true));
  CHECK(c.get_int_list("years") == std::vector<int>{2001, 2002, 2003, 2004});
  CHECK(c.get_number_list("steps") == std::vector<double>{0.1, 0.2});
  CHECK(c.get_string("name", "") == "run1");
  CHECK_THROWS(Config::parse_string("novalue\n"));
  CHECK_THROWS(c.get_flag("name", false));
}

TEST_CASE("grid construction and projection") {
  auto g = make_grid(four_pixels(), {2001, 2002}, 20.0);
  CHECK(g.n_pixels() == 4);
  CHECK(g.n_years() == 2);
  CHECK(g.year_index(2002) == 1);
  CHECK(g.year_index(1999) == -1);
  // pixels are 20 km apart by construction (up to cos(lat0) shrinkage)
  CHECK(std::abs((g.pixels[1].x_km - g.pixels[0].x_km) - 20.0) < 1e-3);
  CHECK(std::abs((g.pixels[2].y_km - g.pixels[0].y_km) - 20.0) < 1e-3);

  auto bad = four_pixels();
  bad[2].id = 7;
  CHECK_THROWS(make_grid(bad, {2001}, 20.0));
  auto zero_area = four_pixels();
  zero_area[1].area_km2 = 0.0;
  CHECK_THROWS(make_grid(zero_area, {2001}, 20.0));
}

TEST_CASE("locate uses half-open boxes") {
  auto g = make_grid(four_pixels(), {2001}, 20.0);
  // dead centre of pixel 0
  CHECK(g.locate(g.pixels[0].lon, g.pixels[0].lat) == 0);
  // just either side of the shared edge; the box intervals are half-open
  const double mid_lon = 0.5 * (g.pixels[0].lon + g.pixels[1].lon);
  // clear of the few-cm box overlap that projection shrinkage creates
  const double nudge = 1e-5;  // about a metre
  CHECK(g.locate(mid_lon + nudge, g.pixels[0].lat) == 1);
  CHECK(g.locate(mid_lon - nudge, g.pixels[0].lat) == 0);
  // far away -> -1
  CHECK(g.locate(5.0, 5.0) == -1);
}

TEST_CASE("route weights") {
  RouteDef r;
  r.segments = {{0, 1.0}};
  r.stops_visited = 50;
  auto w = route_intensity_weights(r);
  CHECK(w.size() == 1);
  CHECK(w[0].second == doctest::Approx(1.0).epsilon(1e-15));

  r.stops_visited = 25;
  CHECK(route_intensity_weights(r)[0].second == doctest::Approx(0.5).epsilon(1e-15));

  RouteDef r2;
  r2.segments = {{0, 0.6}, {1, 0.4}};
  r2.stops_visited = 50;
  auto w2 = route_intensity_weights(r2);
  CHECK(w2[0].second == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(w2[1].second == doctest::Approx(0.4).epsilon(1e-15));

  // multipliers sum to stops/50 within 1e-12
  for (int stops : {1, 13, 37, 50}) {
    RouteDef r3;
    r3.segments = {{0, 0.25}, {1, 0.5}, {2, 0.25}};
    r3.stops_visited = stops;
    double total = 0.0;
    for (auto& [pix, wt] : route_intensity_weights(r3)) total += wt;
    CHECK(std::abs(total - stops / 50.0) < 1e-12);
  }
}

TEST_CASE("aggregate checklists: medians and counts") {
  auto g = make_grid(four_pixels(), {2001, 2002}, 20.0);
  std::vector<RawChecklist> recs = {
      {g.pixels[0].lon, g.pixels[0].lat, 2001, 10.0},
      {g.pixels[0].lon, g.pixels[0].lat, 2001, 40.0},
      {g.pixels[0].lon, g.pixels[0].lat, 2001, 20.0},
      {g.pixels[1].lon, g.pixels[1].lat, 2002, 10.0},
      {g.pixels[1].lon, g.pixels[1].lat, 2002, 20.0},
      {5.0, 5.0, 2001, 30.0},                          // outside grid
      {g.pixels[2].lon, g.pixels[2].lat, 1990, 30.0},  // year not modeled
      {g.pixels[2].lon, g.pixels[2].lat, 2001, -1.0},  // negative duration
  };
  ResponseTables t;
  t.init(4, 2);
  AggregateStats stats;
  aggregate_checklists(recs, g, &t, &stats);

  CHECK(t.n_ckl[g.cell(0, 0)] == 3);
  CHECK(t.median_duration[g.cell(0, 0)] == 20.0);  // odd-count median
  CHECK(t.n_ckl[g.cell(1, 1)] == 2);
  CHECK(t.median_duration[g.cell(1, 1)] == 15.0);  // mean of the middle pair
  CHECK(t.n_ckl[g.cell(2, 0)] == 0);               // absence, not zero-with-duration
  CHECK(std::isnan(t.median_duration[g.cell(2, 0)]));
  CHECK(stats.checklists_accepted == 5);
  CHECK(stats.checklists_outside_grid == 1);
  CHECK(stats.checklists_bad_year == 1);
  CHECK(stats.checklists_bad_duration == 1);

  // total count equals accepted records
  long long total = 0;
  for (auto n : t.n_ckl) total += n;
  CHECK(total == stats.checklists_accepted);
}

TEST_CASE("median equals independent sort oracle") {
  auto g = make_grid(four_pixels(), {2001}, 20.0);
  std::mt19937 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 9);
    std::vector<RawChecklist> recs;
    std::vector<double> durations;
    for (int i = 0; i < n; ++i) {
      double d = static_cast<double>(rng() % 240);
      durations.push_back(d);
      recs.push_back({g.pixels[0].lon, g.pixels[0].lat, 2001, d});
    }
    ResponseTables t;
    t.init(4, 1);
    AggregateStats st;
    aggregate_checklists(recs, g, &t, &st);

    std::sort(durations.begin(), durations.end());
    const double expect = (n % 2 == 1)
                              ? durations[n / 2]
                              : 0.5 * (durations[n / 2 - 1] + durations[n / 2]);
    CHECK(t.median_duration[g.cell(0, 0)] == expect);
  }
}

TEST_CASE("aggregate occurrences: z transform and edge cases") {
  auto g = make_grid(four_pixels(), {2001}, 20.0);
  ResponseTables t;
  t.init(4, 1);
  AggregateStats st;
  std::vector<RawChecklist> ckls;
  for (int i = 0; i < 5; ++i)
    ckls.push_back({g.pixels[0].lon, g.pixels[0].lat, 2001, 30.0});
  for (int i = 0; i < 3; ++i)
    ckls.push_back({g.pixels[1].lon, g.pixels[1].lat, 2001, 30.0});
  aggregate_checklists(ckls, g, &t, &st);

  std::vector<RawOccurrence> occs = {
      {g.pixels[0].lon, g.pixels[0].lat, 2001, 120.0, 1},
      {g.pixels[0].lon, g.pixels[0].lat, 2001, 95.0, 1},
      {g.pixels[0].lon, g.pixels[0].lat, 2001, 140.0, 1},
      {g.pixels[1].lon, g.pixels[1].lat, 2001, 366.0, 1},  // clamped to 365.5
      {g.pixels[1].lon, g.pixels[1].lat, 2001, 50.0, 0},   // absence
      {g.pixels[1].lon, g.pixels[1].lat, 2001, 60.0, 2},   // bad flag, rejected
  };
  aggregate_occurrences(occs, g, &t, &st);

  CHECK(t.n_spc[g.cell(0, 0)] == 3);
  // frozen: -ln(95/366)
  CHECK(t.z[g.cell(0, 0)] == doctest::Approx(1.3487564418008254).epsilon(1e-14));
  // frozen: -ln(365.5/366)
  CHECK(t.z[g.cell(1, 0)] == doctest::Approx(0.0013670542115330553).epsilon(1e-12));
  CHECK(st.occurrences_clamped_day == 1);
  CHECK(st.occurrences_bad_flag == 1);

  // all-absence cell keeps n_spc = 0 and no z
  CHECK(t.n_spc[g.cell(2, 0)] == -1);  // no checklists there at all
  t.check_invariants();

  // occurrence in a cell without checklists violates the invariant chain
  std::vector<RawOccurrence> bad = {{g.pixels[2].lon, g.pixels[2].lat, 2001, 100.0, 1}};
  CHECK_THROWS(aggregate_occurrences(bad, g, &t, &st));
}

TEST_CASE("aggregation is permutation invariant") {
  auto g = make_grid(four_pixels(), {2001, 2002}, 20.0);
  std::vector<RawChecklist> ckls;
  std::vector<RawOccurrence> occs;
  std::mt19937 rng(5);
  for (int i = 0; i < 60; ++i) {
    int p = rng() % 4, y = rng() % 2;
    double d = 5.0 + (rng() % 200);
    ckls.push_back({g.pixels[p].lon, g.pixels[p].lat, 2001 + y, d});
  }
  for (int i = 0; i < 30; ++i) {
    int p = rng() % 4, y = rng() % 2;
    occs.push_back({g.pixels[p].lon, g.pixels[p].lat, 2001 + y,
                    30.0 + (rng() % 300), static_cast<int>(rng() % 2)});
  }

  auto build = [&](const std::vector<RawChecklist>& c, const std::vector<RawOccurrence>& o) {
    ResponseTables t;
    t.init(4, 2);
    AggregateStats st;
    aggregate_checklists(c, g, &t, &st);
    // keep occurrences consistent with the invariant N^spc <= N^ckl
    std::vector<RawOccurrence> ok;
    ResponseTables probe = t;
    for (const auto& rec : o) {
      int pix = g.locate(rec.lon, rec.lat);
      int yi = g.year_index(rec.year);
      if (pix < 0 || yi < 0) continue;
      int cell = g.cell(pix, yi);
      if (probe.n_ckl[cell] == 0 || probe.n_spc[cell] >= probe.n_ckl[cell]) continue;
      if (rec.present == 1) ++probe.n_spc[cell];
      ok.push_back(rec);
    }
    AggregateStats st2;
    aggregate_occurrences(ok, g, &t, &st2);
    return t;
  };

  auto t1 = build(ckls, occs);
  auto c2 = ckls;
  auto o2 = occs;
  std::shuffle(c2.begin(), c2.end(), rng);
  // occurrence filtering is order dependent; shuffle checklists only
  auto t2 = build(c2, occs);
  CHECK(t1.n_ckl == t2.n_ckl);
  CHECK(t1.n_spc == t2.n_spc);
  for (size_t i = 0; i < t1.z.size(); ++i) {
    if (std::isnan(t1.z[i]))
      CHECK(std::isnan(t2.z[i]));
    else
      CHECK(t1.z[i] == t2.z[i]);
    if (std::isnan(t1.median_duration[i]))
      CHECK(std::isnan(t2.median_duration[i]));
    else
      CHECK(t1.median_duration[i] == t2.median_duration[i]);
  }
  (void)o2;
}

TEST_CASE("load_inputs parses a full fixture set") {
  TempDir tmp;
  auto g0 = make_grid(four_pixels(), {2001}, 20.0);
  std::string pixels = "pixel_id,lon,lat,area_km2\n";
  for (const auto& p : four_pixels())
    pixels += CsvWriter::num(static_cast<long long>(p.id)) + "," + CsvWriter::num(p.lon) + "," +
              CsvWriter::num(p.lat) + "," + CsvWriter::num(p.area_km2) + "\n";
  tmp.file("pixels.csv", pixels);
  tmp.file("checklists.csv",
           "lon,lat,year,duration_min\n" + CsvWriter::num(g0.pixels[0].lon) + "," +
               CsvWriter::num(g0.pixels[0].lat) + ",2001,45\n");
  tmp.file("occurrences.csv",
           "lon,lat,year,day,present\n" + CsvWriter::num(g0.pixels[0].lon) + "," +
               CsvWriter::num(g0.pixels[0].lat) + ",2001,120,1\n");
  tmp.file("bbs.csv", "route_id,year,count,stops\n1,2001,4,50\n");
  tmp.file("bbs_segments.csv", "route_id,pixel_id,weight\n1,0,0.6\n1,1,0.4\n");
  tmp.file("nao.csv", "year,value\n2001,0.3\n");
  tmp.file("landcover.csv",
           "pixel_id,developed,forest,vegetation,water\n0,0.2,0.5,0.2,0.1\n"
           "1,0.1,0.6,0.2,0.1\n2,0.3,0.3,0.3,0.1\n3,0.25,0.25,0.25,0.25\n");

  auto in = load_inputs(InputPaths::in_dir(tmp.path.string()), {}, 20.0);
  CHECK(in.grid.n_pixels() == 4);
  CHECK(in.grid.years == std::vector<int>{2001});
  CHECK(in.checklists.size() == 1);
  CHECK(in.routes.size() == 1);
  CHECK(in.routes[0].segments.size() == 2);
  CHECK(in.landcover.size() == 4);

  AggregateStats st;
  auto tables = build_tables(in, &st);
  CHECK(tables.n_ckl[in.grid.cell(0, 0)] == 1);
  CHECK(tables.nao[0] == 0.3);

  // route weights that do not sum to one are rejected with the sum named
  tmp.file("bbs_segments.csv", "route_id,pixel_id,weight\n1,0,0.6\n1,1,0.5\n");
  try {
    load_inputs(InputPaths::in_dir(tmp.path.string()), {2001}, 20.0);
    FAIL("expected weight-sum error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("1.1") != std::string::npos);
  }
}

TEST_CASE("tables csv round trip") {
  TempDir tmp;
  auto g = make_grid(four_pixels(), {2001}, 20.0);
  ResponseTables t;
  t.init(4, 1);
  AggregateStats st;
  aggregate_checklists({{g.pixels[0].lon, g.pixels[0].lat, 2001, 30.0}}, g, &t, &st);
  aggregate_occurrences({{g.pixels[0].lon, g.pixels[0].lat, 2001, 95.0, 1}}, g, &t, &st);
  t.nao[0] = -0.7;

  auto path = (tmp.path / "tables.csv").string();
  write_tables_csv(path, g, t);
  CsvReader csv(path);
  REQUIRE(csv.next_row());
  CHECK(csv.integer(csv.column("pixel_id")) == 0);
  CHECK(csv.integer(csv.column("n_ckl")) == 1);
  CHECK(csv.number(csv.column("z")) == doctest::Approx(1.3487564418008254).epsilon(1e-15));
  REQUIRE(csv.next_row());  // pixel 0, year done; next pixel rows have empties
  CHECK(csv.empty_field(csv.column("z")));
}
