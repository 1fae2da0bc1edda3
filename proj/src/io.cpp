#include "arrival/io.hpp"

#include <bit>
#include <chrono>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "arrival/common.hpp"
#include "arrival/csv.hpp"

static_assert(std::endian::native == std::endian::little,
              "draws.bin writer assumes a little-endian host");

namespace arrival {

namespace {

constexpr char kMagic[8] = {'A', 'R', 'V', 'D', 'R', 'W', '0', '1'};
constexpr uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

void put_doubles(std::ofstream& out, const double* p, size_t n) {
  out.write(reinterpret_cast<const char*>(p), n * sizeof(double));
}

void get_doubles(std::ifstream& in, double* p, size_t n) {
  in.read(reinterpret_cast<char*>(p), n * sizeof(double));
}

}  // namespace

void write_draws(const std::string& path, const PixelGrid& grid,
                 const std::vector<LatentState>& draws, bool gev_only) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(cat(path, ": cannot open for writing"));
  const uint32_t D = grid.n_pixels();
  const uint32_t T = grid.n_years();

  out.write(kMagic, 8);
  put<uint32_t>(out, kVersion);
  put<uint32_t>(out, gev_only ? 1u : 0u);
  put<uint32_t>(out, D);
  put<uint32_t>(out, T);
  put<uint32_t>(out, kNumScalars);
  put<uint32_t>(out, 2 * kNumFields);
  put<uint64_t>(out, draws.size());
  for (int y : grid.years) put<int32_t>(out, y);

  for (const auto& s : draws) {
    for (int f = 0; f < kNumFields; ++f) {
      const auto& field = s.field(static_cast<FieldId>(f));
      const size_t expect = (static_cast<FieldId>(f) == FieldId::year) ? T : D;
      if (field.size() != expect)
        throw ValidationError(cat(path, ": draw field ", kFieldNames[f], " has length ",
                                  field.size(), ", expected ", expect));
      put_doubles(out, field.data(), field.size());
    }
    put_doubles(out, s.scalars.data(), s.scalars.size());
    for (int f = 0; f < kNumFields; ++f) {
      put<double>(out, s.hyper[f].sd);
      put<double>(out, s.hyper[f].range);
    }
  }
  if (!out) throw ValidationError(cat(path, ": write failed"));
}

DrawsFile read_draws(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(cat(path, ": cannot open"));
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw ValidationError(cat(path, ": not a draws file (bad magic)"));
  const uint32_t version = get<uint32_t>(in);
  if (version != kVersion)
    throw ValidationError(cat(path, ": unsupported draws version ", version));
  const uint32_t flags = get<uint32_t>(in);
  const uint32_t D = get<uint32_t>(in);
  const uint32_t T = get<uint32_t>(in);
  const uint32_t n_scalars = get<uint32_t>(in);
  const uint32_t n_hyper = get<uint32_t>(in);
  if (n_scalars != kNumScalars || n_hyper != 2 * kNumFields)
    throw ValidationError(cat(path, ": parameter layout mismatch"));
  const uint64_t n_draws = get<uint64_t>(in);

  DrawsFile file;
  file.n_pixels = static_cast<int>(D);
  file.gev_only = (flags & 1u) != 0;
  file.years.resize(T);
  for (uint32_t t = 0; t < T; ++t) file.years[t] = get<int32_t>(in);

  file.draws.resize(n_draws);
  for (auto& s : file.draws) {
    for (int f = 0; f < kNumFields; ++f) {
      auto& field = s.field(static_cast<FieldId>(f));
      field.resize((static_cast<FieldId>(f) == FieldId::year) ? T : D);
      get_doubles(in, field.data(), field.size());
    }
    get_doubles(in, s.scalars.data(), s.scalars.size());
    for (int f = 0; f < kNumFields; ++f) {
      s.hyper[f].sd = get<double>(in);
      s.hyper[f].range = get<double>(in);
    }
  }
  if (!in) throw ValidationError(cat(path, ": truncated draws file"));
  return file;
}

void write_trace_csv(const std::string& path, const ChainOutput& chain) {
  std::vector<std::string> header = {"iteration", "log_posterior"};
  const auto names = block_names();
  for (const char* n : names) header.push_back(cat("acc_", n));
  for (const char* n : kScalarNames) header.push_back(n);
  for (int f = 0; f < kNumFields; ++f) {
    header.push_back(cat("sd_", kFieldNames[f]));
    header.push_back(cat("range_", kFieldNames[f]));
  }
  CsvWriter out(path, header);
  std::vector<std::string> row;
  for (const auto& r : chain.trace) {
    row.clear();
    row.push_back(CsvWriter::num(r.iteration));
    row.push_back(CsvWriter::num(r.log_posterior));
    for (int b = 0; b < kNumBlocks; ++b)
      row.push_back(r.accepted[b] < 0 ? "" : CsvWriter::num(static_cast<long long>(r.accepted[b])));
    for (int s = 0; s < kNumScalars; ++s) row.push_back(CsvWriter::num(r.scalars[s]));
    for (int f = 0; f < kNumFields; ++f) {
      row.push_back(CsvWriter::num(r.hyper[f].sd));
      row.push_back(CsvWriter::num(r.hyper[f].range));
    }
    out.row(row);
  }
}

void write_diagnostics_csv(const std::string& path, const ChainOutput& chain) {
  CsvWriter out(path, {"metric", "name", "value"});
  for (int s = 0; s < kNumScalars; ++s)
    out.row({"ess", kScalarNames[s], CsvWriter::num(chain.scalar_ess[s])});
  const auto names = block_names();
  for (int b = 0; b < kNumBlocks; ++b) {
    if (std::isnan(chain.accept_rate[b])) continue;  // block never ran
    out.row({"accept_rate", names[b], CsvWriter::num(chain.accept_rate[b])});
    out.row({"final_step", names[b], CsvWriter::num(chain.final_step[b])});
  }
  out.row({"draws", "recorded", CsvWriter::num(static_cast<long long>(chain.draws.size()))});
  out.row({"chain", "iterations", CsvWriter::num(chain.iterations)});
  out.row({"chain", "burn_in", CsvWriter::num(chain.burn_in)});
  out.row({"chain", "thin", CsvWriter::num(chain.thin)});
  out.row({"chain", "seed", CsvWriter::num(static_cast<long long>(chain.seed))});
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(cat(path, ": cannot open for hashing"));
  uint64_t h = 0xcbf29ce484222325ull;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::write(const std::string& path) const {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config_path;
  j["config_hash"] = config_hash;
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [file, hash] : input_hashes) inputs[file] = hash;
  j["input_hashes"] = inputs;
  j["seed"] = seed;
  j["version"] = version;
  j["started_utc"] = started_utc;
  j["finished_utc"] = finished_utc;
  j["outputs"] = outputs;
  std::ofstream out(path);
  if (!out) throw ValidationError(cat(path, ": cannot open for writing"));
  out << j.dump(2) << "\n";
}

}  // namespace arrival
