#pragma once

// On-disk run artifacts: the versioned little-endian draws frame, chain
// trace and diagnostics tables, and the per-run manifest.

#include <cstdint>
#include <string>
#include <vector>

#include "arrival/mcmc.hpp"
#include "arrival/model.hpp"

namespace arrival {

// draws.bin layout (little endian):
//   8 bytes  magic "ARVDRW01"
//   u32      version (1)
//   u32      flags (bit 0: gev_only)
//   u32      D, u32 T
//   u32      n_scalars (12), u32 n_hyper (10)
//   u64      n_draws
//   i32[T]   years
//   per draw, f64: x_pref[D], x_year[T], x_niche[D], x_gev_mu[D],
//                  x_gev_sigma[D], scalars[12], hyper (sd, range) x 5
void write_draws(const std::string& path, const PixelGrid& grid,
                 const std::vector<LatentState>& draws, bool gev_only);

struct DrawsFile {
  int n_pixels = 0;
  std::vector<int> years;
  bool gev_only = false;
  std::vector<LatentState> draws;
};
DrawsFile read_draws(const std::string& path);

void write_trace_csv(const std::string& path, const ChainOutput& chain);
void write_diagnostics_csv(const std::string& path, const ChainOutput& chain);

// FNV-1a 64 over the file bytes, hex-encoded; used by manifests.
std::string file_hash(const std::string& path);

struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> input_hashes;  // path, hash
  uint64_t seed = 0;
  std::string version;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> outputs;

  void write(const std::string& path) const;
};

inline constexpr const char* kVersionString = "arrival 0.1.0";
std::string utc_now();

}  // namespace arrival
