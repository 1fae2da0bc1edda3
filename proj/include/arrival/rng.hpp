#pragma once

// Deterministic per-block random streams. Every sampler block owns a
// stream keyed by (master seed, stream id), so the numbers a block sees
// never depend on sweep interleaving or thread count.

#include <cstdint>
#include <random>

namespace arrival {

// splitmix64 finalizer; used to key streams and hash seeds.
uint64_t mix64(uint64_t x);

class RngStream {
 public:
  RngStream() : engine_(mix64(0)) {}
  RngStream(uint64_t master_seed, uint64_t stream_id);

  double normal();
  // Strictly inside (0,1).
  double uniform();
  double gamma(double shape, double scale);
  long long poisson(double mean);
  uint64_t next_u64() { return engine_(); }
  // Uniform integer in [0, n).
  uint64_t below(uint64_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace arrival
