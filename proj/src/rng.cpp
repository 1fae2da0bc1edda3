#include "arrival/rng.hpp"

namespace arrival {

uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

RngStream::RngStream(uint64_t master_seed, uint64_t stream_id)
    : engine_(mix64(mix64(master_seed) ^ mix64(stream_id + 0x5851f42d4c957f2dull))) {}

double RngStream::normal() {
  std::normal_distribution<double> d;
  return d(engine_);
}

double RngStream::uniform() {
  // 53 random bits centered in (0,1); never returns an endpoint.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::gamma(double shape, double scale) {
  std::gamma_distribution<double> d(shape, scale);
  return d(engine_);
}

long long RngStream::poisson(double mean) {
  std::poisson_distribution<long long> d(mean);
  return d(engine_);
}

uint64_t RngStream::below(uint64_t n) {
  std::uniform_int_distribution<uint64_t> d(0, n - 1);
  return d(engine_);
}

}  // namespace arrival
