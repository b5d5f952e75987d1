#ifndef VORTEX_RNG_HPP
#define VORTEX_RNG_HPP

#include <cmath>
#include <cstdint>
#include <span>

#include "vortex/errors.hpp"

namespace vortex {

// Reproducible random stream keyed by (seed, stream_id). The state is seeded
// through a splitmix64 chain and advanced with xoshiro256++; everything is
// plain 64-bit integer arithmetic, so identical keys give identical event
// sequences on any platform. Distinct stream ids give independent replicates
// that can be consumed concurrently without sharing state.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (stream_id + 1ULL));
    for (auto& word : s_) word = splitmix64(x);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero state is invalid
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0,1); safe as a log argument.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Strictly positive exponential variate by inverse CDF.
  double exponential(double rate) {
    if (!(rate > 0.0)) throw InvalidArgument("exponential: rate must be positive");
    return -std::log(uniform_open()) / rate;
  }

  // Index drawn proportionally to weights, by cumulative scan in the given
  // (fixed) order. total must equal the sum of weights.
  int categorical(std::span<const double> weights, double total) {
    const double r = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (r < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection-free modulo is fine here: n is tiny compared to 2^64.
    return next_u64() % n;
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t s_[4];
};

}  // namespace vortex

#endif
