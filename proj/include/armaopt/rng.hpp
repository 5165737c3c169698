#pragma once

#include <cstdint>
#include <random>

namespace armaopt {

/// Deterministic random stream with derivable substreams.
///
/// A 64-bit master seed is mixed through splitmix64 together with substream
/// keys; the mixed value seeds a mt19937_64. Identical seeds give identical
/// sequences within one build; substream(k) derives an independent stream
/// from the *original* seed material, so substreams can be handed out per
/// (series-id, start-index) without consuming the parent stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : root_(mix(seed)), engine_(root_) {}

  /// Independent child stream keyed off this stream's seed material.
  RngStream substream(std::uint64_t key) const {
    return RngStream(from_state{}, mix(root_ + golden(key)));
  }
  RngStream substream(std::uint64_t k1, std::uint64_t k2) const {
    return substream(k1).substream(k2);
  }

  std::uint64_t next_u64() { return engine_(); }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double gaussian(double mean, double sd) {
    // One-shot distribution object: normal_distribution caches a spare
    // deviate, which would make interleaved substream use order-dependent.
    return std::normal_distribution<double>(mean, sd)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  struct from_state {};
  RngStream(from_state, std::uint64_t mixed) : root_(mixed), engine_(mixed) {}

  static std::uint64_t golden(std::uint64_t k) {
    return (k + 1) * 0x9E3779B97F4A7C15ull;
  }

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t root_;
  std::mt19937_64 engine_;
};

}  // namespace armaopt
