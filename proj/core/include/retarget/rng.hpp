#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace retarget {

/// Seeded pseudo-random source with platform-independent draws.
///
/// `std::uniform_real_distribution` and `std::normal_distribution` are
/// implementation defined, so uniforms are built from the top 53 bits of the
/// engine output and normals from the Marsaglia polar method (no cached
/// second value, so the whole state is the engine state).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Derives an independent stream, e.g. one per environment.
  Rng split(std::uint64_t stream) const;

  std::string serialize() const;
  static Rng deserialize(const std::string& text);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer, used to decorrelate derived seeds.
std::uint64_t mix_seed(std::uint64_t x);

// FNV-1a; stable across platforms unlike std::hash.
std::uint64_t hash_string(std::string_view s);

}  // namespace retarget
