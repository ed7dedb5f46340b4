#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace sqclock {

// What a random stream is used for. Distinct tags give independent streams
// for the same (seed, index).
enum class StreamTag : std::uint64_t {
  lo_noise = 0x4c4f,     // "LO"
  detection = 0x4445,    // "DE"
  transit = 0x5452,      // "TR"
  test = 0x5445,         // "TE"
};

// Counter-based generator: output k of stream (seed, index, tag) is
// mix(key + (k + 1) * golden), with key derived from the triple. The sequence
// for a given triple never depends on what other streams have produced, so
// serial and parallel execution agree bit for bit.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t index, StreamTag tag)
      : key_(mix(mix(seed ^ mix(index + kGolden)) ^
                 (static_cast<std::uint64_t>(tag) * kGolden))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * kGolden); }

  std::uint64_t draws() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  // SplitMix64 finaliser.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Uniform on the open interval (0, 1) from the top 53 bits.
inline double uniform_open(CounterRng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller; consumes exactly two draws.
inline double standard_normal(CounterRng& rng) {
  const double r = std::sqrt(-2.0 * std::log(uniform_open(rng)));
  return r * std::cos(2.0 * std::numbers::pi * uniform_open(rng));
}

}  // namespace sqclock
