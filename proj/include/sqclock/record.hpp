#pragma once

#include <cstdint>
#include <vector>

namespace sqclock {

// Cs ground-state hyperfine clock transition, Hz.
inline constexpr double kCesiumClockHz = 9.192631770e9;

struct ClockLine {
  double nu = kCesiumClockHz;  // Hz
  double delta_nu = 1.0;       // Hz, Ramsey linewidth
};

struct RecordMetadata {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::uint64_t n_cycles = 0;
  std::uint64_t skipped_cycles = 0;  // pairs with zero total counts
  std::uint64_t lock_lost = 0;       // pairs left outside the linear discriminant range
};

// Uniformly spaced fractional-frequency samples y_k at t_k = k * tau0.
struct FrequencyRecord {
  double tau0 = 1.0;
  std::vector<double> samples;
  RecordMetadata metadata;
};

}  // namespace sqclock
