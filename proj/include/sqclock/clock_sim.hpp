#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>

#include "sqclock/atom_dynamics.hpp"
#include "sqclock/detection.hpp"
#include "sqclock/record.hpp"
#include "sqclock/rng.hpp"

namespace sqclock {

// Local oscillator frequency noise.
//   white_fm:   h0, one-sided PSD of y in 1/Hz
//   flicker_fm: h_-1, with S_y(f) = h_-1 / f
//   initial_offset: constant angular frequency offset, rad/s
struct LocalOscillatorModel {
  double white_fm = 0.0;
  double flicker_fm = 0.0;
  double initial_offset = 0.0;
};

// Flicker FM is the sum of kFlickerStages first-order filtered white sources
// (discrete Ornstein-Uhlenbeck processes). Stage i has corner frequency
// f_i = 0.1 / dt * 10^-i, AR coefficient a_i = exp(-2 pi f_i dt) and
// stationary variance h_-1 ln(10). Decade-spaced Lorentzians of that weight
// sum to h_-1 / f between f_4 and f_0, i.e. roughly dt*10 < tau < dt*10^4.
inline constexpr int kFlickerStages = 5;

struct LoState {
  std::array<double, kFlickerStages> flicker{};
  bool primed = false;  // stages start from their stationary distribution
};

struct LoSample {
  LoState state;
  double fractional_offset = 0.0;
};

LoSample lo_step(const LocalOscillatorModel& model, const LoState& prev,
                 double dt, double clock_hz, CounterRng& rng);

enum class DetectionMode { coherent, squeezed };
enum class CountSampler { binomial, gaussian };

// Detected atom number in the upper state.
//   coherent + binomial: exact Binomial(n, p)
//   coherent + gaussian: n p + sqrt(n p (1-p)) z
//   squeezed:            n p + noise_scale sqrt(n p (1-p)) z
// Gaussian results are clamped to [0, n].
double sample_detected_atoms(double p, std::int64_t n_atoms, DetectionMode mode,
                             double noise_scale, CounterRng& rng,
                             CountSampler sampler = CountSampler::binomial);

struct ClockConfig {
  GeometryMode geometry = GeometryMode::fountain;
  std::int64_t atoms_per_cycle = 1000000;  // fountain
  double atom_flux = 1.0e6;                // atoms/s, beam
  RamseyGeometry ramsey{};
  TwoLevelAtom atom{};
  SqueezedReservoir reservoir{};  // acting during free evolution; vacuum = ideal
  double cycle_time = 1.0;        // s
  DetectionMode detection_mode = DetectionMode::coherent;
  CountSampler sampler = CountSampler::binomial;
  bool detection_noise = true;    // false = infinite-atom limit
  DetectionConfig detection{};
  AtomicResponse response{};
  PhotonBudget budget{};
  double servo_gain = 1.0;
  double modulation_depth = 0.0;  // rad/s; 0 selects the half-maximum pi/(2T)
  LocalOscillatorModel lo{};
  ClockLine line{};
  std::uint64_t seed = 1;
};

struct RunOptions {
  // Lets servo gains outside (0, 2) run so their divergence can be observed.
  bool permit_unstable_gain = false;
};

void validate(const ClockConfig& cfg, const RunOptions& opts = {});

std::int64_t atoms_per_cycle(const ClockConfig& cfg);
double atom_flux(const ClockConfig& cfg);
double modulation_depth(const ClockConfig& cfg);

// sqrt(1 + xi S) in squeezed mode, 1 in coherent mode.
double detection_noise_scale(const ClockConfig& cfg);

// d(error)/d(detuning) at zero detuning for the two-point modulation, s.
double discriminant_slope(const ClockConfig& cfg);

// Amplitude signal-to-noise of one interrogation at the half-maximum working
// point: sqrt(n) / noise_scale for projection-noise-limited detection.
double cycle_snr(const ClockConfig& cfg);

// FNV-1a hash of a canonical text rendering of every field.
std::uint64_t config_hash(const ClockConfig& cfg);

// Closed servo loop over n_cycles interrogations (n_cycles / 2 modulation
// pairs). One sample per pair, tau0 = 2 cycle_time.
FrequencyRecord run_clock(const ClockConfig& cfg, std::uint64_t n_cycles,
                          const RunOptions& opts = {});

struct ComparisonRecords {
  FrequencyRecord coherent;
  FrequencyRecord squeezed;
};

// Both arms share seed, LO realisation and detection streams.
ComparisonRecords run_comparison(const ClockConfig& cfg, std::uint64_t n_cycles,
                                 bool parallel = true);

std::string to_string(DetectionMode m);
std::string to_string(CountSampler s);
DetectionMode detection_mode_from(const std::string& s);
CountSampler count_sampler_from(const std::string& s);

}  // namespace sqclock
