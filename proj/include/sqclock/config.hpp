#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqclock/clock_sim.hpp"

namespace sqclock {

struct FringeGrid {
  double detuning_min = -10.0;  // rad/s
  double detuning_max = 10.0;
  int points = 201;
};

struct SpectrumGrid {
  double omega_min = 0.0;  // rad/s
  double omega_max = 10.0;
  int omega_points = 11;
  double phi_min = 0.0;  // rad
  double phi_max = 1.5707963267948966;
  int phi_points = 5;
};

struct SnrSweep {
  enum class Variable { phi_minus, xi };
  Variable variable = Variable::phi_minus;
  double min = 0.0;
  double max = 1.5707963267948966;
  int points = 9;
};

struct AllanSettings {
  std::vector<double> taus;  // empty = octave spacing
  double fit_min = 0.0;      // s, 0 = from tau0
  double fit_max = 0.0;      // s, 0 = up to the longest tau
};

// Everything one config file can describe. Sections mirror the domain types
// one to one; every section and key is optional and falls back to defaults.
struct ExperimentConfig {
  ClockConfig clock{};
  std::uint64_t n_cycles = 2000;
  bool compare = false;
  FringeGrid fringe{};
  SpectrumGrid spectrum{};
  SnrSweep snr{};
  AllanSettings allan{};
};

// Parses YAML text. Unknown keys, wrong types and values that break a domain
// invariant all raise ConfigError naming the source, line and dotted field.
ExperimentConfig parse_config(const std::string& text,
                              const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

// Resolved configuration with every field spelled out.
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);

}  // namespace sqclock
