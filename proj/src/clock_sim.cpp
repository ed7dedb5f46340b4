#include "sqclock/clock_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <future>
#include <numbers>
#include <random>
#include <string>

#include "sqclock/errors.hpp"

namespace sqclock {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Residual detuning, as a fraction of the modulation depth, beyond which the
// discriminant is no longer linear (sin z departs from z by > 2.5%).
constexpr double kLinearRange = 0.25;

double flicker_corner(int stage, double dt) {
  return 0.1 / dt * std::pow(10.0, -stage);
}

// Normalised error signal (c+ - c-)/(c+ + c-) for noiseless counts.
double noiseless_error(const ClockConfig& cfg, double detuning, double mod) {
  const double up = ramsey_probability(cfg.ramsey, cfg.atom, detuning + mod, cfg.reservoir);
  const double down = ramsey_probability(cfg.ramsey, cfg.atom, detuning - mod, cfg.reservoir);
  const double sum = up + down;
  return sum > 0.0 ? (up - down) / sum : 0.0;
}

class Fingerprint {
 public:
  void add(const char* key, double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    text_ += key;
    text_ += '=';
    text_.append(buf, res.ptr);
    text_ += ';';
  }
  void add(const char* key, const std::string& v) {
    text_ += key;
    text_ += '=';
    text_ += v;
    text_ += ';';
  }
  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text_) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  std::string text_;
};

}  // namespace

LoSample lo_step(const LocalOscillatorModel& model, const LoState& prev,
                 double dt, double clock_hz, CounterRng& rng) {
  if (!(dt > 0.0)) throw ModelError("lo_step needs dt > 0");
  LoSample out{prev, model.initial_offset / (kTwoPi * clock_hz)};
  if (model.white_fm > 0.0)
    out.fractional_offset += std::sqrt(model.white_fm / (2.0 * dt)) * standard_normal(rng);
  if (model.flicker_fm > 0.0) {
    const double stage_var = model.flicker_fm * std::numbers::ln10;
    for (int i = 0; i < kFlickerStages; ++i) {
      const double z = standard_normal(rng);
      double& x = out.state.flicker[i];
      if (!prev.primed) {
        x = std::sqrt(stage_var) * z;
      } else {
        const double a = std::exp(-kTwoPi * flicker_corner(i, dt) * dt);
        x = a * x + std::sqrt(stage_var * (1.0 - a * a)) * z;
      }
      out.fractional_offset += x;
    }
  }
  out.state.primed = true;
  return out;
}

double sample_detected_atoms(double p, std::int64_t n_atoms, DetectionMode mode,
                             double noise_scale, CounterRng& rng,
                             CountSampler sampler) {
  if (!(p >= 0.0 && p <= 1.0)) throw ModelError("detection probability outside [0, 1]");
  if (n_atoms < 1) throw ModelError("need at least one atom per cycle");
  if (!(noise_scale > 0.0)) throw ModelError("noise scale must be > 0");
  const double n = static_cast<double>(n_atoms);
  if (mode == DetectionMode::coherent && sampler == CountSampler::binomial) {
    if (p == 0.0) return 0.0;
    if (p == 1.0) return n;
    std::binomial_distribution<std::int64_t> dist(n_atoms, p);
    return static_cast<double>(dist(rng));
  }
  const double scale = mode == DetectionMode::squeezed ? noise_scale : 1.0;
  const double mean = n * p;
  const double sd = scale * std::sqrt(n * p * (1.0 - p));
  return std::clamp(mean + sd * standard_normal(rng), 0.0, n);
}

void validate(const ClockConfig& cfg, const RunOptions& opts) {
  validate(cfg.ramsey);
  validate(cfg.atom);
  validate(cfg.reservoir);
  validate(cfg.detection);
  validate(cfg.response);
  validate(cfg.budget);
  if (cfg.ramsey.mode != cfg.geometry)
    throw ConfigError("ramsey.mode and clock geometry disagree");
  if (cfg.geometry == GeometryMode::fountain && cfg.atoms_per_cycle < 1)
    throw ConfigError("atoms_per_cycle must be >= 1");
  if (cfg.geometry == GeometryMode::beam && !(cfg.atom_flux * cfg.cycle_time >= 0.5))
    throw ConfigError("beam atom_flux * cycle_time must give at least one atom");
  if (!(cfg.cycle_time >= cfg.ramsey.free_time))
    throw ConfigError("cycle_time must be >= ramsey free_time");
  if (!std::isfinite(cfg.servo_gain) || !(cfg.servo_gain > 0.0) ||
      (!opts.permit_unstable_gain && !(cfg.servo_gain < 2.0)))
    throw ConfigError("servo_gain must lie in (0, 2)");
  if (!(cfg.modulation_depth >= 0.0))
    throw ConfigError("modulation_depth must be >= 0");
  if (!(cfg.lo.white_fm >= 0.0 && cfg.lo.flicker_fm >= 0.0))
    throw ConfigError("LO PSD levels must be >= 0");
  if (!(cfg.line.nu > 0.0 && cfg.line.delta_nu > 0.0 && cfg.line.delta_nu < cfg.line.nu))
    throw ConfigError("clock line needs 0 < delta_nu < nu");
}

std::int64_t atoms_per_cycle(const ClockConfig& cfg) {
  if (cfg.geometry == GeometryMode::fountain) return cfg.atoms_per_cycle;
  return std::max<std::int64_t>(1, std::llround(cfg.atom_flux * cfg.cycle_time));
}

double atom_flux(const ClockConfig& cfg) {
  if (cfg.geometry == GeometryMode::beam) return cfg.atom_flux;
  return static_cast<double>(cfg.atoms_per_cycle) / cfg.cycle_time;
}

double modulation_depth(const ClockConfig& cfg) {
  if (cfg.modulation_depth > 0.0) return cfg.modulation_depth;
  return std::numbers::pi / (2.0 * cfg.ramsey.free_time);
}

double detection_noise_scale(const ClockConfig& cfg) {
  if (cfg.detection_mode == DetectionMode::coherent) return 1.0;
  return effective_noise_scale(cfg.detection, atom_flux(cfg));
}

double discriminant_slope(const ClockConfig& cfg) {
  const double mod = modulation_depth(cfg);
  const double h = 1e-4 * mod;
  const double slope = (noiseless_error(cfg, h, mod) - noiseless_error(cfg, -h, mod)) / (2.0 * h);
  if (!(std::abs(slope) > 0.0) || !std::isfinite(slope))
    throw ModelError("fringe discriminant has zero slope at the working point");
  return slope;
}

double cycle_snr(const ClockConfig& cfg) {
  return std::sqrt(static_cast<double>(atoms_per_cycle(cfg))) / detection_noise_scale(cfg);
}

std::uint64_t config_hash(const ClockConfig& cfg) {
  Fingerprint f;
  f.add("geometry", std::string(to_string(cfg.geometry)));
  f.add("atoms_per_cycle", static_cast<double>(cfg.atoms_per_cycle));
  f.add("atom_flux", cfg.atom_flux);
  f.add("ramsey.pulse_area", cfg.ramsey.pulse_area);
  f.add("ramsey.free_time", cfg.ramsey.free_time);
  f.add("ramsey.pulse_duration", cfg.ramsey.pulse_duration);
  f.add("ramsey.spread.kind", cfg.ramsey.spread.kind == TransitSpread::Kind::delta
                                  ? std::string("delta")
                                  : std::string("truncated_normal"));
  f.add("ramsey.spread.rel_width", cfg.ramsey.spread.rel_width);
  f.add("atom.gamma", cfg.atom.gamma);
  f.add("atom.detuning", cfg.atom.detuning);
  f.add("reservoir.n_photon", cfg.reservoir.n_photon);
  f.add("reservoir.m_mag", cfg.reservoir.m_mag);
  f.add("reservoir.m_phase", cfg.reservoir.m_phase);
  f.add("cycle_time", cfg.cycle_time);
  f.add("detection_mode", to_string(cfg.detection_mode));
  f.add("sampler", to_string(cfg.sampler));
  f.add("detection_noise", cfg.detection_noise ? 1.0 : 0.0);
  const DetectionConfig& d = cfg.detection;
  f.add("detection.eta_s", d.eta_s);
  f.add("detection.eta_0", d.eta_0);
  f.add("detection.p_lo", d.p_lo);
  f.add("detection.p_x", d.p_x);
  f.add("detection.phi_minus", d.phi_minus);
  f.add("detection.omega_0", d.omega_0);
  f.add("detection.xi", d.xi);
  f.add("detection.f_width", d.f_width);
  f.add("detection.c_scale", d.c_scale);
  f.add("detection.bloch_angle", d.bloch_angle);
  f.add("detection.interaction_time", d.interaction_time);
  f.add("detection.c_form", d.c_form);
  f.add("detection.f_form", d.f_form);
  f.add("detection.wiring", to_string(d.wiring));
  f.add("response.delta_vac", cfg.response.delta_vac);
  f.add("response.delta_sq", cfg.response.delta_sq);
  f.add("budget.alpha", cfg.budget.alpha);
  f.add("budget.t_meas", cfg.budget.t_meas);
  f.add("budget.beta", cfg.budget.beta);
  f.add("budget.a_amp", cfg.budget.a_amp);
  f.add("budget.bandwidth", cfg.budget.bandwidth);
  f.add("servo_gain", cfg.servo_gain);
  f.add("modulation_depth", cfg.modulation_depth);
  f.add("lo.white_fm", cfg.lo.white_fm);
  f.add("lo.flicker_fm", cfg.lo.flicker_fm);
  f.add("lo.initial_offset", cfg.lo.initial_offset);
  f.add("line.nu", cfg.line.nu);
  f.add("line.delta_nu", cfg.line.delta_nu);
  return f.hash();
}

FrequencyRecord run_clock(const ClockConfig& cfg, std::uint64_t n_cycles,
                          const RunOptions& opts) {
  validate(cfg, opts);
  if (n_cycles < 2) throw ConfigError("run_clock needs n_cycles >= 2");

  const double mod = modulation_depth(cfg);
  const double slope = discriminant_slope(cfg);
  const double noise_scale = detection_noise_scale(cfg);
  const std::int64_t n_atoms = atoms_per_cycle(cfg);
  const double omega_clock = kTwoPi * cfg.line.nu;
  const std::uint64_t n_pairs = n_cycles / 2;

  FrequencyRecord rec;
  rec.tau0 = 2.0 * cfg.cycle_time;
  rec.samples.reserve(n_pairs);
  rec.metadata = {config_hash(cfg), cfg.seed, n_cycles, 0, 0};

  LoState lo_state;
  double steer = 0.0;  // angular correction applied to the LO, rad/s
  double y_lo = 0.0;
  for (std::uint64_t pair = 0; pair < n_pairs; ++pair) {
    double counts[2];
    double detuning = 0.0;
    for (int side = 0; side < 2; ++side) {
      const std::uint64_t cycle = 2 * pair + side;
      CounterRng lo_rng(cfg.seed, cycle, StreamTag::lo_noise);
      const LoSample lo = lo_step(cfg.lo, lo_state, cfg.cycle_time, cfg.line.nu, lo_rng);
      lo_state = lo.state;
      y_lo = lo.fractional_offset;
      // Atom minus field: a positive field offset is a negative detuning.
      detuning = -(omega_clock * y_lo + steer);
      const double probe = side == 0 ? detuning + mod : detuning - mod;
      const double p = ramsey_probability(cfg.ramsey, cfg.atom, probe, cfg.reservoir);
      if (!cfg.detection_noise) {
        counts[side] = p * static_cast<double>(n_atoms);
      } else {
        CounterRng det_rng(cfg.seed, cycle, StreamTag::detection);
        counts[side] = sample_detected_atoms(p, n_atoms, cfg.detection_mode,
                                             noise_scale, det_rng, cfg.sampler);
      }
    }
    const double total = counts[0] + counts[1];
    if (total > 0.0) {
      const double error = (counts[0] - counts[1]) / total;
      steer += cfg.servo_gain * error / slope;
    } else {
      ++rec.metadata.skipped_cycles;
    }
    const double residual = -(omega_clock * y_lo + steer);
    if (!(std::abs(residual) <= kLinearRange * mod)) ++rec.metadata.lock_lost;
    rec.samples.push_back(y_lo + steer / omega_clock);
  }
  return rec;
}

ComparisonRecords run_comparison(const ClockConfig& cfg, std::uint64_t n_cycles,
                                 bool parallel) {
  ClockConfig coherent = cfg;
  coherent.detection_mode = DetectionMode::coherent;
  ClockConfig squeezed = cfg;
  squeezed.detection_mode = DetectionMode::squeezed;
  // Surface config errors on the calling thread.
  validate(coherent);
  validate(squeezed);
  if (!parallel) return {run_clock(coherent, n_cycles), run_clock(squeezed, n_cycles)};
  auto sq = std::async(std::launch::async,
                       [&squeezed, n_cycles] { return run_clock(squeezed, n_cycles); });
  FrequencyRecord co = run_clock(coherent, n_cycles);
  return {std::move(co), sq.get()};
}

std::string to_string(DetectionMode m) {
  return m == DetectionMode::coherent ? "coherent" : "squeezed";
}

std::string to_string(CountSampler s) {
  return s == CountSampler::binomial ? "binomial" : "gaussian";
}

DetectionMode detection_mode_from(const std::string& s) {
  if (s == "coherent") return DetectionMode::coherent;
  if (s == "squeezed") return DetectionMode::squeezed;
  throw ConfigError("unknown detection mode '" + s + "' (expected coherent | squeezed)");
}

CountSampler count_sampler_from(const std::string& s) {
  if (s == "binomial") return CountSampler::binomial;
  if (s == "gaussian") return CountSampler::gaussian;
  throw ConfigError("unknown sampler '" + s + "' (expected binomial | gaussian)");
}

}  // namespace sqclock
