#pragma once

#include <string_view>

namespace sqclock {

// Pseudo-spin of an effective two-level atom.
//
// Sign convention: w = -1 is the ground state, w = +1 the excited state.
// A drive of Rabi frequency Omega along the equatorial axis at phase phi and a
// detuning delta (atom minus field) generate dr/dt = Omega_vec x r with
// Omega_vec = (Omega cos phi, Omega sin phi, delta). A pi/2 pulse at phase 0
// therefore maps the ground state (0, 0, -1) to (0, +1, 0).
struct BlochVector {
  double u = 0.0;
  double v = 0.0;
  double w = -1.0;

  double norm() const;
  static BlochVector ground() { return {0.0, 0.0, -1.0}; }
};

inline constexpr double kBlochTolerance = 1e-9;

// Broadband squeezed vacuum seen by the atom. N = M = 0 is ordinary vacuum.
//
// Rate axes: the slow transverse quadrature lies in the (u, v) plane at angle
// m_phase / 2 from the u axis, the fast one perpendicular to it. m_phase = 0
// puts the slow axis on u, m_phase = pi puts it on v.
struct SqueezedReservoir {
  double n_photon = 0.0;
  double m_mag = 0.0;
  double m_phase = 0.0;

  bool is_vacuum() const { return n_photon == 0.0 && m_mag == 0.0; }
  static SqueezedReservoir ideal(double n_photon, double m_phase = 0.0);
};

struct TwoLevelAtom {
  double gamma = 1.0;     // natural decay rate, rad/s
  double detuning = 0.0;  // atom minus driving field, rad/s
};

enum class GeometryMode { beam, fountain };

// Distribution of the free-evolution time across the atomic ensemble. Only
// beam geometry uses it; fountains have a fixed launch-to-launch time.
struct TransitSpread {
  enum class Kind { delta, truncated_normal };
  Kind kind = Kind::delta;
  double rel_width = 0.0;  // standard deviation of T as a fraction of T
};

struct RamseyGeometry {
  double pulse_area = 1.5707963267948966;  // radians per interaction zone
  double free_time = 1.0;                  // seconds between zones
  double pulse_duration = 0.0;             // 0 = instantaneous rotations
  GeometryMode mode = GeometryMode::fountain;
  TransitSpread spread{};
};

struct DecayRates {
  double slow = 0.0;  // rad/s
  double fast = 0.0;  // rad/s
  double z = 0.0;     // rad/s
};

// Throws ConstraintViolation when an invariant is broken.
void validate(const BlochVector& s);
void validate(const SqueezedReservoir& r);
void validate(const TwoLevelAtom& a);
void validate(const RamseyGeometry& g);

// Transverse and longitudinal damping rates in a broadband squeezed reservoir:
//   slow = gamma (N + 1/2 - |M|), fast = gamma (N + 1/2 + |M|), z = gamma (2N + 1).
DecayRates quadrature_decay_rates(const SqueezedReservoir& res, double gamma);

// Steady-state inversion -1/(2N+1) the longitudinal decay relaxes toward.
double steady_state_inversion(const SqueezedReservoir& res);

// True when 1/gamma_slow exceeds the atom/light interaction time, i.e. the
// reduced-noise quadrature survives the whole detection window.
bool slow_decay_outlasts(const SqueezedReservoir& res, double gamma,
                         double interaction_time);

// One classical fourth-order Runge-Kutta step of the damped, driven Bloch
// equations. dt == 0 returns the input. Throws IntegrationStepError unless
// dt * max(rates, |rabi|, |detuning|) < 0.1.
BlochVector evolve_bloch(const BlochVector& state, const TwoLevelAtom& atom,
                         const SqueezedReservoir& res, double rabi, double dt,
                         double drive_phase = 0.0);

// Fixed-step integration over `duration` using ceil(duration / max_step) equal
// steps, additionally refined so every step satisfies the 0.1 bound with margin.
BlochVector evolve_bloch_for(const BlochVector& state, const TwoLevelAtom& atom,
                             const SqueezedReservoir& res, double rabi,
                             double duration, double max_step,
                             double drive_phase = 0.0);

// Instantaneous rotation by `area` about the equatorial axis at `phase`.
BlochVector rabi_pulse(const BlochVector& state, double area, double phase);

// Ramsey transition probability (1 + w)/2 after pulse, free evolution, pulse,
// starting from the ground state. The total detuning is atom.detuning +
// lo_detuning. Free evolution is ideal precession when `res` is vacuum and
// damped integration otherwise. Beam geometry averages over the transit spread.
double ramsey_probability(const RamseyGeometry& geom, const TwoLevelAtom& atom,
                          double lo_detuning, const SqueezedReservoir& res);

std::string_view to_string(GeometryMode m);
GeometryMode geometry_mode_from(std::string_view s);

}  // namespace sqclock
