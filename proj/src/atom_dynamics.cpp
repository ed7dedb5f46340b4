#include "sqclock/atom_dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "sqclock/errors.hpp"

namespace sqclock {

namespace {

constexpr double kStepBound = 0.1;

struct Vec3 {
  double x, y, z;
};

// Right-handed rotation of `s` about unit axis `n` by `angle` (Rodrigues).
BlochVector rotate(const BlochVector& s, const Vec3& n, double angle) {
  const double c = std::cos(angle);
  const double sn = std::sin(angle);
  const double dot = n.x * s.u + n.y * s.v + n.z * s.w;
  const Vec3 cross{n.y * s.w - n.z * s.v, n.z * s.u - n.x * s.w,
                   n.x * s.v - n.y * s.u};
  return {s.u * c + cross.x * sn + n.x * dot * (1.0 - c),
          s.v * c + cross.y * sn + n.y * dot * (1.0 - c),
          s.w * c + cross.z * sn + n.z * dot * (1.0 - c)};
}

// Undamped precession about omega for time t.
BlochVector precess(const BlochVector& s, const Vec3& omega, double t) {
  const double mag =
      std::sqrt(omega.x * omega.x + omega.y * omega.y + omega.z * omega.z);
  if (mag == 0.0 || t == 0.0) return s;
  return rotate(s, {omega.x / mag, omega.y / mag, omega.z / mag}, mag * t);
}

struct Damping {
  // Symmetric 2x2 transverse decay matrix in the (u, v) basis.
  double uu, uv, vv;
  double z;
  double w_ss;
};

Damping damping_for(const SqueezedReservoir& res, double gamma) {
  const DecayRates r = quadrature_decay_rates(res, gamma);
  const double psi = 0.5 * res.m_phase;
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  return {r.slow * c * c + r.fast * s * s, (r.slow - r.fast) * c * s,
          r.slow * s * s + r.fast * c * c, r.z, steady_state_inversion(res)};
}

BlochVector rhs(const BlochVector& r, const Vec3& omega, const Damping& d) {
  return {omega.y * r.w - omega.z * r.v - (d.uu * r.u + d.uv * r.v),
          omega.z * r.u - omega.x * r.w - (d.uv * r.u + d.vv * r.v),
          omega.x * r.v - omega.y * r.u - d.z * (r.w - d.w_ss)};
}

BlochVector axpy(const BlochVector& a, double h, const BlochVector& k) {
  return {a.u + h * k.u, a.v + h * k.v, a.w + h * k.w};
}

double fastest_rate(const DecayRates& r, double rabi, double detuning) {
  return std::max({r.slow, r.fast, r.z, std::abs(rabi), std::abs(detuning)});
}

BlochVector rk4_step(const BlochVector& s, const Vec3& omega, const Damping& d,
                     double dt) {
  const BlochVector k1 = rhs(s, omega, d);
  const BlochVector k2 = rhs(axpy(s, 0.5 * dt, k1), omega, d);
  const BlochVector k3 = rhs(axpy(s, 0.5 * dt, k2), omega, d);
  const BlochVector k4 = rhs(axpy(s, dt, k3), omega, d);
  return {s.u + dt / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
          s.v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
          s.w + dt / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w)};
}

// One interaction zone: instantaneous rotation, or integrated drive over the
// finite pulse duration (damped only if the reservoir is not vacuum).
BlochVector apply_pulse(const BlochVector& s, const RamseyGeometry& g,
                        const TwoLevelAtom& atom, double detuning,
                        const SqueezedReservoir& res) {
  if (g.pulse_duration == 0.0) return rabi_pulse(s, g.pulse_area, 0.0);
  const double rabi = g.pulse_area / g.pulse_duration;
  if (res.is_vacuum()) return precess(s, {rabi, 0.0, detuning}, g.pulse_duration);
  TwoLevelAtom a = atom;
  a.detuning = detuning;
  return evolve_bloch_for(s, a, res, rabi, g.pulse_duration,
                          g.pulse_duration / 200.0);
}

double ramsey_fixed_time(const RamseyGeometry& g, const TwoLevelAtom& atom,
                         double detuning, const SqueezedReservoir& res,
                         double free_time) {
  BlochVector s = apply_pulse(BlochVector::ground(), g, atom, detuning, res);
  if (res.is_vacuum()) {
    s = precess(s, {0.0, 0.0, detuning}, free_time);
  } else {
    TwoLevelAtom a = atom;
    a.detuning = detuning;
    s = evolve_bloch_for(s, a, res, 0.0, free_time, free_time / 2000.0);
  }
  s = apply_pulse(s, g, atom, detuning, res);
  return std::clamp(0.5 * (1.0 + s.w), 0.0, 1.0);
}

}  // namespace

double BlochVector::norm() const { return std::sqrt(u * u + v * v + w * w); }

SqueezedReservoir SqueezedReservoir::ideal(double n_photon, double m_phase) {
  return {n_photon, std::sqrt(n_photon * (n_photon + 1.0)), m_phase};
}

void validate(const BlochVector& s) {
  if (!std::isfinite(s.u) || !std::isfinite(s.v) || !std::isfinite(s.w))
    throw ConstraintViolation("Bloch vector has non-finite components");
  if (s.norm() > 1.0 + kBlochTolerance)
    throw ConstraintViolation("Bloch vector outside the unit sphere: |r| = " +
                              std::to_string(s.norm()));
}

void validate(const SqueezedReservoir& r) {
  if (!(r.n_photon >= 0.0) || !(r.m_mag >= 0.0) || !std::isfinite(r.n_photon) ||
      !std::isfinite(r.m_mag) || !std::isfinite(r.m_phase))
    throw ConstraintViolation("squeezed reservoir needs finite N >= 0 and |M| >= 0");
  const double bound = std::sqrt(r.n_photon * (r.n_photon + 1.0));
  if (r.m_mag > bound * (1.0 + 1e-12))
    throw ConstraintViolation("squeezed reservoir violates |M| <= sqrt(N(N+1)): |M| = " +
                              std::to_string(r.m_mag) +
                              ", bound = " + std::to_string(bound));
}

void validate(const TwoLevelAtom& a) {
  if (!(a.gamma > 0.0) || !std::isfinite(a.gamma))
    throw ConstraintViolation("two-level atom needs gamma > 0");
  if (!std::isfinite(a.detuning))
    throw ConstraintViolation("two-level atom detuning must be finite");
}

void validate(const RamseyGeometry& g) {
  if (!(g.free_time > 0.0) || !std::isfinite(g.free_time))
    throw ConstraintViolation("Ramsey free_time must be > 0");
  if (!(g.pulse_duration >= 0.0) || !std::isfinite(g.pulse_duration))
    throw ConstraintViolation("Ramsey pulse_duration must be >= 0");
  if (!(g.pulse_area >= 0.0 && g.pulse_area <= 2.0 * std::numbers::pi))
    throw ConstraintViolation("Ramsey pulse_area must lie in [0, 2pi]");
  if (!(g.spread.rel_width >= 0.0 && g.spread.rel_width < 1.0 / 3.0))
    throw ConstraintViolation("transit spread rel_width must lie in [0, 1/3)");
}

DecayRates quadrature_decay_rates(const SqueezedReservoir& res, double gamma) {
  validate(res);
  if (!(gamma > 0.0)) throw ConstraintViolation("decay rate gamma must be > 0");
  const double base = res.n_photon + 0.5;
  return {gamma * std::max(0.0, base - res.m_mag), gamma * (base + res.m_mag),
          gamma * (2.0 * res.n_photon + 1.0)};
}

double steady_state_inversion(const SqueezedReservoir& res) {
  return -1.0 / (2.0 * res.n_photon + 1.0);
}

bool slow_decay_outlasts(const SqueezedReservoir& res, double gamma,
                         double interaction_time) {
  const DecayRates r = quadrature_decay_rates(res, gamma);
  return r.slow == 0.0 || 1.0 / r.slow > interaction_time;
}

BlochVector evolve_bloch(const BlochVector& state, const TwoLevelAtom& atom,
                         const SqueezedReservoir& res, double rabi, double dt,
                         double drive_phase) {
  if (dt == 0.0) return state;
  if (!(dt > 0.0)) throw IntegrationStepError("evolve_bloch needs dt >= 0");
  validate(atom);
  const DecayRates rates = quadrature_decay_rates(res, atom.gamma);
  const double fastest = fastest_rate(rates, rabi, atom.detuning);
  if (dt * fastest >= kStepBound)
    throw IntegrationStepError("step too coarse: dt * max rate = " +
                               std::to_string(dt * fastest) + " >= 0.1");
  const Vec3 omega{rabi * std::cos(drive_phase), rabi * std::sin(drive_phase),
                   atom.detuning};
  return rk4_step(state, omega, damping_for(res, atom.gamma), dt);
}

BlochVector evolve_bloch_for(const BlochVector& state, const TwoLevelAtom& atom,
                             const SqueezedReservoir& res, double rabi,
                             double duration, double max_step,
                             double drive_phase) {
  if (duration == 0.0) return state;
  if (!(duration > 0.0) || !(max_step > 0.0))
    throw IntegrationStepError("evolve_bloch_for needs duration, max_step > 0");
  validate(atom);
  const DecayRates rates = quadrature_decay_rates(res, atom.gamma);
  const double fastest = fastest_rate(rates, rabi, atom.detuning);
  // Keep dt * fastest <= 0.02, well inside the 0.1 bound.
  const double steps = std::max(std::ceil(duration / max_step),
                                std::ceil(duration * fastest / 0.02));
  const auto n = static_cast<long long>(std::max(1.0, steps));
  const double dt = duration / static_cast<double>(n);
  const Vec3 omega{rabi * std::cos(drive_phase), rabi * std::sin(drive_phase),
                   atom.detuning};
  const Damping d = damping_for(res, atom.gamma);
  BlochVector s = state;
  for (long long i = 0; i < n; ++i) s = rk4_step(s, omega, d, dt);
  return s;
}

BlochVector rabi_pulse(const BlochVector& state, double area, double phase) {
  if (!(area >= 0.0 && area <= 2.0 * std::numbers::pi))
    throw ConstraintViolation("pulse area must lie in [0, 2pi]");
  return rotate(state, {std::cos(phase), std::sin(phase), 0.0}, area);
}

double ramsey_probability(const RamseyGeometry& geom, const TwoLevelAtom& atom,
                          double lo_detuning, const SqueezedReservoir& res) {
  validate(geom);
  validate(atom);
  validate(res);
  const double detuning = atom.detuning + lo_detuning;
  const bool spread = geom.mode == GeometryMode::beam &&
                      geom.spread.kind == TransitSpread::Kind::truncated_normal &&
                      geom.spread.rel_width > 0.0;
  if (!spread) return ramsey_fixed_time(geom, atom, detuning, res, geom.free_time);

  // Simpson quadrature of the normal density truncated at +-3 sigma. The grid
  // is symmetric about T, so fringe symmetry in detuning is preserved.
  constexpr int kIntervals = 120;
  const double sigma = geom.spread.rel_width * geom.free_time;
  const double lo = geom.free_time - 3.0 * sigma;
  const double h = 6.0 * sigma / kIntervals;
  double acc = 0.0;
  double norm = 0.0;
  for (int i = 0; i <= kIntervals; ++i) {
    const double t = lo + h * i;
    const double x = (t - geom.free_time) / sigma;
    const double simpson = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double weight = simpson * std::exp(-0.5 * x * x);
    acc += weight * ramsey_fixed_time(geom, atom, detuning, res, t);
    norm += weight;
  }
  return std::clamp(acc / norm, 0.0, 1.0);
}

std::string_view to_string(GeometryMode m) {
  return m == GeometryMode::beam ? "beam" : "fountain";
}

GeometryMode geometry_mode_from(std::string_view s) {
  if (s == "beam") return GeometryMode::beam;
  if (s == "fountain") return GeometryMode::fountain;
  throw ConfigError("unknown geometry mode '" + std::string(s) +
                    "' (expected beam | fountain)");
}

}  // namespace sqclock
