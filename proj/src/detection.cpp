#include "sqclock/detection.hpp"

#include <cmath>

#include "sqclock/errors.hpp"

namespace sqclock {

namespace {

double calibration(const DetectionConfig& cfg) {
  return cfg.c_scale * cfg.eta_s * cfg.eta_0 * std::sqrt(cfg.p_lo * cfg.p_x);
}

FormRegistry make_builtin() {
  FormRegistry r;
  r.add_c("separable", [](const DetectionConfig& cfg, double flux) {
    return calibration(cfg) * flux;
  });
  r.add_f("lorentzian", [](double omega, double width) {
    return -(width * width) / (width * width + omega * omega);
  });
  r.add_f("gaussian", [](double omega, double width) {
    return -std::exp(-0.5 * omega * omega / (width * width));
  });
  r.add_f("flat", [](double, double) { return -1.0; });
  return r;
}

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

double denominator(const DetectionConfig& cfg, double atom_flux) {
  const double d = 1.0 + cfg.xi * squeezing_spectrum(cfg, atom_flux);
  if (!(d > 0.0))
    throw UnphysicalDenominator(
        "1 + xi*S = " + std::to_string(d) +
        " <= 0: detection parameters outside the squeezed S/N model");
  return d;
}

}  // namespace

const FormRegistry& FormRegistry::builtin() {
  static const FormRegistry registry = make_builtin();
  return registry;
}

void FormRegistry::add_c(std::string name, CForm f) { c_[std::move(name)] = std::move(f); }
void FormRegistry::add_f(std::string name, FForm f) { f_[std::move(name)] = std::move(f); }

const FormRegistry::CForm& FormRegistry::c(const std::string& name) const {
  auto it = c_.find(name);
  if (it == c_.end()) throw ConfigError("unknown C form '" + name + "'");
  return it->second;
}

const FormRegistry::FForm& FormRegistry::f(const std::string& name) const {
  auto it = f_.find(name);
  if (it == f_.end()) throw ConfigError("unknown F form '" + name + "'");
  return it->second;
}

void validate(const PhotonBudget& b) {
  if (!(b.alpha >= 0.0 && b.beta >= 0.0 && b.a_amp >= 0.0))
    throw ConstraintViolation("photon budget alpha, beta, |A| must be >= 0");
  if (!(b.t_meas > 0.0)) throw ConstraintViolation("photon budget t_meas must be > 0");
  if (b.bandwidth == 0.0) throw DivisionError("photon budget bandwidth is zero");
  if (!(b.bandwidth > 0.0)) throw ConstraintViolation("photon budget bandwidth must be > 0");
}

void validate(const DetectionConfig& cfg) {
  if (!in_unit(cfg.eta_s) || !in_unit(cfg.eta_0))
    throw ConstraintViolation("detection efficiencies must lie in [0, 1]");
  if (!(cfg.p_lo >= 0.0 && cfg.p_x >= 0.0))
    throw ConstraintViolation("detection powers must be >= 0");
  if (!(cfg.f_width > 0.0)) throw ConstraintViolation("detection f_width must be > 0");
  if (!(cfg.xi >= 0.0)) throw ConstraintViolation("detection xi must be >= 0");
  if (!(cfg.interaction_time >= 0.0))
    throw ConstraintViolation("detection interaction_time must be >= 0");
  if (!std::isfinite(cfg.phi_minus) || !std::isfinite(cfg.omega_0) ||
      !std::isfinite(cfg.c_scale) || !std::isfinite(cfg.bloch_angle))
    throw ConstraintViolation("detection parameters must be finite");
}

void validate(const AtomicResponse& r) {
  if (!(r.delta_vac >= 0.0 && r.delta_sq >= 0.0))
    throw ConstraintViolation("atomic responses must be >= 0");
}

double photon_number(const PhotonBudget& b) {
  validate(b);
  const double field = b.beta * b.a_amp;
  return b.alpha * b.t_meas * field * field / b.bandwidth;
}

double projection_noise_term(double atom_flux, double theta, double phi) {
  if (!(atom_flux >= 0.0)) throw ConstraintViolation("atom flux must be >= 0");
  const double c = std::cos(theta);
  return atom_flux * (c * c - 1.0) * std::cos(2.0 * phi);
}

double squeezing_spectrum(const DetectionConfig& cfg, double atom_flux) {
  return squeezing_spectrum(cfg, atom_flux, FormRegistry::builtin());
}

double squeezing_spectrum(const DetectionConfig& cfg, double atom_flux,
                          const FormRegistry& forms) {
  validate(cfg);
  if (!(atom_flux >= 0.0)) throw ConstraintViolation("atom flux must be >= 0");
  const double c = forms.c(cfg.c_form)(cfg, atom_flux);
  const double f = forms.f(cfg.f_form)(cfg.omega_0, cfg.f_width);
  double s = c * f * std::cos(2.0 * cfg.phi_minus);
  if (cfg.wiring == ProjectionWiring::additive)
    s += calibration(cfg) *
         projection_noise_term(atom_flux, cfg.bloch_angle, cfg.phi_minus);
  return s;
}

double snr_coherent(const PhotonBudget& b, const AtomicResponse& resp) {
  validate(resp);
  return photon_number(b) * resp.delta_vac * resp.delta_vac / 2.0;
}

double snr_squeezed(const PhotonBudget& b, const AtomicResponse& resp,
                    const DetectionConfig& cfg, double atom_flux) {
  validate(resp);
  const double d = denominator(cfg, atom_flux);
  return photon_number(b) * resp.delta_sq * resp.delta_sq / (2.0 * d);
}

double effective_noise_scale(const DetectionConfig& cfg, double atom_flux) {
  return std::sqrt(denominator(cfg, atom_flux));
}

std::string to_string(ProjectionWiring w) {
  return w == ProjectionWiring::folded ? "folded" : "additive";
}

ProjectionWiring projection_wiring_from(const std::string& s) {
  if (s == "folded") return ProjectionWiring::folded;
  if (s == "additive") return ProjectionWiring::additive;
  throw ConfigError("unknown projection wiring '" + s + "' (expected folded | additive)");
}

}  // namespace sqclock
