#pragma once

#include <functional>
#include <map>
#include <string>

namespace sqclock {

// Photon budget entering N = alpha * T * (beta |A|)^2 / B.
struct PhotonBudget {
  double alpha = 1.0;
  double t_meas = 1.0;     // s
  double beta = 1.0;
  double a_amp = 1.0;      // sqrt(photon flux)
  double bandwidth = 1.0;  // Hz
};

// How the projection-noise term enters the squeezing spectrum.
//   folded:   S = C F(Omega0) cos(2 phi)
//   additive: S = C F(Omega0) cos(2 phi) + k Ndot (cos^2 theta - 1) cos(2 phi)
// where k = c_scale eta_s eta_0 sqrt(P_LO P_x) is the same calibration as C.
enum class ProjectionWiring { folded, additive };

struct DetectionConfig {
  double eta_s = 1.0;
  double eta_0 = 1.0;
  double p_lo = 1.0;        // W
  double p_x = 1.0;         // W
  double phi_minus = 0.0;   // rad
  double omega_0 = 0.0;     // rad/s
  double xi = 0.0;
  double f_width = 1.0;     // rad/s
  double c_scale = 1.0;
  double bloch_angle = 1.5707963267948966;  // theta in the projection term
  double interaction_time = 0.0;            // s, 0 = no regime check
  std::string c_form = "separable";
  std::string f_form = "lorentzian";
  ProjectionWiring wiring = ProjectionWiring::folded;
};

struct AtomicResponse {
  double delta_vac = 1.0;
  double delta_sq = 1.0;  // carries no phase dependence
};

// Named replaceable forms for the prefactor C and the spectral factor F.
class FormRegistry {
 public:
  using CForm = std::function<double(const DetectionConfig&, double atom_flux)>;
  using FForm = std::function<double(double omega_0, double f_width)>;

  // separable C; lorentzian, gaussian and flat F.
  static const FormRegistry& builtin();

  void add_c(std::string name, CForm f);
  void add_f(std::string name, FForm f);
  const CForm& c(const std::string& name) const;  // throws ConfigError
  const FForm& f(const std::string& name) const;  // throws ConfigError
  bool has_c(const std::string& name) const { return c_.count(name) != 0; }
  bool has_f(const std::string& name) const { return f_.count(name) != 0; }

 private:
  std::map<std::string, CForm> c_;
  std::map<std::string, FForm> f_;
};

void validate(const PhotonBudget& b);
void validate(const DetectionConfig& cfg);
void validate(const AtomicResponse& r);

double photon_number(const PhotonBudget& b);

// Ndot (cos^2 theta - 1) cos(2 phi), in atoms/s.
double projection_noise_term(double atom_flux, double theta, double phi);

// S(Omega0, phi_minus). Negative at phi_minus = 0: the reduced-noise
// quadrature. Squeezing helps whenever xi * S < 0.
double squeezing_spectrum(const DetectionConfig& cfg, double atom_flux);
double squeezing_spectrum(const DetectionConfig& cfg, double atom_flux,
                          const FormRegistry& forms);

double snr_coherent(const PhotonBudget& b, const AtomicResponse& resp);

// N Delta_SQ^2 / (2 (1 + xi S)); throws UnphysicalDenominator if 1 + xi S <= 0.
double snr_squeezed(const PhotonBudget& b, const AtomicResponse& resp,
                    const DetectionConfig& cfg, double atom_flux);

// sqrt(1 + xi S), the factor applied to detection-noise standard deviations.
double effective_noise_scale(const DetectionConfig& cfg, double atom_flux);

std::string to_string(ProjectionWiring w);
ProjectionWiring projection_wiring_from(const std::string& s);

}  // namespace sqclock
