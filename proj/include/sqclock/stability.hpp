#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqclock/record.hpp"

namespace sqclock {

struct StabilityCurve {
  std::vector<double> taus;    // s, strictly increasing
  std::vector<double> sigmas;  // Allan deviation
  std::vector<std::uint64_t> n_pairs;
};

// A requested averaging time that could not be evaluated.
struct OmittedTau {
  double tau = 0.0;
  std::string reason;
};

struct AllanResult {
  StabilityCurve curve;
  std::vector<OmittedTau> omitted;
};

// Overlapping Allan deviation. Each tau must equal m * tau0 with
// 1 <= m <= floor(len / 3); others are omitted with a reason.
//
//   sigma^2(m tau0) = 1 / (2 (L - 2m + 1)) * sum_k (ybar_{k+m} - ybar_k)^2
//
// where ybar_k is the mean of y_k .. y_{k+m-1} and L the record length.
AllanResult allan_deviation(const FrequencyRecord& record,
                            const std::vector<double>& taus);

// tau0 * {1, 2, 4, ...} up to the longest admissible averaging time.
std::vector<double> octave_taus(const FrequencyRecord& record);

// delta_nu tau^-1/2 / (nu snr).
double predicted_sigma(const ClockLine& line, double snr, double tau);

struct SlopeFit {
  double exponent = 0.0;
  double level = 0.0;  // fitted sigma at tau = 1 s
  std::size_t points = 0;
};

// Least-squares line through (log tau, log sigma) for tau_min <= tau <= tau_max.
// Throws FitError with fewer than three usable points.
SlopeFit fit_slope(const StabilityCurve& curve, double tau_min, double tau_max);

}  // namespace sqclock
