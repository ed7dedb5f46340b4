#include "sqclock/stability.hpp"

#include <cmath>
#include <numeric>

#include "sqclock/errors.hpp"

namespace sqclock {

AllanResult allan_deviation(const FrequencyRecord& record,
                            const std::vector<double>& taus) {
  if (!(record.tau0 > 0.0)) throw ModelError("record tau0 must be > 0");
  const std::vector<double>& y = record.samples;
  const std::size_t len = y.size();
  AllanResult out;

  // Centre first so the prefix sums stay small: constant offsets cancel
  // before any accumulation happens.
  const double mean =
      len ? std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(len) : 0.0;
  std::vector<double> prefix(len + 1, 0.0);
  for (std::size_t i = 0; i < len; ++i) prefix[i + 1] = prefix[i] + (y[i] - mean);

  double last_tau = 0.0;
  for (double tau : taus) {
    const double ratio = tau / record.tau0;
    const double m_real = std::round(ratio);
    if (!(m_real >= 1.0) || std::abs(ratio - m_real) > 1e-9 * ratio) {
      out.omitted.push_back({tau, "not a positive integer multiple of tau0"});
      continue;
    }
    const auto m = static_cast<std::size_t>(m_real);
    if (3 * m > len) {
      out.omitted.push_back({tau, "record too short: need at least 3m samples"});
      continue;
    }
    if (!out.curve.taus.empty() && !(tau > last_tau)) {
      out.omitted.push_back({tau, "averaging times must be strictly increasing"});
      continue;
    }
    const std::size_t pairs = len - 2 * m + 1;
    double acc = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
      // m * (ybar_{k+m} - ybar_k)
      const double d = prefix[k + 2 * m] - 2.0 * prefix[k + m] + prefix[k];
      acc += d * d;
    }
    const double md = static_cast<double>(m);
    const double var = acc / (2.0 * static_cast<double>(pairs) * md * md);
    out.curve.taus.push_back(tau);
    out.curve.sigmas.push_back(std::sqrt(var));
    out.curve.n_pairs.push_back(pairs);
    last_tau = tau;
  }
  return out;
}

std::vector<double> octave_taus(const FrequencyRecord& record) {
  std::vector<double> taus;
  for (std::size_t m = 1; 3 * m <= record.samples.size(); m *= 2)
    taus.push_back(static_cast<double>(m) * record.tau0);
  return taus;
}

double predicted_sigma(const ClockLine& line, double snr, double tau) {
  if (snr == 0.0) throw DivisionError("predicted_sigma: S/N is zero");
  if (!(snr > 0.0)) throw ModelError("predicted_sigma: S/N must be > 0");
  if (!(tau > 0.0)) throw ModelError("predicted_sigma: tau must be > 0");
  if (!(line.nu > 0.0)) throw ModelError("predicted_sigma: nu must be > 0");
  return line.delta_nu / (std::sqrt(tau) * line.nu * snr);
}

SlopeFit fit_slope(const StabilityCurve& curve, double tau_min, double tau_max) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < curve.taus.size(); ++i) {
    const double t = curve.taus[i];
    if (t < tau_min || t > tau_max) continue;
    if (!(curve.sigmas[i] > 0.0))
      throw FitError("fit_slope: sigma must be > 0 at every fitted point");
    xs.push_back(std::log(t));
    ys.push_back(std::log(curve.sigmas[i]));
  }
  const std::size_t n = xs.size();
  if (n < 3) throw FitError("fit_slope: need at least 3 points in the tau range");
  const double xm = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  const double ym = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - xm) * (xs[i] - xm);
    sxy += (xs[i] - xm) * (ys[i] - ym);
  }
  if (!(sxx > 0.0)) throw FitError("fit_slope: degenerate tau range");
  const double slope = sxy / sxx;
  return {slope, std::exp(ym - slope * xm), n};
}

}  // namespace sqclock
