// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sqclock/atom_dynamics.hpp"
#include "sqclock/clock_sim.hpp"
#include "sqclock/commands.hpp"
#include "sqclock/detection.hpp"
#include "sqclock/errors.hpp"
#include "sqclock/rng.hpp"
#include "sqclock/stability.hpp"

using namespace sqclock;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failure messages; keeps going so the detail line
// reports everything measured.
struct Check {
  Outcome& o;
  int shown = 0;
  void operator()(bool ok, const std::string& what) {
    if (ok) return;
    o.pass = false;
    if (shown++ < 3) o.detail += (o.detail.empty() ? "" : "; ") + what;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ---- 1. signal-to-noise algebra ------------------------------------------

Outcome snr_algebra() {
  Outcome o;
  Check check{o};
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto in = [&](double a, double b) { return a + (b - a) * u01(gen); };
  int sets = 0;
  double worst_eq = 0.0, worst_ratio = 0.0;
  while (sets < 100) {
    PhotonBudget b{in(0.1, 2), in(0.1, 10), in(0.1, 2), in(0.5, 50), in(0.5, 100)};
    const double delta = in(0.01, 3);
    DetectionConfig d;
    d.eta_s = in(0.1, 1);
    d.eta_0 = in(0.1, 1);
    d.p_lo = in(0.01, 5);
    d.p_x = in(0.01, 5);
    d.phi_minus = in(-kPi, kPi);
    d.omega_0 = in(-5, 5);
    d.f_width = in(0.1, 5);
    d.c_scale = in(1e-8, 1e-6);
    d.xi = in(0, 3);
    const double flux = in(1e5, 1e7);

    // Spectrum from its closed form, independent of the library forms.
    const double c = d.c_scale * d.eta_s * d.eta_0 * std::sqrt(d.p_lo * d.p_x) * flux;
    const double w2 = d.f_width * d.f_width;
    const double s = c * (-w2 / (w2 + d.omega_0 * d.omega_0)) * std::cos(2 * d.phi_minus);
    if (1.0 + d.xi * s <= 0.05) continue;  // outside the physical region
    ++sets;

    const AtomicResponse same{delta, delta};
    const double coh = snr_coherent(b, same);
    DetectionConfig off = d;
    off.xi = 0.0;
    const double e1 = rel(snr_squeezed(b, same, off, flux), coh);
    const double e2 = rel(snr_squeezed(b, same, d, flux) / coh, 1.0 / (1.0 + d.xi * s));
    worst_eq = std::max(worst_eq, e1);
    worst_ratio = std::max(worst_ratio, e2);
  }
  check(worst_eq <= 1e-12, fmt("xi=0 mismatch %.3g", worst_eq));
  check(worst_ratio <= 1e-12, fmt("ratio mismatch %.3g", worst_ratio));
  o.detail = fmt("100 sets, max rel err xi=0 %.2g, ratio %.2g", worst_eq, worst_ratio) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// ---- 2. quadrature decay --------------------------------------------------

Outcome quadrature_decay() {
  Outcome o;
  Check check{o};
  const double gamma = 2.3;
  const DecayRates vac = quadrature_decay_rates(SqueezedReservoir{}, gamma);
  check(vac.slow == gamma / 2 && vac.fast == gamma / 2 && vac.z == gamma, "vacuum rates");

  int grid = 0, agree = 0;
  for (int i = 0; i < 20; ++i) {
    const double n = 0.15 * i;
    const double m_max = std::sqrt(n * (n + 1));
    for (int j = 0; j < 20; ++j) {
      const double m = m_max * j / 19.0;
      const SqueezedReservoir r{n, m, 0.3};
      ++grid;
      agree += (quadrature_decay_rates(r, gamma).slow < gamma / 2) == (std::abs(m) > n);
    }
  }
  check(agree == grid, fmt("iff rule held on %.0f of %.0f points", agree, grid));

  // Free decay against exponentials along the principal axes.
  std::mt19937_64 gen(202);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double n = 2.0 * u01(gen);
    const double m = std::sqrt(n * (n + 1)) * u01(gen);
    const double phase = 2 * kPi * u01(gen);
    const SqueezedReservoir r{n, m, phase};
    const TwoLevelAtom atom{1.0, 0.0};
    const double t = 0.2 + 1.5 * u01(gen);
    const double theta = 2 * kPi * u01(gen), zen = kPi * u01(gen);
    const BlochVector r0{std::sin(zen) * std::cos(theta), std::sin(zen) * std::sin(theta),
                         std::cos(zen)};
    const BlochVector got = evolve_bloch_for(r0, atom, r, 0.0, t, 1e-3);

    const DecayRates d = quadrature_decay_rates(r, atom.gamma);
    const double ca = std::cos(phase / 2), sa = std::sin(phase / 2);
    const double slow0 = r0.u * ca + r0.v * sa, fast0 = -r0.u * sa + r0.v * ca;
    const double slow = slow0 * std::exp(-d.slow * t), fast = fast0 * std::exp(-d.fast * t);
    const double wss = -1.0 / (2 * n + 1);
    const BlochVector want{slow * ca - fast * sa, slow * sa + fast * ca,
                           wss + (r0.w - wss) * std::exp(-d.z * t)};
    const double scale = std::max({std::abs(want.u), std::abs(want.v), std::abs(want.w)});
    for (double e : {got.u - want.u, got.v - want.v, got.w - want.w})
      worst = std::max(worst, std::abs(e) / scale);
  }
  check(worst < 1e-5, fmt("integrator rel err %.3g", worst));
  o.detail = fmt("grid %.0f/%.0f, integrator max rel err %.2g", agree, grid, worst) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// ---- 3. Ramsey fringe -----------------------------------------------------

Outcome ramsey_fringe() {
  Outcome o;
  Check check{o};
  RamseyGeometry g;
  g.free_time = 0.37;
  const TwoLevelAtom atom{1.0, 0.0};
  const SqueezedReservoir vac;
  const double t = g.free_time;
  const double p0 = ramsey_probability(g, atom, 0.0, vac);
  const double ppi = ramsey_probability(g, atom, kPi / t, vac);
  const double phalf = ramsey_probability(g, atom, kPi / (2 * t), vac);
  check(std::abs(p0 - 1.0) < 1e-9, fmt("p(0) = %.12g", p0));
  check(std::abs(ppi) < 1e-9, fmt("p(pi) = %.3g", ppi));
  check(std::abs(phalf - 0.5) < 1e-9, fmt("p(pi/2) = %.12g", phalf));

  double worst = 0.0;
  const double span = 20.0 / t;
  for (int i = 0; i < 1001; ++i) {
    const double d = -span + 2 * span * i / 1000.0;
    worst = std::max(worst, std::abs(ramsey_probability(g, atom, d, vac) -
                                     ramsey_probability(g, atom, -d, vac)));
  }
  check(worst < 1e-9, fmt("asymmetry %.3g", worst));
  o.detail = fmt("|p0-1| %.1g, |p_pi| %.1g, ", std::abs(p0 - 1), std::abs(ppi)) +
             fmt("|p_half-0.5| %.1g, asymmetry %.1g", std::abs(phalf - 0.5), worst) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// ---- 4. projection-noise sampling ------------------------------------------

double variance(const std::vector<double>& x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / (x.size() - 1);
}

Outcome projection_sampling() {
  Outcome o;
  Check check{o};
  const double p = 0.5;
  const std::int64_t n = 1000000;
  const int cycles = 10000;

  // Noise scale through the detection chain: omega_0 = 0, phi = 0 gives S = -C.
  DetectionConfig d;
  d.xi = 1.0;
  d.c_scale = 0.75 / 1e6;
  const double scale = effective_noise_scale(d, 1e6);
  check(std::abs(scale - 0.5) < 1e-12, fmt("noise scale %.6g", scale));

  const double base = n * p * (1 - p);
  int ok_coh = 0, ok_sq = 0;
  double worst_coh = 0.0, worst_sq = 0.0, pooled_coh = 0.0, pooled_sq = 0.0;
  std::vector<double> xs(cycles);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (int k = 0; k < cycles; ++k) {
      CounterRng rng(seed, static_cast<std::uint64_t>(k), StreamTag::test);
      xs[k] = sample_detected_atoms(p, n, DetectionMode::coherent, 1.0, rng);
    }
    const double rc = variance(xs) / base;
    const double ec = std::abs(rc - 1.0);
    for (int k = 0; k < cycles; ++k) {
      CounterRng rng(seed, static_cast<std::uint64_t>(k), StreamTag::test);
      xs[k] = sample_detected_atoms(p, n, DetectionMode::squeezed, scale, rng);
    }
    const double rs = variance(xs) / (scale * scale * base);
    const double es = std::abs(rs - 1.0);
    pooled_coh += rc / 20;
    pooled_sq += rs / 20;
    ok_coh += ec < 0.03;
    ok_sq += es < 0.03;
    worst_coh = std::max(worst_coh, ec);
    worst_sq = std::max(worst_sq, es);
  }
  check(ok_coh >= 19, fmt("coherent within 3%% for %.0f/20 seeds", ok_coh));
  check(ok_sq >= 19, fmt("squeezed within 3%% for %.0f/20 seeds", ok_sq));
  o.detail = fmt("coherent %.0f/20, squeezed %.0f/20 seeds within 3%%", ok_coh, ok_sq) +
             fmt(" (worst %.2f%%, %.2f%%)", 100 * worst_coh, 100 * worst_sq) +
             fmt(", mean var/target %.4f, %.4f", pooled_coh, pooled_sq) +
             // A 1e4-sample variance has relative sd sqrt(2/9999) = 1.41%, so 3% is
             // a 2.1 sigma band and an unbiased sampler meets 19/20 only ~85% of the time.
             fmt(", per-seed sd %.2f%%", 100 * std::sqrt(2.0 / (cycles - 1))) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// ---- 5. closed-loop stability ----------------------------------------------

ClockConfig quiet_fountain() {
  ClockConfig c;
  c.geometry = GeometryMode::fountain;
  c.ramsey.mode = GeometryMode::fountain;
  c.ramsey.free_time = 0.5;
  c.cycle_time = 1.0;
  c.atoms_per_cycle = 1000000;
  c.line.delta_nu = 1.0 / (2 * c.ramsey.free_time);
  c.servo_gain = 1.0;
  c.lo.white_fm = 0.0;
  c.lo.flicker_fm = 0.0;
  c.seed = 20240601;
  return c;
}

Outcome closed_loop_stability() {
  Outcome o;
  Check check{o};
  const ClockConfig c = quiet_fountain();
  const FrequencyRecord rec = run_clock(c, 100000);
  const AllanResult all = allan_deviation(rec, octave_taus(rec));
  const SlopeFit fit = fit_slope(all.curve, rec.tau0, 1024 * rec.tau0);
  check(fit.exponent >= -0.55 && fit.exponent <= -0.45, fmt("slope %.4f", fit.exponent));

  const double snr = cycle_snr(c);
  const std::vector<double> taus = {rec.tau0, 4 * rec.tau0, 16 * rec.tau0, 64 * rec.tau0};
  const AllanResult sel = allan_deviation(rec, taus);
  std::vector<double> ratios;
  for (std::size_t i = 0; i < sel.curve.taus.size(); ++i)
    ratios.push_back(sel.curve.sigmas[i] / predicted_sigma(c.line, snr, sel.curve.taus[i]));
  check(ratios.size() == 4, "missing averaging times");
  const double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / ratios.size();
  double spread = 0.0;
  for (double r : ratios) spread = std::max(spread, std::abs(r / mean - 1.0));
  check(spread <= 0.20, fmt("ratio spread %.1f%%", 100 * spread));
  check(rec.metadata.skipped_cycles == 0 && rec.metadata.lock_lost == 0, "servo upsets");

  std::string rs;
  for (double r : ratios) rs += (rs.empty() ? "" : ",") + fmt("%.4f", r);
  o.detail = fmt("slope %.4f over %.0f points; ", fit.exponent, fit.points) + "sim/pred = [" +
             rs + "]" + fmt(", mean %.4f (1/pi = %.4f), max dev %.1f%%", mean, 1 / kPi, 100 * spread) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// ---- 6. squeezing benefit end to end ---------------------------------------

Outcome squeezing_benefit() {
  Outcome o;
  Check check{o};
  ClockConfig c = quiet_fountain();
  c.seed = 7;
  c.detection.omega_0 = 0.0;
  c.detection.phi_minus = 0.0;
  c.detection.xi = 1.0;
  c.detection.c_scale = 0.75 / atom_flux(c);
  const ComparisonRecords recs = run_comparison(c, 100000);
  const double tau0 = recs.coherent.tau0;
  const double sc = allan_deviation(recs.coherent, {tau0}).curve.sigmas.at(0);
  const double ss = allan_deviation(recs.squeezed, {tau0}).curve.sigmas.at(0);
  const double ratio = ss / sc;
  check(std::abs(ratio - 0.5) <= 0.05, fmt("ratio %.4f", ratio));
  o.detail = fmt("sigma_sq/sigma_coh at tau0 = %.4f (coh %.3g, sq %.3g)", ratio, sc, ss) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// ---- 7. command determinism ----------------------------------------------------

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sqclock");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != kExitOk) std::cerr << err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  Outcome o;
  Check check{o};
  const std::string dir = SQCLOCK_CONFIG_DIR;
  const fs::path root = fs::temp_directory_path() / "sqclock_acceptance_determinism";
  fs::remove_all(root);
  struct Case {
    std::string command, config;
  };
  const std::vector<Case> cases = {
      {"fringe", dir + "/fringe_squeezed.yaml"},
      {"spectrum", dir + "/squeezed_comparison.yaml"},
      {"snr", dir + "/squeezed_comparison.yaml"},
      {"clock", dir + "/squeezed_comparison.yaml"},
      {"allan", dir + "/fountain.yaml"},
  };
  int compared = 0;
  for (const auto& cs : cases) {
    const fs::path a = root / (cs.command + "_a"), b = root / (cs.command + "_b");
    check(cli({cs.command, "--config", cs.config, "--out", a.string()}) == kExitOk,
          cs.command + " failed");
    check(cli({cs.command, "--config", cs.config, "--out", b.string()}) == kExitOk,
          cs.command + " failed");
    int files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      // The manifest records wall-clock time; everything else is data.
      if (e.path().filename() == "manifest.json") continue;
      ++files;
      const fs::path twin = b / e.path().filename();
      check(fs::exists(twin) && slurp(e.path()) == slurp(twin),
            cs.command + ": " + e.path().filename().string() + " differs");
    }
    check(files > 0, cs.command + " wrote no data files");
    compared += files;
  }
  fs::remove_all(root);
  o.detail = fmt("5 commands, %.0f data files byte-identical across reruns", compared) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// ---- 8. Allan estimator goldens ------------------------------------------------

Outcome allan_goldens() {
  Outcome o;
  Check check{o};
  FrequencyRecord flat;
  flat.tau0 = 1.0;
  flat.samples.assign(1000, 4.2e-13);
  for (double s : allan_deviation(flat, octave_taus(flat)).curve.sigmas)
    check(s == 0.0, fmt("constant gives %.3g", s));

  FrequencyRecord alt;
  alt.tau0 = 1.0;
  const double a = 3e-12;
  for (int i = 0; i < 1000; ++i) alt.samples.push_back(i % 2 ? -a : a);
  const double sa = allan_deviation(alt, {1.0}).curve.sigmas.at(0);
  const double ea = std::abs(sa - a * std::sqrt(2.0)) / (a * std::sqrt(2.0));
  check(ea < 1e-12, fmt("alternating rel err %.3g", ea));

  std::mt19937_64 gen(808);
  std::normal_distribution<double> dist(0.0, 1e-13);
  FrequencyRecord white;
  white.tau0 = 1.0;
  white.samples.resize(100000);
  for (double& y : white.samples) y = dist(gen);
  const AllanResult wr = allan_deviation(white, {1, 2, 4, 8, 16});
  double worst = 0.0;
  for (std::size_t i = 0; i < wr.curve.taus.size(); ++i) {
    const double want = wr.curve.sigmas[0] / std::sqrt(wr.curve.taus[i]);
    worst = std::max(worst, std::abs(wr.curve.sigmas[i] / want - 1.0));
  }
  check(worst <= 0.05, fmt("white scaling dev %.2f%%", 100 * worst));
  o.detail = fmt("alternating rel err %.1g, white m^-1/2 max dev %.2f%%", ea, 100 * worst) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "snr algebra", 1.0, snr_algebra},
      {2, "quadrature decay", 10.0, quadrature_decay},
      {3, "Ramsey fringe", 5.0, ramsey_fringe},
      {4, "projection-noise sampling", 60.0, projection_sampling},
      {5, "closed-loop stability", 600.0, closed_loop_stability},
      {6, "squeezing benefit", 600.0, squeezing_benefit},
      {7, "command determinism", 120.0, cli_determinism},
      {8, "Allan estimator goldens", 30.0, allan_goldens},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (wall > c.budget_s) {
      o.pass = false;
      o.detail += fmt("; runtime %.1f s over %.0f s budget", wall, c.budget_s);
    }
    failed += !o.pass;
    std::printf("%s [%d] %s (%.2f s / %.0f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                wall, c.budget_s, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed ? 1 : 0;
}
