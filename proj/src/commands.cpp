#include "sqclock/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sqclock/config.hpp"
#include "sqclock/errors.hpp"
#include "sqclock/record_io.hpp"
#include "sqclock/stability.hpp"

namespace sqclock {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string format = "csv";
  bool plot_script = false;
  bool compare = false;
  std::string record_path;
};

// A rectangular numeric table written as CSV or as a JSON array of rows.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string cell(double v) {
  if (std::isnan(v)) return "nan";
  return format_double(v);
}

void write_table(std::ostream& os, const Table& t, const std::string& format) {
  if (format == "json") {
    ordered_json arr = ordered_json::array();
    for (const auto& row : t.rows) {
      ordered_json obj;
      for (std::size_t i = 0; i < t.columns.size(); ++i)
        obj[t.columns[i]] = std::isnan(row[i]) ? ordered_json(nullptr) : ordered_json(row[i]);
      arr.push_back(std::move(obj));
    }
    os << arr.dump(2) << '\n';
    return;
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell(row[i]);
    os << '\n';
  }
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return v;
}

// Collects the files a command produces, in order.
class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& fill) {
    const fs::path p = dir_ / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ModelError("cannot write '" + p.string() + "'");
    fill(os);
    if (!os) throw ModelError("write failed for '" + p.string() + "'");
    files_.push_back(p.string());
  }

  const fs::path& path() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

std::string data_name(const std::string& stem, const Options& o) {
  return stem + (o.format == "json" ? ".json" : ".csv");
}

void maybe_plot_script(OutputDir& out, const Options& o, const std::string& data,
                       const std::string& x, const std::string& y, bool loglog) {
  if (!o.plot_script) return;
  const std::string stem = fs::path(data).stem().string();
  out.write(stem + ".plot.py", [&](std::ostream& os) {
    os << "import csv, sys\nimport matplotlib.pyplot as plt\n\n"
       << "rows = list(csv.DictReader(open('" << data << "')))\n"
       << "x = [float(r['" << x << "']) for r in rows]\n"
       << "y = [float(r['" << y << "']) for r in rows]\n"
       << "plt." << (loglog ? "loglog" : "plot") << "(x, y, 'o-')\n"
       << "plt.xlabel('" << x << "')\nplt.ylabel('" << y << "')\n"
       << "plt.savefig('" << stem << ".png', dpi=150)\n";
  });
}

ExperimentConfig resolve_config(const Options& o, bool required) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    cfg = load_config(o.config_path);
  } else if (required) {
    throw ConfigError("--config is required for this command");
  }
  if (o.seed) cfg.clock.seed = *o.seed;
  return cfg;
}

ordered_json record_sidecar(const FrequencyRecord& rec, const ExperimentConfig& cfg,
                            const std::string& mode) {
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(rec.metadata.config_hash));
  ordered_json j;
  j["tau0_s"] = rec.tau0;
  j["samples"] = rec.samples.size();
  j["detection_mode"] = mode;
  j["seed"] = rec.metadata.seed;
  j["n_cycles"] = rec.metadata.n_cycles;
  j["skipped_cycles"] = rec.metadata.skipped_cycles;
  j["lock_lost"] = rec.metadata.lock_lost;
  j["config_hash"] = hash;
  j["config"] = to_json(cfg);
  return j;
}

void write_record(OutputDir& out, const Options& o, const std::string& stem,
                  const FrequencyRecord& rec, const ExperimentConfig& cfg,
                  const std::string& mode) {
  if (o.format == "json") {
    Table t{{"index", "time_s", "y_fractional"}, {}};
    for (std::size_t i = 0; i < rec.samples.size(); ++i)
      t.rows.push_back({static_cast<double>(i), static_cast<double>(i) * rec.tau0,
                        rec.samples[i]});
    out.write(stem + "_samples.json", [&](std::ostream& os) { write_table(os, t, "json"); });
  } else {
    out.write(stem + ".csv", [&](std::ostream& os) { write_record_csv(os, rec); });
  }
  out.write(stem + ".json", [&](std::ostream& os) {
    os << record_sidecar(rec, cfg, mode).dump(2) << '\n';
  });
  maybe_plot_script(out, o, stem + ".csv", "time_s", "y_fractional", false);
}

std::vector<std::string> regime_warnings(const ExperimentConfig& cfg) {
  std::vector<std::string> w;
  const auto& d = cfg.clock.detection;
  if (d.interaction_time > 0.0 &&
      !slow_decay_outlasts(cfg.clock.reservoir, cfg.clock.atom.gamma, d.interaction_time))
    w.push_back("slow-quadrature decay time is shorter than the detection interaction time");
  return w;
}

void cmd_fringe(const Options& o, OutputDir& out, ordered_json& summary) {
  const ExperimentConfig cfg = resolve_config(o, true);
  const ClockConfig& c = cfg.clock;
  Table t{{"delta_rad_s", "probability"}, {}};
  for (double d : linspace(cfg.fringe.detuning_min, cfg.fringe.detuning_max, cfg.fringe.points))
    t.rows.push_back({d, ramsey_probability(c.ramsey, c.atom, d, c.reservoir)});
  const std::string name = data_name("fringe", o);
  out.write(name, [&](std::ostream& os) { write_table(os, t, o.format); });
  maybe_plot_script(out, o, name, "delta_rad_s", "probability", false);
  summary["points"] = t.rows.size();
}

void cmd_spectrum(const Options& o, OutputDir& out, ordered_json& summary) {
  const ExperimentConfig cfg = resolve_config(o, true);
  const double flux = atom_flux(cfg.clock);
  const SpectrumGrid& g = cfg.spectrum;
  Table t{{"omega_0_rad_s", "phi_minus_rad", "S"}, {}};
  for (double phi : linspace(g.phi_min, g.phi_max, g.phi_points)) {
    for (double omega : linspace(g.omega_min, g.omega_max, g.omega_points)) {
      DetectionConfig d = cfg.clock.detection;
      d.phi_minus = phi;
      d.omega_0 = omega;
      t.rows.push_back({omega, phi, squeezing_spectrum(d, flux)});
    }
  }
  const std::string name = data_name("spectrum", o);
  out.write(name, [&](std::ostream& os) { write_table(os, t, o.format); });
  summary["atom_flux"] = flux;
  summary["points"] = t.rows.size();
}

void cmd_snr(const Options& o, OutputDir& out, ordered_json& summary) {
  const ExperimentConfig cfg = resolve_config(o, true);
  const ClockConfig& c = cfg.clock;
  const double flux = atom_flux(c);
  const bool xi_sweep = cfg.snr.variable == SnrSweep::Variable::xi;
  const double vac = snr_coherent(c.budget, c.response);
  Table t{{xi_sweep ? "xi" : "phi_minus_rad", "xi_S", "snr_vac", "snr_sq", "ratio", "valid"}, {}};
  std::size_t invalid = 0;
  for (double value : linspace(cfg.snr.min, cfg.snr.max, cfg.snr.points)) {
    DetectionConfig d = c.detection;
    (xi_sweep ? d.xi : d.phi_minus) = value;
    const double xs = d.xi * squeezing_spectrum(d, flux);
    try {
      const double sq = snr_squeezed(c.budget, c.response, d, flux);
      t.rows.push_back({value, xs, vac, sq, vac > 0.0 ? sq / vac : NAN, 1.0});
    } catch (const UnphysicalDenominator&) {
      ++invalid;
      t.rows.push_back({value, xs, vac, NAN, NAN, 0.0});
    }
  }
  const std::string name = data_name("snr", o);
  out.write(name, [&](std::ostream& os) { write_table(os, t, o.format); });
  maybe_plot_script(out, o, name, t.columns[0], "ratio", false);
  summary["photon_number"] = photon_number(c.budget);
  summary["invalid_rows"] = invalid;
}

void cmd_clock(const Options& o, OutputDir& out, ordered_json& summary) {
  const ExperimentConfig cfg = resolve_config(o, true);
  if (o.compare || cfg.compare) {
    const ComparisonRecords recs = run_comparison(cfg.clock, cfg.n_cycles);
    write_record(out, o, "record_coherent", recs.coherent, cfg, "coherent");
    write_record(out, o, "record_squeezed", recs.squeezed, cfg, "squeezed");
    summary["skipped_cycles"] = {recs.coherent.metadata.skipped_cycles,
                                 recs.squeezed.metadata.skipped_cycles};
  } else {
    const FrequencyRecord rec = run_clock(cfg.clock, cfg.n_cycles);
    write_record(out, o, "record", rec, cfg, to_string(cfg.clock.detection_mode));
    summary["skipped_cycles"] = rec.metadata.skipped_cycles;
    summary["lock_lost"] = rec.metadata.lock_lost;
  }
}

void cmd_allan(const Options& o, OutputDir& out, ordered_json& summary) {
  const ExperimentConfig cfg = resolve_config(o, o.record_path.empty());
  FrequencyRecord rec;
  if (!o.record_path.empty()) {
    rec = load_record(o.record_path);
    summary["record"] = o.record_path;
  } else {
    rec = run_clock(cfg.clock, cfg.n_cycles);
  }
  const std::vector<double> taus = cfg.allan.taus.empty() ? octave_taus(rec) : cfg.allan.taus;
  const AllanResult res = allan_deviation(rec, taus);
  if (res.curve.taus.empty())
    throw ModelError("record of " + std::to_string(rec.samples.size()) +
                     " samples supports none of the requested averaging times");
  const double snr = cycle_snr(cfg.clock);

  Table t{{"tau_s", "sigma", "n_pairs", "predicted_sigma"}, {}};
  ordered_json ratios = ordered_json::array();
  for (std::size_t i = 0; i < res.curve.taus.size(); ++i) {
    const double pred = predicted_sigma(cfg.clock.line, snr, res.curve.taus[i]);
    t.rows.push_back({res.curve.taus[i], res.curve.sigmas[i],
                      static_cast<double>(res.curve.n_pairs[i]), pred});
    ratios.push_back(res.curve.sigmas[i] / pred);
  }
  const std::string name = data_name("allan", o);
  out.write(name, [&](std::ostream& os) { write_table(os, t, o.format); });
  maybe_plot_script(out, o, name, "tau_s", "sigma", true);

  ordered_json s;
  s["tau0_s"] = rec.tau0;
  s["samples"] = rec.samples.size();
  s["cycle_snr"] = snr;
  s["sim_over_predicted"] = ratios;
  ordered_json omitted = ordered_json::array();
  for (const auto& om : res.omitted) omitted.push_back({{"tau_s", om.tau}, {"reason", om.reason}});
  s["omitted"] = omitted;
  const double lo = cfg.allan.fit_min > 0.0 ? cfg.allan.fit_min : 0.0;
  const double hi = cfg.allan.fit_max > 0.0 ? cfg.allan.fit_max : INFINITY;
  try {
    const SlopeFit fit = fit_slope(res.curve, lo, hi);
    s["fit"] = {{"exponent", fit.exponent}, {"level_at_1s", fit.level}, {"points", fit.points}};
  } catch (const FitError& e) {
    s["fit"] = {{"error", e.what()}};
  }
  out.write("allan_summary.json", [&](std::ostream& os) { os << s.dump(2) << '\n'; });
  summary["fit"] = s["fit"];
}

void emit_error(std::ostream& err, const char* kind, int code, const std::string& msg) {
  ordered_json j;
  j["error"] = kind;
  j["exit_code"] = code;
  j["message"] = msg;
  err << j.dump() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Squeezed-detection atomic clock simulator", "sqclock"};
  app.require_subcommand(1);
  Options o;

  using Handler = void (*)(const Options&, OutputDir&, ordered_json&);
  struct Command {
    const char* name;
    const char* help;
    Handler handler;
  };
  const Command commands[] = {
      {"fringe", "Ramsey transition probability vs detuning", cmd_fringe},
      {"spectrum", "squeezing spectrum S over Omega0 and phi_minus grids", cmd_spectrum},
      {"snr", "coherent vs squeezed S/N across a phi_minus or xi sweep", cmd_snr},
      {"clock", "closed-loop clock simulation (frequency record)", cmd_clock},
      {"allan", "Allan deviation, slope fit and stability prediction", cmd_allan},
  };
  std::vector<std::pair<CLI::App*, Handler>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", o.config_path, "configuration file (YAML)");
    sub->add_option("--seed", o.seed, "override the configured seed");
    sub->add_option("--out", o.out_dir, "output directory")->capture_default_str();
    sub->add_option("--format", o.format, "data file format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->add_flag("--plot-script", o.plot_script, "also write a matplotlib script");
    if (std::string(c.name) == "clock")
      sub->add_flag("--compare", o.compare, "run coherent and squeezed arms together");
    if (std::string(c.name) == "allan")
      sub->add_option("--record", o.record_path, "analyse an existing record CSV");
    subs.emplace_back(sub, c.handler);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", kExitConfig, e.what());
    return kExitConfig;
  }

  for (const auto& [sub, handler] : subs) {
    if (!sub->parsed()) continue;
    const auto start = std::chrono::steady_clock::now();
    try {
      const ExperimentConfig snapshot = resolve_config(o, false);
      OutputDir dir(o.out_dir);
      ordered_json summary;
      handler(o, dir, summary);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      ordered_json m;
      m["command"] = sub->get_name();
      m["config_path"] = o.config_path;
      m["config"] = to_json(snapshot);
      m["seed"] = snapshot.clock.seed;
      m["output_dir"] = o.out_dir;
      m["files"] = dir.files();
      m["summary"] = summary;
      m["warnings"] = regime_warnings(snapshot);
      m["wall_clock_s"] = wall;
      dir.write("manifest.json", [&](std::ostream& os) { os << m.dump(2) << '\n'; });
      out << "wrote " << dir.files().size() << " files to " << o.out_dir << '\n';
      return kExitOk;
    } catch (const ConfigError& e) {
      emit_error(err, "config", kExitConfig, e.what());
      return kExitConfig;
    } catch (const ModelError& e) {
      emit_error(err, "model", kExitModel, e.what());
      return kExitModel;
    } catch (const std::exception& e) {
      emit_error(err, "runtime", kExitModel, e.what());
      return kExitModel;
    }
  }
  return kExitConfig;
}

}  // namespace sqclock
