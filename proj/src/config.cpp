#include "sqclock/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "sqclock/errors.hpp"

namespace sqclock {

namespace {

// A YAML mapping that remembers which keys were consumed so leftovers can be
// reported as typos.
class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (node_ && !node_.IsNull() && !node_.IsMap())
      fail(node_, path_.empty() ? "top level must be a mapping" : "expected a mapping");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!node_ || node_.IsNull()) return;
    const YAML::Node v = node_[key];
    if (!v) return;
    if (!v.IsScalar()) fail(v, field(key), "expected a scalar value");
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      fail(v, field(key), "cannot convert '" + v.Scalar() + "'");
    }
  }

  void get(const char* key, std::vector<double>& out) {
    seen_.insert(key);
    if (!node_ || node_.IsNull()) return;
    const YAML::Node v = node_[key];
    if (!v) return;
    if (!v.IsSequence()) fail(v, field(key), "expected a list of numbers");
    out.clear();
    for (const auto& item : v) {
      try {
        out.push_back(item.as<double>());
      } catch (const YAML::Exception&) {
        fail(item, field(key), "cannot convert list entry to a number");
      }
    }
  }

  // Enumerations: read as string, convert with `from`, rethrowing with position.
  template <class T, class F>
  void get_enum(const char* key, T& out, F from) {
    std::string text;
    get(key, text);
    if (text.empty()) return;
    try {
      out = from(text);
    } catch (const ConfigError& e) {
      fail(node_[key], field(key), e.what());
    }
  }

  Section child(const char* key) {
    seen_.insert(key);
    YAML::Node n;
    if (node_ && node_.IsMap()) n = node_[key];
    return Section(n, field(key), source_);
  }

  bool has(const char* key) const { return node_ && node_.IsMap() && node_[key]; }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string k = kv.first.as<std::string>();
      if (!seen_.count(k)) fail(kv.first, field(k.c_str()), "unknown key");
    }
  }

  // Invariant check with field context.
  template <class Fn>
  void check(Fn&& fn) const {
    try {
      fn();
    } catch (const ModelError& e) {
      fail(node_, path_, e.what());
    } catch (const ConfigError& e) {
      fail(node_, path_, e.what());
    }
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
    fail(at, path_, what);
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& fld,
                         const std::string& what) const {
    std::ostringstream os;
    os << source_;
    if (at && at.Mark().line >= 0) os << ':' << at.Mark().line + 1;
    os << ": " << (fld.empty() ? "<top>" : fld) << ": " << what;
    throw ConfigError(os.str());
  }

 private:
  std::string field(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  YAML::Node node_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> seen_;
};

TransitSpread::Kind spread_kind_from(const std::string& s) {
  if (s == "delta") return TransitSpread::Kind::delta;
  if (s == "truncated_normal") return TransitSpread::Kind::truncated_normal;
  throw ConfigError("unknown spread kind '" + s + "' (expected delta | truncated_normal)");
}

SnrSweep::Variable sweep_variable_from(const std::string& s) {
  if (s == "phi_minus") return SnrSweep::Variable::phi_minus;
  if (s == "xi") return SnrSweep::Variable::xi;
  throw ConfigError("unknown sweep variable '" + s + "' (expected phi_minus | xi)");
}

void read_ramsey(Section s, RamseyGeometry& g) {
  s.get("pulse_area", g.pulse_area);
  s.get("free_time", g.free_time);
  s.get("pulse_duration", g.pulse_duration);
  s.get_enum("mode", g.mode, geometry_mode_from);
  Section sp = s.child("spread");
  sp.get_enum("kind", g.spread.kind, spread_kind_from);
  sp.get("rel_width", g.spread.rel_width);
  sp.finish();
  s.finish();
  s.check([&] { validate(g); });
}

void read_detection(Section s, DetectionConfig& d) {
  s.get("eta_s", d.eta_s);
  s.get("eta_0", d.eta_0);
  s.get("p_lo", d.p_lo);
  s.get("p_x", d.p_x);
  s.get("phi_minus", d.phi_minus);
  s.get("omega_0", d.omega_0);
  s.get("xi", d.xi);
  s.get("f_width", d.f_width);
  s.get("c_scale", d.c_scale);
  s.get("bloch_angle", d.bloch_angle);
  s.get("interaction_time", d.interaction_time);
  s.get("c_form", d.c_form);
  s.get("f_form", d.f_form);
  s.get_enum("wiring", d.wiring, projection_wiring_from);
  s.finish();
  s.check([&] {
    validate(d);
    FormRegistry::builtin().c(d.c_form);
    FormRegistry::builtin().f(d.f_form);
  });
}

void read_grid_points(Section& s, const char* key, int& points, int minimum) {
  s.get(key, points);
  if (points < minimum)
    s.fail(YAML::Node(), std::string(key) + " must be >= " + std::to_string(minimum));
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    std::ostringstream os;
    os << source << ':' << e.mark.line + 1 << ": " << e.msg;
    throw ConfigError(os.str());
  }

  ExperimentConfig cfg;
  ClockConfig& c = cfg.clock;
  Section top(root, "", source);
  top.get("seed", c.seed);

  {
    Section s = top.child("atom");
    s.get("gamma", c.atom.gamma);
    s.get("detuning", c.atom.detuning);
    s.finish();
    s.check([&] { validate(c.atom); });
  }
  {
    Section s = top.child("reservoir");
    s.get("n_photon", c.reservoir.n_photon);
    s.get("m_mag", c.reservoir.m_mag);
    s.get("m_phase", c.reservoir.m_phase);
    s.finish();
    s.check([&] { validate(c.reservoir); });
  }
  read_ramsey(top.child("ramsey"), c.ramsey);
  read_detection(top.child("detection"), c.detection);
  {
    Section s = top.child("response");
    s.get("delta_vac", c.response.delta_vac);
    s.get("delta_sq", c.response.delta_sq);
    s.finish();
    s.check([&] { validate(c.response); });
  }
  {
    Section s = top.child("budget");
    s.get("alpha", c.budget.alpha);
    s.get("t_meas", c.budget.t_meas);
    s.get("beta", c.budget.beta);
    s.get("a_amp", c.budget.a_amp);
    s.get("bandwidth", c.budget.bandwidth);
    s.finish();
    s.check([&] { validate(c.budget); });
  }
  {
    Section s = top.child("line");
    s.get("nu", c.line.nu);
    s.get("delta_nu", c.line.delta_nu);
    s.finish();
  }
  {
    Section s = top.child("clock");
    c.geometry = c.ramsey.mode;
    s.get_enum("geometry", c.geometry, geometry_mode_from);
    if (s.has("geometry") && !top.child("ramsey").has("mode")) c.ramsey.mode = c.geometry;
    s.get("atoms_per_cycle", c.atoms_per_cycle);
    s.get("atom_flux", c.atom_flux);
    s.get("cycle_time", c.cycle_time);
    s.get_enum("detection_mode", c.detection_mode, detection_mode_from);
    s.get_enum("sampler", c.sampler, count_sampler_from);
    s.get("detection_noise", c.detection_noise);
    s.get("servo_gain", c.servo_gain);
    s.get("modulation_depth", c.modulation_depth);
    s.get("n_cycles", cfg.n_cycles);
    s.get("compare", cfg.compare);
    Section lo = s.child("lo");
    lo.get("white_fm", c.lo.white_fm);
    lo.get("flicker_fm", c.lo.flicker_fm);
    lo.get("initial_offset", c.lo.initial_offset);
    lo.finish();
    s.finish();
    s.check([&] { validate(c); });
    if (cfg.n_cycles < 2) s.fail(YAML::Node(), "n_cycles must be >= 2");
  }
  {
    Section s = top.child("fringe");
    s.get("detuning_min", cfg.fringe.detuning_min);
    s.get("detuning_max", cfg.fringe.detuning_max);
    read_grid_points(s, "points", cfg.fringe.points, 1);
    s.finish();
    if (!(cfg.fringe.detuning_max >= cfg.fringe.detuning_min))
      s.fail(YAML::Node(), "detuning_max must be >= detuning_min");
  }
  {
    Section s = top.child("spectrum");
    s.get("omega_min", cfg.spectrum.omega_min);
    s.get("omega_max", cfg.spectrum.omega_max);
    read_grid_points(s, "omega_points", cfg.spectrum.omega_points, 1);
    s.get("phi_min", cfg.spectrum.phi_min);
    s.get("phi_max", cfg.spectrum.phi_max);
    read_grid_points(s, "phi_points", cfg.spectrum.phi_points, 1);
    s.finish();
  }
  {
    Section s = top.child("snr");
    s.get_enum("sweep", cfg.snr.variable, sweep_variable_from);
    s.get("min", cfg.snr.min);
    s.get("max", cfg.snr.max);
    read_grid_points(s, "points", cfg.snr.points, 1);
    s.finish();
    if (cfg.snr.variable == SnrSweep::Variable::xi && cfg.snr.min < 0.0)
      s.fail(YAML::Node(), "xi sweep must start at >= 0");
  }
  {
    Section s = top.child("allan");
    s.get("taus", cfg.allan.taus);
    s.get("fit_min", cfg.allan.fit_min);
    s.get("fit_max", cfg.allan.fit_max);
    s.finish();
  }
  top.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  using nlohmann::ordered_json;
  const ClockConfig& c = cfg.clock;
  const DetectionConfig& d = c.detection;
  ordered_json j;
  j["seed"] = c.seed;
  j["atom"] = {{"gamma", c.atom.gamma}, {"detuning", c.atom.detuning}};
  j["reservoir"] = {{"n_photon", c.reservoir.n_photon},
                    {"m_mag", c.reservoir.m_mag},
                    {"m_phase", c.reservoir.m_phase}};
  j["ramsey"] = {
      {"pulse_area", c.ramsey.pulse_area},
      {"free_time", c.ramsey.free_time},
      {"pulse_duration", c.ramsey.pulse_duration},
      {"mode", std::string(to_string(c.ramsey.mode))},
      {"spread",
       {{"kind", c.ramsey.spread.kind == TransitSpread::Kind::delta ? "delta"
                                                                    : "truncated_normal"},
        {"rel_width", c.ramsey.spread.rel_width}}}};
  j["detection"] = {{"eta_s", d.eta_s},
                    {"eta_0", d.eta_0},
                    {"p_lo", d.p_lo},
                    {"p_x", d.p_x},
                    {"phi_minus", d.phi_minus},
                    {"omega_0", d.omega_0},
                    {"xi", d.xi},
                    {"f_width", d.f_width},
                    {"c_scale", d.c_scale},
                    {"bloch_angle", d.bloch_angle},
                    {"interaction_time", d.interaction_time},
                    {"c_form", d.c_form},
                    {"f_form", d.f_form},
                    {"wiring", to_string(d.wiring)}};
  j["response"] = {{"delta_vac", c.response.delta_vac}, {"delta_sq", c.response.delta_sq}};
  j["budget"] = {{"alpha", c.budget.alpha},
                 {"t_meas", c.budget.t_meas},
                 {"beta", c.budget.beta},
                 {"a_amp", c.budget.a_amp},
                 {"bandwidth", c.budget.bandwidth}};
  j["line"] = {{"nu", c.line.nu}, {"delta_nu", c.line.delta_nu}};
  j["clock"] = {{"geometry", std::string(to_string(c.geometry))},
                {"atoms_per_cycle", c.atoms_per_cycle},
                {"atom_flux", c.atom_flux},
                {"cycle_time", c.cycle_time},
                {"detection_mode", to_string(c.detection_mode)},
                {"sampler", to_string(c.sampler)},
                {"detection_noise", c.detection_noise},
                {"servo_gain", c.servo_gain},
                {"modulation_depth", c.modulation_depth},
                {"n_cycles", cfg.n_cycles},
                {"compare", cfg.compare},
                {"lo",
                 {{"white_fm", c.lo.white_fm},
                  {"flicker_fm", c.lo.flicker_fm},
                  {"initial_offset", c.lo.initial_offset}}}};
  j["fringe"] = {{"detuning_min", cfg.fringe.detuning_min},
                 {"detuning_max", cfg.fringe.detuning_max},
                 {"points", cfg.fringe.points}};
  j["spectrum"] = {{"omega_min", cfg.spectrum.omega_min},
                   {"omega_max", cfg.spectrum.omega_max},
                   {"omega_points", cfg.spectrum.omega_points},
                   {"phi_min", cfg.spectrum.phi_min},
                   {"phi_max", cfg.spectrum.phi_max},
                   {"phi_points", cfg.spectrum.phi_points}};
  j["snr"] = {{"sweep", cfg.snr.variable == SnrSweep::Variable::xi ? "xi" : "phi_minus"},
              {"min", cfg.snr.min},
              {"max", cfg.snr.max},
              {"points", cfg.snr.points}};
  j["allan"] = {{"taus", cfg.allan.taus},
                {"fit_min", cfg.allan.fit_min},
                {"fit_max", cfg.allan.fit_max}};
  return j;
}

}  // namespace sqclock
