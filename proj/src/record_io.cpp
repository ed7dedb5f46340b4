#include "sqclock/record_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "sqclock/errors.hpp"

namespace sqclock {

namespace {

double parse_double(std::string_view text, std::size_t line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  // from_chars rejects a leading '+', which we never write anyway.
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw ConfigError("record line " + std::to_string(line) + ": bad number '" +
                      std::string(text) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_record_csv(std::ostream& os, const FrequencyRecord& rec) {
  os << "index,time_s,y_fractional\n";
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    os << i << ',' << format_double(static_cast<double>(i) * rec.tau0) << ','
       << format_double(rec.samples[i]) << '\n';
  }
}

FrequencyRecord read_record_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("index,time_s,y_fractional", 0) != 0)
    throw ConfigError("record: missing header 'index,time_s,y_fractional'");
  FrequencyRecord rec;
  std::vector<double> times;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split(line);
    if (cols.size() != 3)
      throw ConfigError("record line " + std::to_string(lineno) + ": expected 3 columns");
    times.push_back(parse_double(cols[1], lineno));
    rec.samples.push_back(parse_double(cols[2], lineno));
  }
  if (times.size() >= 2) rec.tau0 = times[1] - times[0];
  if (!(rec.tau0 > 0.0)) throw ConfigError("record: time_s column is not increasing");
  return rec;
}

FrequencyRecord load_record(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot open record '" + csv_path.string() + "'");
  FrequencyRecord rec = read_record_csv(in);
  std::filesystem::path sidecar = csv_path;
  sidecar.replace_extension(".json");
  std::ifstream side(sidecar);
  if (side) {
    nlohmann::json j;
    try {
      side >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("record sidecar '" + sidecar.string() + "': " + e.what());
    }
    if (j.contains("tau0_s")) rec.tau0 = j.at("tau0_s").get<double>();
    if (j.contains("seed")) rec.metadata.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("n_cycles")) rec.metadata.n_cycles = j.at("n_cycles").get<std::uint64_t>();
    if (j.contains("skipped_cycles"))
      rec.metadata.skipped_cycles = j.at("skipped_cycles").get<std::uint64_t>();
    if (j.contains("lock_lost")) rec.metadata.lock_lost = j.at("lock_lost").get<std::uint64_t>();
    if (j.contains("config_hash")) {
      const std::string h = j.at("config_hash").get<std::string>();
      std::from_chars(h.data(), h.data() + h.size(), rec.metadata.config_hash, 16);
    }
  }
  return rec;
}

void write_curve_csv(std::ostream& os, const StabilityCurve& curve) {
  os << "tau_s,sigma,n_pairs\n";
  for (std::size_t i = 0; i < curve.taus.size(); ++i)
    os << format_double(curve.taus[i]) << ',' << format_double(curve.sigmas[i]) << ','
       << curve.n_pairs[i] << '\n';
}

}  // namespace sqclock
