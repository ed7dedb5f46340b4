#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "sqclock/record.hpp"
#include "sqclock/stability.hpp"

namespace sqclock {

// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

// CSV with header "index,time_s,y_fractional"; time_s = index * tau0.
void write_record_csv(std::ostream& os, const FrequencyRecord& rec);

// Reads the CSV written above. tau0 comes from the time_s column (or is left
// at 1 s for a single-row record); callers holding a sidecar override it.
FrequencyRecord read_record_csv(std::istream& is);

// Loads <path> and, if present, the JSON sidecar next to it (same stem,
// .json extension) for tau0 and metadata.
FrequencyRecord load_record(const std::filesystem::path& csv_path);

// CSV with header "tau_s,sigma,n_pairs".
void write_curve_csv(std::ostream& os, const StabilityCurve& curve);

}  // namespace sqclock
