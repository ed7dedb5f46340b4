#pragma once

#include <iosfwd>

namespace sqclock {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitModel = 3,
};

// Entry point of the `sqclock` command line tool:
//
//   sqclock <fringe|spectrum|snr|clock|allan> --config <path> [--seed <u64>]
//           [--out <dir>] [--format csv|json] [--plot-script]
//
// `clock` also accepts --compare; `allan` accepts --record <csv> in place of
// (or alongside) --config. Errors are printed to `err` as one JSON object.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sqclock
