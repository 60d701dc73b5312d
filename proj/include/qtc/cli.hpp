#pragma once

#include <iosfwd>

namespace qtc {

/// Command-line driver with subcommands synth, complete, eval and diagnose.
///
/// --config FILE reads key = value lines; each key acts as --key=value unless
/// that option is also given on the command line.
///
/// Exit codes: 0 success (for `complete`, converged), 2 `complete` stopped at
/// max-iter, 1 any error including bad arguments or configuration.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qtc
