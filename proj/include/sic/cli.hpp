#pragma once

// Command-line front end. Subcommands: gen, fit, train, eval, sweep, qsweep,
// hwreport. Returns the process exit code: 0 success, 2 configuration error,
// 3 data error, 4 constraint violation.

namespace sic::cli {

int run(int argc, const char* const* argv);

} // namespace sic::cli
