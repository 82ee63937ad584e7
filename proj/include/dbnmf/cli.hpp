#pragma once

#include <iosfwd>

namespace dbnmf {

/// Entry point of the command-line tool. Subcommands: factorize, compare,
/// render, metrics. Returns 0 on success, 2 on usage errors, 1 on runtime errors.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace dbnmf
