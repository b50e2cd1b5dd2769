#pragma once

#include <ostream>

namespace hdlda::cli {

/// Parses argv and runs one subcommand. Returns 0 on success, 2 on a bad
/// flag and 1 on a runtime failure. Results go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hdlda::cli
