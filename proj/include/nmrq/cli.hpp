// Command-line front end (compile / sweep / tomo / spectrum / preset).
#pragma once

#include <iosfwd>

namespace nmrq {

/// Exit codes: 0 success, 1 usage or input error, 2 simulation or
/// verification failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nmrq
