#pragma once

#include <iosfwd>

namespace wbary {

/// Entry point of the `wbary` command line tool. Returns 0 on success, 1
/// when a solver fails or does not converge, 2 on invalid input.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wbary
