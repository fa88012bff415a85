#pragma once

#include <iosfwd>

namespace pbct::cli {

/// Exit codes: 0 success, 1 invalid arguments or data, 2 I/O failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pbct::cli
