#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace biquad::cli {

// args excludes the program name.  The JSON report goes to out, diagnostics to err.
// Returns 0, or 2 / 3 / 4 for invalid input, degenerate geometry, numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace biquad::cli
