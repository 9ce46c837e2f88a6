#pragma once

#include <iosfwd>

namespace gchroma {

/// Entry point of the graphon_chroma tool. Results go to `out` (or --out),
/// errors to `err` as {"error": "..."}; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gchroma
