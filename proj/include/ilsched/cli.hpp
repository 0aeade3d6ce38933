#pragma once

#include <iosfwd>

namespace ilsched {

// Entry point of the ilsched command. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ilsched
