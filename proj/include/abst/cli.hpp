// CLI entry point, callable from tests. Exit codes: 0 = verdict true /
// success, 1 = verdict false, 2 = usage or validation error, 3 = search cap
// exceeded. Output is byte-deterministic for fixed inputs and flags
// (including --jobs).
#pragma once

#include <iosfwd>

namespace abst {

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace abst
