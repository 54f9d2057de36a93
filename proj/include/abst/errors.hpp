// Error taxonomy shared by the library and the CLI.
//
// ValidationError: malformed input, violated preconditions, parameter-range
//   errors. The CLI maps it to exit code 2.
// CapExceeded: a decision-procedure search space exceeds the configured cap.
//   The CLI maps it to exit code 3.
#pragma once

#include <stdexcept>
#include <string>

namespace abst {

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct CapExceeded : std::runtime_error {
  explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace abst
