#pragma once

#include <stdexcept>
#include <string>

namespace tcb {

// Invalid invocation or configuration; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Failure while processing a well-formed request (bad data files, solver
// breakdowns, incompatible artifacts); the CLI maps this to exit code 1.
struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tcb
