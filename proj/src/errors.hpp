#pragma once

#include <stdexcept>
#include <string>

namespace gsd {

// Violation of a monitoring contract (e.g. testing after rejection, delaying
// the primary analysis). Maps to exit code 3 at the CLI.
struct ContractViolation : std::runtime_error {
  explicit ContractViolation(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration or schema. Maps to exit code 2 at the CLI.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gsd
