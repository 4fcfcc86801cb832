#pragma once

#include <stdexcept>
#include <string>

namespace selfnorm {

/// A parameter outside the domain an operation is defined on.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An experiment or CLI configuration that cannot be run.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A required artifact (oracle table, aggregate) is missing.
struct DependencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A deterministic identity that must hold did not.
struct ConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace selfnorm
