#pragma once

#include <stdexcept>
#include <string>

namespace icnet {

// Invalid argument values or violated preconditions (negative times, bad shapes).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Configuration errors: unknown options, out-of-range hyperparameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (CSV schema violations, invalid samples).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite losses, diverging optimisation, undefined metrics.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace icnet
