#pragma once

#include <stdexcept>
#include <string>

namespace losscap {

// Bad input data: malformed files, out-of-range parameters, broken referential
// integrity. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unsupported option combinations or missing configuration (e.g. a bound
// family asked for summaries that were never computed). Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: non-finite importance weight, inversion non-convergence.
// Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace losscap
