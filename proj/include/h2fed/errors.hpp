#pragma once

#include <stdexcept>
#include <string>

namespace h2fed {

// Bad inputs, shapes or parameter values. Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent dataset files.
struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A run that started correctly but cannot continue (NaN blowup etc.).
// Maps to CLI exit code 3.
struct RuntimeAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace h2fed
