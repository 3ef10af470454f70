#pragma once

#include <stdexcept>
#include <string>

namespace graphdist {

// Malformed inputs, contract violations, file format problems. CLI exit 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failures: divergence, non-convergence, non-finite values. CLI exit 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace graphdist
