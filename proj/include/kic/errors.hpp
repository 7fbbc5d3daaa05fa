#pragma once

#include <stdexcept>
#include <string>

namespace kic {

// Error taxonomy shared by the whole library.  The CLI maps these onto
// distinct process exit codes, so keep the hierarchy flat and stable.

struct ArgumentError : std::invalid_argument {
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

struct ResourceError : std::runtime_error {
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical validation failed (non-unitarity, bad residuals, ...).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what, double worst = 0.0)
      : std::runtime_error(what), worst_value(worst) {}
  double worst_value;
};

// An internal cross-check that should hold by construction did not.
struct ConsistencyError : std::logic_error {
  explicit ConsistencyError(const std::string& what) : std::logic_error(what) {}
};

// A statistical estimator could not produce a well-defined answer.
struct EstimationError : std::runtime_error {
  explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kic
