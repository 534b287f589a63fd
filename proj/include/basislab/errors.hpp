#pragma once

#include <stdexcept>
#include <string>

namespace basislab {

// Raised when inputs violate a documented precondition or file contract.
// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an estimator cannot produce a result (rank deficiency,
// solver non-convergence, empty treatment/control groups). Exit code 3.
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace basislab
