#pragma once

#include <stdexcept>
#include <string>

namespace gobs {

// API misuse: mismatched group tags, wrong dimensions, bad arguments.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Input matrix is too far from the group to be accepted or repaired.
struct MembershipError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Logarithm (or another chart) evaluated at or too close to its cut locus.
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scenario file failed schema or semantic validation.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Simulation produced non-finite values or tripped the cost guard.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gobs
