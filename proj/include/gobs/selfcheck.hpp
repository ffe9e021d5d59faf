#pragma once

#include <string>
#include <vector>

#include "gobs/lie_core.hpp"

namespace gobs {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;  // measured residual / deviation
  double bound = 0.0;  // what it must stay below
};

// Plain truncated Taylor series for the matrix exponential. Deliberately
// independent of the closed-form group exponentials so the two can be
// checked against each other.
Matrix series_exp(const Matrix& a, int terms = 30);

// Deterministic invariant battery behind the `check` subcommand: chart
// round trips, group axioms, adjoint and metric identities, gradient
// consistency, observer/error-flow agreement, integrator orders.
std::vector<CheckResult> run_selfchecks();

}  // namespace gobs
