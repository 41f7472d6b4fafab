#pragma once

#include <vector>

#include "stsp/lp.hpp"
#include "stsp/milp.hpp"

namespace testsup {

struct TableauResult {
  stsp::LpStatus status = stsp::LpStatus::kNumericalFailure;
  double objective = 0.0;
  std::vector<double> x;
};

// Deliberately naive reference solver: converts to standard form (shifted,
// split and reflected columns, explicit bound rows), runs two-phase full-
// tableau simplex with artificial variables and Bland's rule throughout.
// Shares no code path with LpSolver.
TableauResult tableau_solve(const stsp::MilpModel& model);

}  // namespace testsup
