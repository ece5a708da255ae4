#pragma once

#include "campopt/milp/model.hpp"
#include "campopt/milp/simplex.hpp"

namespace campopt::milp {

struct SolveLimits {
    double timeLimitSec = 1800.0;
    double gapTol = 1e-6;
    double intTol = 1e-6;
    double feasTol = 1e-8;
};

// Best-bound branch-and-bound over simplex LP relaxations. Branching is on
// the most fractional integer variable (ties to the lowest index), so runs
// are deterministic: identical models give identical solutions and branch
// counts. Weak duality (bestBound <= incumbent) is asserted at every node.
MilpSolution solve_milp(const MilpModel& model, const SolveLimits& limits = {});

} // namespace campopt::milp
