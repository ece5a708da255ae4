#pragma once

#include "campopt/milp/model.hpp"

namespace campopt::milp {

struct LpLimits {
    double feasTol = 1e-8;  // scaled internally by max(1, ||rhs||_inf)
    long maxIterations = 0; // 0 = automatic
};

// Primal bounded-variable simplex, two phases with artificials. Dantzig
// pricing with a Bland fallback after degenerate stalls guarantees
// termination; all tie-breaks are by lowest index, so identical models give
// identical bases. Integrality flags are ignored. Throws std::runtime_error
// with condition diagnostics when the basis goes numerically singular.
MilpSolution solve_lp(const MilpModel& model, const LpLimits& limits = {});

// Same, with per-variable bound overrides (used by branch-and-bound).
MilpSolution solve_lp_with_bounds(const MilpModel& model, const std::vector<double>& lower,
                                  const std::vector<double>& upper, const LpLimits& limits = {});

} // namespace campopt::milp
