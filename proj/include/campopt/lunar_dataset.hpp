#pragma once

#include "campopt/scenario.hpp"

#include <vector>

namespace campopt {

// Crewed lunar campaign dataset: a four-node network (Earth, LEO, LLO,
// Moon) flying one round trip per yearly cycle, with an ISRU plant on the
// lunar surface. Delta-v and flight-time figures are representative
// literature values for chemical LOX/LH2 transfers, not tied to a specific
// source table; they are stored in the scenario files so users can adjust
// them.
ScenarioSpec lunar_scenario();

struct LunarVariant {
    char letter;
    int missions;
    int crewCount;
    double habitatMassKg;
    Distribution productionRate;
    Distribution decayRatePct;
};

// The ten shipped campaign variants (A through J): mission count, crew
// size, habitat mass, and the two ISRU uncertainty distributions vary.
const std::vector<LunarVariant>& lunar_variants();

ScenarioSpec lunar_scenario_variant(char letter);

// Reduced instance for fast end-to-end runs and tests: three missions, a
// three-vehicle fleet, a 3x3 design grid, and lighter demands. Same network
// shape and schedule as the full dataset.
ScenarioSpec lunar_scenario_compact();

// Smallest instance: three nodes (no parking orbit between Earth and the
// translunar burn), two vehicles, a 2x2 grid, and a two-person crew. Sized
// so a whole training run finishes in minutes.
ScenarioSpec lunar_scenario_desk();

} // namespace campopt
