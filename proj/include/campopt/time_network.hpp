#pragma once

#include <map>
#include <utility>
#include <vector>

#include "campopt/scenario.hpp"

namespace campopt {

// Ordered event days for one mission cycle: the closure of window boundary
// days, demand days, and arrival days (departure + TOF) under arc traversal,
// clipped to [0, cycleLengthDays].
std::vector<int> build_time_grid(const ScenarioSpec& scenario);

struct ExpandedArc {
    int vehicle = -1;   // vehicle slot, -1 on holdover arcs (shared by the fleet)
    int fromNode = 0;
    int toNode = 0;
    int departDay = 0;
    int arriveDay = 0;
    int specIndex = -1; // index into ScenarioSpec::arcs, -1 on holdover arcs
    bool holdover = false;
};

struct TimeExpandedNetwork {
    std::vector<int> timeSteps;
    std::vector<ExpandedArc> arcs;
    // Net supply (+) / demand (-) per commodity at each (node, day) event.
    std::map<std::pair<int, int>, CommodityVector> nodeTimeDemand;

    int transport_arc_count() const;
    int holdover_arc_count() const;
};

// One expanded arc per (vehicle slot, transport arc, admissible departure day);
// a departure day is admissible when it is a grid event inside a declared
// window and the arrival stays within the cycle. Holdover arcs connect
// consecutive grid events at every node that permits dwelling.
TimeExpandedNetwork expand_network(const ScenarioSpec& scenario);

} // namespace campopt
