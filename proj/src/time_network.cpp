#include "campopt/time_network.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace campopt {

std::vector<int> build_time_grid(const ScenarioSpec& scenario) {
    for (const ArcSpec& a : scenario.arcs)
        for (const Window& w : a.windows)
            if (w.endDay > scenario.cycleLengthDays)
                throw std::invalid_argument("build_time_grid: window on arc " + a.from + " -> " + a.to +
                                            " extends past the cycle length");

    std::set<int> days;
    for (const DemandEntry& d : scenario.demands) days.insert(d.day);
    for (const ArcSpec& a : scenario.arcs) {
        for (const Window& w : a.windows) {
            days.insert(w.startDay);
            days.insert(w.endDay);
        }
    }

    // Arrival closure: any grid event inside a window spawns its arrival day,
    // which may itself enable further departures.
    bool grew = true;
    while (grew) {
        grew = false;
        for (const ArcSpec& a : scenario.arcs) {
            if (a.kind != ArcKind::Transport) continue;
            for (const Window& w : a.windows) {
                std::vector<int> arrivals;
                for (auto it = days.lower_bound(w.startDay); it != days.end() && *it <= w.endDay; ++it) {
                    const int arrive = *it + a.tofDays;
                    if (arrive <= scenario.cycleLengthDays && !days.count(arrive)) arrivals.push_back(arrive);
                }
                for (int d : arrivals) {
                    days.insert(d);
                    grew = true;
                }
            }
        }
    }

    return std::vector<int>(days.begin(), days.end());
}

int TimeExpandedNetwork::transport_arc_count() const {
    int n = 0;
    for (const ExpandedArc& a : arcs)
        if (!a.holdover) ++n;
    return n;
}

int TimeExpandedNetwork::holdover_arc_count() const {
    return static_cast<int>(arcs.size()) - transport_arc_count();
}

TimeExpandedNetwork expand_network(const ScenarioSpec& scenario) {
    TimeExpandedNetwork net;
    net.timeSteps = build_time_grid(scenario);

    const std::set<int> grid(net.timeSteps.begin(), net.timeSteps.end());

    for (size_t ai = 0; ai < scenario.arcs.size(); ++ai) {
        const ArcSpec& a = scenario.arcs[ai];
        if (a.kind != ArcKind::Transport) continue; // dwelling comes from node flags
        const int from = scenario.node_index(a.from);
        const int to = scenario.node_index(a.to);
        for (const Window& w : a.windows) {
            for (int day : net.timeSteps) {
                if (day < w.startDay || day > w.endDay) continue;
                const int arrive = day + a.tofDays;
                if (arrive > scenario.cycleLengthDays || !grid.count(arrive)) continue;
                for (int v = 0; v < scenario.vehicle.fleetSize; ++v) {
                    net.arcs.push_back(ExpandedArc{v, from, to, day, arrive, static_cast<int>(ai), false});
                }
            }
        }
    }

    for (size_t ni = 0; ni < scenario.nodes.size(); ++ni) {
        if (!scenario.nodes[ni].allowDwell) continue;
        for (size_t t = 0; t + 1 < net.timeSteps.size(); ++t) {
            net.arcs.push_back(ExpandedArc{-1, static_cast<int>(ni), static_cast<int>(ni), net.timeSteps[t],
                                           net.timeSteps[t + 1], -1, true});
        }
    }

    for (const DemandEntry& d : scenario.demands) {
        const int node = scenario.node_index(d.node);
        auto& vec = net.nodeTimeDemand[{node, d.day}];
        vec[index_of(d.commodity)] += d.amount;
    }

    return net;
}

} // namespace campopt
