#include "campopt/scenario.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace campopt {

bool NodeSpec::has_infinite(Commodity c) const {
    return std::find(infiniteSupply.begin(), infiniteSupply.end(), c) != infiniteSupply.end();
}

int ScenarioSpec::node_index(const std::string& id) const {
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return static_cast<int>(i);
    return -1;
}

const NodeSpec* ScenarioSpec::find_node(const std::string& id) const {
    const int i = node_index(id);
    return i < 0 ? nullptr : &nodes[static_cast<size_t>(i)];
}

namespace {

void add(std::vector<Violation>& out, std::string field, std::string message) {
    out.push_back(Violation{std::move(field), std::move(message)});
}

std::string arc_tag(const ArcSpec& a, size_t i) {
    std::ostringstream os;
    os << "arcs[" << i << "] (" << a.from << " -> " << a.to << ")";
    return os.str();
}

} // namespace

std::vector<Violation> validate_scenario(const ScenarioSpec& s) {
    std::vector<Violation> v;

    if (s.schemaVersion != 1) add(v, "schemaVersion", "unsupported schema version");
    if (s.missionCount < 1) add(v, "missionCount", "campaign needs at least one mission");
    if (s.cycleLengthDays <= 0) add(v, "cycleLengthDays", "cycle length must be positive");
    if (s.crewCount < 0) add(v, "crewCount", "crew count must be nonnegative");
    if (s.habitatMassKg < 0) add(v, "habitatMassKg", "habitat mass must be nonnegative");
    if (s.crew.massKg < 0) add(v, "crew.massKg", "crew mass must be nonnegative");
    if (s.crew.consumptionKgPerDay < 0) add(v, "crew.consumptionKgPerDay", "consumption must be nonnegative");

    if (s.vehicle.fleetSize < 0) add(v, "vehicle.fleetSize", "fleet size must be nonnegative");
    if (s.vehicle.ispSeconds <= 0) add(v, "vehicle.ispSeconds", "specific impulse must be positive");
    if (s.vehicle.maintenanceFractionPerFlight < 0)
        add(v, "vehicle.maintenanceFractionPerFlight", "maintenance fraction must be nonnegative");
    if (s.vehicle.designGrid.payloadSteps < 1 || s.vehicle.designGrid.propellantSteps < 1)
        add(v, "vehicle.designGrid", "grid step counts must be >= 1");
    if (s.vehicle.designGrid.payloadMinKg < 0 || s.vehicle.designGrid.propellantMinKg < 0 ||
        s.vehicle.designGrid.payloadMaxKg < s.vehicle.designGrid.payloadMinKg ||
        s.vehicle.designGrid.propellantMaxKg < s.vehicle.designGrid.propellantMinKg)
        add(v, "vehicle.designGrid", "capacity ranges must be nonnegative and ordered");

    if (s.isru.productionRate.mean < 0 || s.isru.productionRate.sd < 0)
        add(v, "isru.productionRate", "distribution parameters must be nonnegative");
    if (s.isru.decayRatePct.mean < 0 || s.isru.decayRatePct.sd < 0)
        add(v, "isru.decayRatePct", "distribution parameters must be nonnegative");
    if (s.isru.deployCapKg < 0) add(v, "isru.deployCapKg", "deployment cap must be nonnegative");
    if (s.isru.maintenanceFractionPerYear < 0)
        add(v, "isru.maintenanceFractionPerYear", "maintenance fraction must be nonnegative");
    if (s.isru.electrolysisLossFactor < 0 || s.isru.electrolysisLossFactor > 1)
        add(v, "isru.electrolysisLossFactor", "loss factor must lie in [0, 1]");

    std::set<std::string> ids;
    for (size_t i = 0; i < s.nodes.size(); ++i) {
        if (s.nodes[i].id.empty()) add(v, "nodes[" + std::to_string(i) + "].id", "node id must be nonempty");
        if (!ids.insert(s.nodes[i].id).second)
            add(v, "nodes[" + std::to_string(i) + "].id", "duplicate node id " + s.nodes[i].id);
    }
    if (s.nodes.empty()) add(v, "nodes", "scenario needs at least one node");
    if (s.node_index(s.earthNode) < 0) add(v, "earthNode", "unknown node id " + s.earthNode);
    if (!s.isru.node.empty() && s.node_index(s.isru.node) < 0)
        add(v, "isru.node", "unknown node id " + s.isru.node);

    for (size_t i = 0; i < s.arcs.size(); ++i) {
        const ArcSpec& a = s.arcs[i];
        const std::string tag = arc_tag(a, i);
        if (s.node_index(a.from) < 0) add(v, tag + ".from", "unknown node id " + a.from);
        if (s.node_index(a.to) < 0) add(v, tag + ".to", "unknown node id " + a.to);
        if (a.deltaVMps < 0) add(v, tag + ".deltaV", "delta-V must be nonnegative");
        if (a.tofDays < 0) add(v, tag + ".tof", "time of flight must be nonnegative");
        if (a.kind == ArcKind::Holdover) {
            if (a.from != a.to) add(v, tag + ".kind", "holdover arc must have from == to");
            if (a.deltaVMps != 0.0) add(v, tag + ".kind", "holdover arc must have zero delta-V");
        } else if (a.from == a.to) {
            add(v, tag + ".kind", "transport arc must connect distinct nodes");
        }
        for (size_t w = 0; w < a.windows.size(); ++w) {
            const Window& win = a.windows[w];
            const std::string wtag = tag + ".windows[" + std::to_string(w) + "]";
            if (win.startDay > win.endDay) add(v, wtag, "window start after end");
            if (win.startDay < 0 || win.endDay > s.cycleLengthDays)
                add(v, wtag, "window extends past the mission cycle");
            for (size_t w2 = 0; w2 < w; ++w2) {
                if (win.startDay <= a.windows[w2].endDay && a.windows[w2].startDay <= win.endDay) {
                    add(v, wtag, "window overlaps an earlier window on the same arc");
                    break;
                }
            }
        }
    }

    // Structural satisfiability: a demand away from the cost-boundary node must
    // have some declared or unbounded source of the commodity.
    for (size_t i = 0; i < s.demands.size(); ++i) {
        const DemandEntry& d = s.demands[i];
        const std::string tag = "demands[" + std::to_string(i) + "]";
        if (s.node_index(d.node) < 0) add(v, tag + ".node", "unknown node id " + d.node);
        if (d.day < 0 || d.day > s.cycleLengthDays) add(v, tag + ".day", "day outside the mission cycle");
        if (d.amount < 0 && d.node != s.earthNode) {
            bool sourced = false;
            for (const DemandEntry& other : s.demands)
                if (other.commodity == d.commodity && other.amount > 0) sourced = true;
            for (const NodeSpec& n : s.nodes)
                if (n.has_infinite(d.commodity)) sourced = true;
            if (!sourced)
                add(v, tag, std::string("demand for ") + commodity_name(d.commodity) + " has no supply anywhere");
        }
    }

    return v;
}

} // namespace campopt
