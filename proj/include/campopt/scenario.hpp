#pragma once

#include <map>
#include <string>
#include <vector>

#include "campopt/commodities.hpp"
#include "campopt/sizing.hpp"

namespace campopt {

// Inclusive departure-day interval within one mission cycle.
struct Window {
    int startDay = 0;
    int endDay = 0;
};

struct NodeSpec {
    std::string id;
    bool allowDwell = true;
    std::vector<Commodity> infiniteSupply;

    bool has_infinite(Commodity c) const;
};

enum class ArcKind { Transport, Holdover };

struct ArcSpec {
    std::string from;
    std::string to;
    double deltaVMps = 0.0;
    int tofDays = 0;
    ArcKind kind = ArcKind::Transport;
    std::vector<Window> windows;
};

// Positive amounts are supplies, negative amounts are demands.
struct DemandEntry {
    std::string node;
    int day = 0;
    Commodity commodity = Commodity::Crew;
    double amount = 0.0;
};

// Normal distribution truncated at zero (resampled below zero).
struct Distribution {
    double mean = 0.0;
    double sd = 0.0;
};

struct IsruSpec {
    std::string node;                         // node where plants operate
    Distribution productionRate;              // kg propellant / year / kg plant
    Distribution decayRatePct;                // % of plant mass lost per year
    double deployCapKg = 0.0;                 // per-mission deployment ceiling
    double maintenanceFractionPerYear = 0.05; // plant mass fraction consumed per year
    double electrolysisLossFactor = 1.0;      // usable propellant per kg water produced
};

struct CrewSpec {
    double massKg = 100.0;
    double consumptionKgPerDay = 8.655;
};

struct VehicleSpec {
    int fleetSize = 0;
    double ispSeconds = 0.0;
    double maintenanceFractionPerFlight = 0.01;
    SizingModel sizing;
    DesignGridSpec designGrid;
};

struct ScenarioSpec {
    int schemaVersion = 1;
    std::string name;
    std::string description;
    int missionCount = 1; // campaign horizon in missions
    int cycleLengthDays = 365;
    int crewCount = 0;
    double habitatMassKg = 0.0;
    std::string earthNode; // cost boundary: every arc departing this node is costed
    CrewSpec crew;
    VehicleSpec vehicle;
    IsruSpec isru;
    std::vector<NodeSpec> nodes;
    std::vector<ArcSpec> arcs;
    std::vector<DemandEntry> demands;

    int node_index(const std::string& id) const; // -1 when unknown
    const NodeSpec* find_node(const std::string& id) const;
};

struct Violation {
    std::string field;
    std::string message;
};

// Checks type invariants and referential integrity. An empty result means the
// scenario is usable; messages identify the offending field path.
std::vector<Violation> validate_scenario(const ScenarioSpec& scenario);

} // namespace campopt
