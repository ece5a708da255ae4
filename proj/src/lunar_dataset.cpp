#include "campopt/lunar_dataset.hpp"

#include <stdexcept>

namespace campopt {
namespace {

void add_round_trip_demands(ScenarioSpec& s) {
    double crew = s.crewCount;
    double habitat = s.habitatMassKg;
    s.demands = {
        {"earth", 352, Commodity::Crew, crew},
        {"moon", 357, Commodity::Crew, -crew},
        {"moon", 357, Commodity::HabitatEquipment, -habitat},
        {"moon", 360, Commodity::Crew, crew},
        {"moon", 360, Commodity::ReturnSample, 2500.0},
        {"earth", 365, Commodity::Crew, -crew},
        {"earth", 365, Commodity::ReturnSample, -2500.0},
    };
}

ScenarioSpec base_scenario() {
    ScenarioSpec s;
    s.schemaVersion = 1;
    s.cycleLengthDays = 365;
    s.crewCount = 6;
    s.habitatMassKg = 5000.0;
    s.earthNode = "earth";

    s.crew.massKg = 100.0;
    s.crew.consumptionKgPerDay = 8.655;

    s.vehicle.fleetSize = 4;
    s.vehicle.ispSeconds = 420.0;
    s.vehicle.maintenanceFractionPerFlight = 0.01;
    s.vehicle.sizing = default_sizing_model();
    s.vehicle.designGrid.payloadMinKg = 3000.0;
    s.vehicle.designGrid.payloadMaxKg = 5500.0;
    s.vehicle.designGrid.payloadSteps = 6;
    s.vehicle.designGrid.propellantMinKg = 90000.0;
    s.vehicle.designGrid.propellantMaxKg = 150000.0;
    s.vehicle.designGrid.propellantSteps = 5;

    s.isru.node = "moon";
    s.isru.productionRate = {5.0, 1.5};
    s.isru.decayRatePct = {10.0, 10.0};
    s.isru.deployCapKg = 5000.0;
    s.isru.maintenanceFractionPerYear = 0.05;
    s.isru.electrolysisLossFactor = 1.0;

    s.nodes = {
        {"earth", true,
         {Commodity::Propellant, Commodity::HabitatEquipment, Commodity::IsruPlant,
          Commodity::MaintenanceMass, Commodity::CrewConsumables}},
        {"leo", false, {}},
        {"llo", true, {}},
        {"moon", true, {}},
    };

    // One yearly round trip: launch on day 352, lunar arrival 357, surface
    // departure 360, Earth return 365. The launch arc carries zero delta-v;
    // its departures define the launch-mass objective boundary.
    s.arcs = {
        {"earth", "leo", 0.0, 0, ArcKind::Transport, {{352, 352}}},
        {"leo", "llo", 4040.0, 4, ArcKind::Transport, {{352, 352}}},
        {"llo", "moon", 1870.0, 1, ArcKind::Transport, {{356, 356}}},
        {"moon", "llo", 1870.0, 1, ArcKind::Transport, {{360, 360}}},
        {"llo", "earth", 900.0, 4, ArcKind::Transport, {{361, 361}}},
    };

    add_round_trip_demands(s);
    return s;
}

} // namespace

ScenarioSpec lunar_scenario() {
    ScenarioSpec s = base_scenario();
    s.name = "lunar";
    s.description =
        "Crewed lunar campaign, one round trip per yearly cycle with lunar-surface "
        "ISRU. Delta-v and flight times are representative literature values for "
        "LOX/LH2 transfers, not mission-specific data.";
    s.missionCount = 5;
    return s;
}

const std::vector<LunarVariant>& lunar_variants() {
    static const std::vector<LunarVariant> variants = {
        {'A', 2, 6, 5000.0, {5.0, 1.5}, {10.0, 10.0}},
        {'B', 3, 6, 5000.0, {5.0, 1.5}, {10.0, 10.0}},
        {'C', 4, 6, 5000.0, {5.0, 1.5}, {10.0, 10.0}},
        {'D', 5, 6, 5000.0, {5.0, 1.5}, {10.0, 10.0}},
        {'E', 4, 6, 5000.0, {10.0, 3.0}, {10.0, 10.0}},
        {'F', 5, 6, 5000.0, {10.0, 3.0}, {10.0, 10.0}},
        {'G', 4, 6, 5000.0, {5.0, 1.5}, {5.0, 5.0}},
        {'H', 5, 6, 5000.0, {5.0, 1.5}, {5.0, 5.0}},
        {'I', 5, 12, 10000.0, {5.0, 1.5}, {10.0, 10.0}},
        {'J', 5, 12, 10000.0, {10.0, 3.0}, {10.0, 10.0}},
    };
    return variants;
}

ScenarioSpec lunar_scenario_variant(char letter) {
    for (const LunarVariant& v : lunar_variants()) {
        if (v.letter != letter) continue;
        ScenarioSpec s = base_scenario();
        s.name = std::string("lunar-") + static_cast<char>(letter + ('a' - 'A'));
        s.description = "Campaign variant " + std::string(1, letter) +
                        " of the lunar dataset: " + std::to_string(v.missions) +
                        " missions, crew of " + std::to_string(v.crewCount) + ".";
        s.missionCount = v.missions;
        s.crewCount = v.crewCount;
        s.habitatMassKg = v.habitatMassKg;
        s.isru.productionRate = v.productionRate;
        s.isru.decayRatePct = v.decayRatePct;
        add_round_trip_demands(s);
        return s;
    }
    throw std::invalid_argument("unknown lunar variant: " + std::string(1, letter));
}

ScenarioSpec lunar_scenario_desk() {
    ScenarioSpec s = base_scenario();
    s.name = "lunar-desk";
    s.description =
        "Smallest lunar campaign: three nodes, two vehicles, a 2x2 design "
        "grid, and a two-person crew. Sized so a full training run finishes "
        "in minutes; use it for algorithm work, not for mission studies.";
    s.missionCount = 3;
    s.crewCount = 2;
    s.habitatMassKg = 1000.0;
    s.vehicle.fleetSize = 2;
    s.vehicle.designGrid.payloadMinKg = 1500.0;
    s.vehicle.designGrid.payloadMaxKg = 3000.0;
    s.vehicle.designGrid.payloadSteps = 2;
    s.vehicle.designGrid.propellantMinKg = 40000.0;
    s.vehicle.designGrid.propellantMaxKg = 80000.0;
    s.vehicle.designGrid.propellantSteps = 2;
    s.isru.deployCapKg = 2000.0;

    // Direct injection from the launch boundary: the translunar burn departs
    // the Earth node itself, so its wet mass is the launch mass.
    s.nodes = {
        {"earth", true,
         {Commodity::Propellant, Commodity::HabitatEquipment, Commodity::IsruPlant,
          Commodity::MaintenanceMass, Commodity::CrewConsumables}},
        {"llo", true, {}},
        {"moon", true, {}},
    };
    s.arcs = {
        {"earth", "llo", 4040.0, 4, ArcKind::Transport, {{352, 352}}},
        {"llo", "moon", 1870.0, 1, ArcKind::Transport, {{356, 356}}},
        {"moon", "llo", 1870.0, 1, ArcKind::Transport, {{360, 360}}},
        {"llo", "earth", 900.0, 4, ArcKind::Transport, {{361, 361}}},
    };

    add_round_trip_demands(s);
    for (DemandEntry& d : s.demands) {
        if (d.commodity == Commodity::ReturnSample) {
            d.amount = d.amount > 0.0 ? 500.0 : -500.0;
        }
    }
    return s;
}

ScenarioSpec lunar_scenario_compact() {
    ScenarioSpec s = base_scenario();
    s.name = "lunar-compact";
    s.description =
        "Reduced lunar campaign for fast runs: three missions, three vehicles, "
        "a 3x3 design grid, and lighter surface demands.";
    s.missionCount = 3;
    s.crewCount = 4;
    s.habitatMassKg = 2000.0;
    s.vehicle.fleetSize = 3;
    s.vehicle.designGrid.payloadMinKg = 2000.0;
    s.vehicle.designGrid.payloadMaxKg = 4000.0;
    s.vehicle.designGrid.payloadSteps = 3;
    s.vehicle.designGrid.propellantMinKg = 60000.0;
    s.vehicle.designGrid.propellantMaxKg = 120000.0;
    s.vehicle.designGrid.propellantSteps = 3;
    s.isru.deployCapKg = 3000.0;
    add_round_trip_demands(s);
    for (DemandEntry& d : s.demands) {
        if (d.commodity == Commodity::ReturnSample) {
            d.amount = d.amount > 0.0 ? 1000.0 : -1000.0;
        }
    }
    return s;
}

} // namespace campopt
