#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "campopt/milp/model.hpp"
#include "campopt/scenario.hpp"
#include "campopt/time_network.hpp"
#include "campopt/transforms.hpp"
#include "campopt/vfa.hpp"

namespace campopt {

// Everything the per-mission scheduler carries from one mission to the next:
// the plant fleet operating at the resource node, stochastic parameters once
// observed, the vehicle design picked at mission one, and per-node commodity
// inventories (banked propellant, parked vehicles, leftovers).
struct CampaignState {
    int missionIndex = 0;                 // missions already flown
    std::vector<double> deployedIsruKg;   // delivered deployment per past mission
    double plantMassKg = 0.0;             // decay-adjusted plant mass operating now
    StochasticParams observedQ{};         // zero until revealed after mission 1
    VehicleDesign design{};               // zero until mission 1 selects one
    std::map<std::string, CommodityVector> inventory;
};

// Resolves a model variable back to its place on the expanded network.
struct FlowVarRef {
    int arc = -1; // index into MissionProblem::net.arcs
    Commodity commodity = Commodity::Crew;
};

// One mission's transportation MILP plus the bookkeeping needed to decode a
// solution independently of how the model was written.
struct MissionProblem {
    milp::MilpModel model;
    TimeExpandedNetwork net;
    ScenarioSpec scenario;
    CampaignState state;
    StochasticParams q{};
    double actionAiKg = 0.0;
    double plantMaintenanceKg = 0.0; // delivered alongside the deployment
    int plantArrivalDay = 0;

    std::map<std::string, FlowVarRef> decodingMap;
    // Column per (arc, commodity); -1 where the commodity cannot flow.
    std::vector<std::array<int, kCommodityCount>> arcColumn;
    // Column per carryover draw, keyed by (node id, commodity index).
    std::map<std::pair<std::string, int>, int> drawColumn;

    // First-mission design selection; empty when the design is fixed.
    std::vector<VehicleDesign> designGrid;
    std::vector<int> designColumn;   // selection binaries, aligned with designGrid
    std::vector<double> designValue; // VFA estimate per candidate
    // Per transport arc in grid mode: payload-capacity, propellant-capacity
    // and dry-mass relay columns; {-1,-1,-1} otherwise.
    std::vector<std::array<int, 3>> capacityColumn;
    VehicleDesign fixedDesign{};

    bool design_is_fixed() const { return designGrid.empty(); }
};

struct FlowRecord {
    int vehicle = -1;
    std::string from;
    std::string to;
    int departDay = 0;
    int arriveDay = 0;
    bool holdover = false;
    Commodity commodity = Commodity::Crew;
    double amount = 0.0;
};

struct MissionOutcome {
    bool feasible = false;
    milp::SolveStatus status = milp::SolveStatus::Infeasible;
    double costJ = 0.0;          // launched mass, recomputed from the flows
    double objectiveValue = 0.0; // solver objective (includes any VFA term)
    double optimalityGap = 0.0;
    VehicleDesign chosenDesign{};
    std::vector<FlowRecord> flows;
    // Leftover stock per non-Earth dwell node: the total slack of the node's
    // balance rows, i.e. what arrived or was drawn there and never moved
    // again. This is what the next mission may bank on.
    std::map<std::string, CommodityVector> endState;
    // How much of each carryover credit the mission actually consumed.
    std::map<std::string, CommodityVector> inventoryDraw;
    double maxResidual = 0.0;
};

// Builds the single-mission scheduling MILP: minimize mass launched from the
// Earth node subject to node/time mass balances, per-vehicle capacity and
// burn requirements, the deployment action's delivery demand, and carryover
// credits from the campaign state. Infeasibility is a solver outcome, not an
// assembly error.
MissionProblem assemble_mission(const CampaignState& state, double actionAiKg,
                                const ScenarioSpec& scenario, const VehicleDesign& design,
                                const StochasticParams& q);

// First-mission variant: the design is chosen inside the model via one
// selection binary per grid candidate, and the objective gains the value
// estimate of each candidate so the solve minimizes J1 + V(design).
MissionProblem assemble_first_mission(const CampaignState& state, double actionAiKg,
                                      const ScenarioSpec& scenario,
                                      const std::vector<VehicleDesign>& designGrid,
                                      const VfaParameters& vfa);

// Maps a solution back to flows, recomputes every balance and concurrency
// constraint from the flows alone (independently of the assembled rows), and
// extracts end-of-cycle inventories. Throws std::runtime_error when a
// claimed-feasible solution violates the recheck beyond 1e-6.
MissionOutcome decode(const MissionProblem& problem, const milp::MilpSolution& sol);

} // namespace campopt
