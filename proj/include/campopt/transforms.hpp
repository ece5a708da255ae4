#pragma once

#include <string>
#include <vector>

#include "campopt/scenario.hpp"

namespace campopt {

inline constexpr double kStandardGravity = 9.80665; // m/s^2

struct StochasticParams {
    double productionRatePerYear = 0.0; // kg propellant / year / kg plant
    double decayFractionPerYear = 0.0;  // plant mass fraction lost per year
};

// Linear map from an arc's outflow vector to the inflow vector arriving at its
// head: inflow = (Q + generation) * outflow. Q holds pass-through and
// consumption coefficients; generation holds nonnegative production terms
// (kept separate so tests can distinguish the two effects).
struct ArcTransform {
    double Q[kCommodityCount][kCommodityCount] = {};
    double generation[kCommodityCount][kCommodityCount] = {};

    static ArcTransform identity();
    CommodityVector apply(const CommodityVector& outflow) const;
    double coefficient(Commodity inflow, Commodity outflow) const {
        return Q[index_of(inflow)][index_of(outflow)] + generation[index_of(inflow)][index_of(outflow)];
    }
};

// Homogeneous inequalities coeffs . outflow <= 0 over one arc's outflow vector.
struct ConcurrencyRow {
    CommodityVector coeffs{};
    std::string label;
};

struct ConcurrencyBlock {
    std::vector<ConcurrencyRow> rows;
};

// exp(deltaV / (isp * g0)); >= 1 for nonnegative deltaV.
double mass_ratio(double deltaVMps, double ispSeconds);

// Q and H for a transport arc flown by vehicles of the given design.
// Propellant burns off at (1 - 1/R) of the total departing mass (dry mass
// included via the vehicle-unit column), crew consumables at
// consumption * crew * TOF, and vehicle maintenance mass at 1% of dry mass
// per flight. H caps propellant and payload per vehicle and forces the
// consumed flows to be carried.
ArcTransform transport_transform(const ArcSpec& arc, const VehicleDesign& design, const ScenarioSpec& scenario);
ConcurrencyBlock transport_concurrency(const ArcSpec& arc, const VehicleDesign& design,
                                       const ScenarioSpec& scenario);

// Q for dwelling at a node for the given duration. Identity everywhere except
// the ISRU node, where plant mass decays by (1 - decay)^(years), generates
// propellant at plant * rate * years (start-of-period plant mass), and
// consumes maintenance mass at 5% * plant * years.
ArcTransform holdover_transform(const NodeSpec& node, double durationDays, const StochasticParams& q,
                                const ScenarioSpec& scenario);

// The maintenance-accompaniment requirement for the same holdover: plant may
// dwell only with maintenanceFraction * years of its mass in maintenance
// flow alongside.
ConcurrencyBlock holdover_concurrency(const NodeSpec& node, double durationDays, const ScenarioSpec& scenario);

// kg carried per unit of flow; crew counts convert via crew mass, vehicle
// units via the design dry mass.
CommodityVector mass_per_unit(const VehicleDesign& design, const ScenarioSpec& scenario);

} // namespace campopt
