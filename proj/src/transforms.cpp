#include "campopt/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace campopt {

ArcTransform ArcTransform::identity() {
    ArcTransform t;
    for (int i = 0; i < kCommodityCount; ++i) t.Q[i][i] = 1.0;
    return t;
}

CommodityVector ArcTransform::apply(const CommodityVector& outflow) const {
    CommodityVector in{};
    for (int i = 0; i < kCommodityCount; ++i) {
        double v = 0.0;
        for (int j = 0; j < kCommodityCount; ++j) v += (Q[i][j] + generation[i][j]) * outflow[j];
        in[i] = v;
    }
    return in;
}

double mass_ratio(double deltaVMps, double ispSeconds) {
    if (ispSeconds <= 0.0) throw std::domain_error("mass_ratio: isp must be positive");
    if (deltaVMps < 0.0) throw std::domain_error("mass_ratio: deltaV must be nonnegative");
    return std::exp(deltaVMps / (ispSeconds * kStandardGravity));
}

CommodityVector mass_per_unit(const VehicleDesign& design, const ScenarioSpec& scenario) {
    CommodityVector m{};
    for (int i = 0; i < kCommodityCount; ++i) m[i] = 1.0;
    m[index_of(Commodity::Crew)] = scenario.crew.massKg;
    m[index_of(Commodity::VehicleUnit)] = design.dryMassKg;
    return m;
}

ArcTransform transport_transform(const ArcSpec& arc, const VehicleDesign& design, const ScenarioSpec& scenario) {
    const double R = mass_ratio(arc.deltaVMps, scenario.vehicle.ispSeconds);
    const double burnFrac = 1.0 - 1.0 / R;
    const CommodityVector unitMass = mass_per_unit(design, scenario);

    ArcTransform t = ArcTransform::identity();
    const int prop = index_of(Commodity::Propellant);
    const int cons = index_of(Commodity::CrewConsumables);
    const int maint = index_of(Commodity::MaintenanceMass);
    const int crew = index_of(Commodity::Crew);
    const int veh = index_of(Commodity::VehicleUnit);

    // Burned propellant = burnFrac * (total departing mass). The residual
    // reaches the head; every commodity column contributes its mass.
    for (int j = 0; j < kCommodityCount; ++j) t.Q[prop][j] -= burnFrac * unitMass[j];

    // Crew eat consumption * TOF each while in flight.
    t.Q[cons][crew] -= scenario.crew.consumptionKgPerDay * arc.tofDays;

    // Each flight wears out 1% of dry mass in spares.
    t.Q[maint][veh] -= scenario.vehicle.maintenanceFractionPerFlight * design.dryMassKg;

    return t;
}

ConcurrencyBlock transport_concurrency(const ArcSpec& arc, const VehicleDesign& design,
                                       const ScenarioSpec& scenario) {
    const double R = mass_ratio(arc.deltaVMps, scenario.vehicle.ispSeconds);
    const double burnFrac = 1.0 - 1.0 / R;
    const CommodityVector unitMass = mass_per_unit(design, scenario);

    const int prop = index_of(Commodity::Propellant);
    const int cons = index_of(Commodity::CrewConsumables);
    const int maint = index_of(Commodity::MaintenanceMass);
    const int crew = index_of(Commodity::Crew);
    const int veh = index_of(Commodity::VehicleUnit);

    ConcurrencyBlock h;

    // (a) propellant <= propellant capacity * vehicles
    {
        ConcurrencyRow r;
        r.coeffs[prop] = 1.0;
        r.coeffs[veh] = -design.propellantCapacityKg;
        r.label = "propellant-capacity";
        h.rows.push_back(r);
    }
    // (b) non-propellant payload mass <= payload capacity * vehicles
    {
        ConcurrencyRow r;
        for (int j = 0; j < kCommodityCount; ++j)
            if (j != prop && j != veh) r.coeffs[j] = unitMass[j];
        r.coeffs[veh] = -design.payloadCapacityKg;
        r.label = "payload-capacity";
        h.rows.push_back(r);
    }
    // (c) carried propellant covers the burn
    {
        ConcurrencyRow r;
        for (int j = 0; j < kCommodityCount; ++j) r.coeffs[j] = burnFrac * unitMass[j];
        r.coeffs[prop] -= 1.0;
        r.label = "burn-requirement";
        h.rows.push_back(r);
    }
    // (d) carried consumables cover the crew's consumption
    {
        ConcurrencyRow r;
        r.coeffs[crew] = scenario.crew.consumptionKgPerDay * arc.tofDays;
        r.coeffs[cons] = -1.0;
        r.label = "consumables-requirement";
        h.rows.push_back(r);
    }
    // (e) carried maintenance mass covers flight wear
    {
        ConcurrencyRow r;
        r.coeffs[veh] = scenario.vehicle.maintenanceFractionPerFlight * design.dryMassKg;
        r.coeffs[maint] = -1.0;
        r.label = "maintenance-requirement";
        h.rows.push_back(r);
    }
    return h;
}

ArcTransform holdover_transform(const NodeSpec& node, double durationDays, const StochasticParams& q,
                                const ScenarioSpec& scenario) {
    if (q.productionRatePerYear < 0.0 || q.decayFractionPerYear < 0.0)
        throw std::domain_error("holdover_transform: stochastic parameters must be nonnegative");
    if (durationDays < 0.0) throw std::domain_error("holdover_transform: negative duration");

    ArcTransform t = ArcTransform::identity();
    if (node.id != scenario.isru.node) return t;

    const double years = durationDays / 365.0;
    const int plant = index_of(Commodity::IsruPlant);
    const int prop = index_of(Commodity::Propellant);
    const int maint = index_of(Commodity::MaintenanceMass);

    // Decay fractions above 1 are possible in the sampled tail; the plant
    // cannot drop below zero mass.
    t.Q[plant][plant] = std::pow(std::max(0.0, 1.0 - q.decayFractionPerYear), years);
    t.generation[prop][plant] = q.productionRatePerYear * years * scenario.isru.electrolysisLossFactor;
    t.Q[maint][plant] = -scenario.isru.maintenanceFractionPerYear * years;
    return t;
}

ConcurrencyBlock holdover_concurrency(const NodeSpec& node, double durationDays, const ScenarioSpec& scenario) {
    ConcurrencyBlock h;
    if (node.id != scenario.isru.node || durationDays <= 0.0) return h;
    ConcurrencyRow r;
    r.coeffs[index_of(Commodity::IsruPlant)] =
        scenario.isru.maintenanceFractionPerYear * durationDays / 365.0;
    r.coeffs[index_of(Commodity::MaintenanceMass)] = -1.0;
    r.label = "isru-maintenance";
    h.rows.push_back(r);
    return h;
}

} // namespace campopt
