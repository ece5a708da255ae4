#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>

namespace campopt {

// Commodity kinds tracked on every arc of the time-expanded network.
// Crew and vehicle units are discrete (integer flow); everything else is
// continuous mass in kg.
enum class Commodity : int {
    Crew = 0,
    VehicleUnit,
    Propellant,
    HabitatEquipment,
    IsruPlant,
    ReturnSample,
    MaintenanceMass,
    CrewConsumables,
};

inline constexpr int kCommodityCount = 8;

using CommodityVector = std::array<double, kCommodityCount>;

constexpr bool is_discrete(Commodity c) {
    return c == Commodity::Crew || c == Commodity::VehicleUnit;
}

inline constexpr int index_of(Commodity c) { return static_cast<int>(c); }

const char* commodity_name(Commodity c);
std::optional<Commodity> commodity_from_name(const std::string& name);

inline CommodityVector zero_commodities() { return CommodityVector{}; }

} // namespace campopt
