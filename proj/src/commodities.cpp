#include "campopt/commodities.hpp"

namespace campopt {

namespace {
constexpr const char* kNames[kCommodityCount] = {
    "crew",
    "vehicle-unit",
    "propellant",
    "habitat-equipment",
    "isru-plant",
    "return-sample",
    "maintenance-mass",
    "crew-consumables",
};
}

const char* commodity_name(Commodity c) { return kNames[index_of(c)]; }

std::optional<Commodity> commodity_from_name(const std::string& name) {
    for (int i = 0; i < kCommodityCount; ++i) {
        if (name == kNames[i]) return static_cast<Commodity>(i);
    }
    return std::nullopt;
}

} // namespace campopt
