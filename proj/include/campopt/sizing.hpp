#pragma once

#include <array>
#include <vector>

namespace campopt {

// Spacecraft structure mass as an affine function of the two capacity knobs:
//   dry = c0 + c1 * payloadCapacityKg + c2 * propellantCapacityKg
// The default coefficients are a least-squares fit to five reference designs
// (see sizing.cpp); c2 folds together the propellant tank fraction (0.079)
// and the engine/structure share that scales with tank size.
struct SizingModel {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;

    double dry_mass(double payloadCapacityKg, double propellantCapacityKg) const {
        return c0 + c1 * payloadCapacityKg + c2 * propellantCapacityKg;
    }
};

SizingModel default_sizing_model();

// Reference (payload, propellant, dry) rows the default model is fitted to.
const std::vector<std::array<double, 3>>& sizing_reference_designs();

// Exact normal-equations least-squares fit of an affine sizing model to
// (payload, propellant, dry) rows. Used for calibration and as a test oracle.
SizingModel fit_sizing_model(const std::vector<std::array<double, 3>>& rows);

struct VehicleDesign {
    double payloadCapacityKg = 0.0;
    double propellantCapacityKg = 0.0;
    double dryMassKg = 0.0;
};

inline VehicleDesign make_design(const SizingModel& sizing, double payloadKg, double propellantKg) {
    return VehicleDesign{payloadKg, propellantKg, sizing.dry_mass(payloadKg, propellantKg)};
}

struct DesignGridSpec {
    double payloadMinKg = 0.0;
    double payloadMaxKg = 0.0;
    int payloadSteps = 1;
    double propellantMinKg = 0.0;
    double propellantMaxKg = 0.0;
    int propellantSteps = 1;
};

// Cartesian grid of candidate designs, payload-major, evenly spaced and
// inclusive of both range endpoints.
std::vector<VehicleDesign> make_design_grid(const DesignGridSpec& grid, const SizingModel& sizing);

} // namespace campopt
