#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "campopt/sizing.hpp"

namespace campopt {

// Normalization constants for the design-feature basis.
struct VfaFeatureSpec {
    double payloadScaleKg = 5000.0;
    double propellantScaleKg = 150000.0;
};

// Basis: [payloadCap / s1, propellantCap / s2, 1]. The trailing bias feature
// absorbs the design-independent share of the downstream campaign cost.
std::vector<double> vfa_features(const VehicleDesign& design, const VfaFeatureSpec& spec);

// Linear value function fitted by recursive least squares. Binv tracks the
// running inverse of the normal matrix; a large prior makes the first updates
// behave like unregularized least squares.
struct VfaParameters {
    std::vector<double> theta;
    std::vector<std::vector<double>> Binv;
    VfaFeatureSpec featureSpec;
    long updateCount = 0;

    std::size_t dim() const { return theta.size(); }
};

VfaParameters make_vfa_parameters(const VfaFeatureSpec& spec = {}, double priorScale = 1e6);
VfaParameters make_vfa_parameters_dim(std::size_t dim, double priorScale = 1e6);

double predict_features(const VfaParameters& params, const std::vector<double>& features);
double predict(const VfaParameters& params, const VehicleDesign& design);

// One recursive least-squares step toward the observed cost. Throws
// std::domain_error on non-finite inputs.
VfaParameters rls_update_features(const VfaParameters& params, const std::vector<double>& features,
                                  double observedCost);
VfaParameters rls_update(const VfaParameters& params, const VehicleDesign& design, double observedCost);

// Exact normal-equations solution over raw feature rows; the oracle the
// recursion converges to. Throws std::runtime_error naming the dependent
// feature when the normal matrix is singular.
std::vector<double> batch_fit(const std::vector<std::pair<std::vector<double>, double>>& history);
std::vector<double> batch_fit_designs(const std::vector<std::pair<VehicleDesign, double>>& history,
                                      const VfaFeatureSpec& spec);

} // namespace campopt
