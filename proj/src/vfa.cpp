#include "campopt/vfa.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace campopt {

namespace {

bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

} // namespace

std::vector<double> vfa_features(const VehicleDesign& design, const VfaFeatureSpec& spec) {
    if (spec.payloadScaleKg <= 0.0 || spec.propellantScaleKg <= 0.0) {
        throw std::domain_error("vfa: feature normalization constants must be positive");
    }
    return {design.payloadCapacityKg / spec.payloadScaleKg,
            design.propellantCapacityKg / spec.propellantScaleKg, 1.0};
}

VfaParameters make_vfa_parameters_dim(std::size_t dim, double priorScale) {
    if (dim == 0) throw std::domain_error("vfa: zero-dimensional basis");
    if (!(priorScale > 0.0)) throw std::domain_error("vfa: prior scale must be positive");
    VfaParameters params;
    params.theta.assign(dim, 0.0);
    params.Binv.assign(dim, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < dim; ++i) params.Binv[i][i] = priorScale;
    return params;
}

VfaParameters make_vfa_parameters(const VfaFeatureSpec& spec, double priorScale) {
    VfaParameters params = make_vfa_parameters_dim(3, priorScale);
    params.featureSpec = spec;
    return params;
}

double predict_features(const VfaParameters& params, const std::vector<double>& features) {
    if (features.size() != params.dim()) {
        throw std::invalid_argument("vfa: feature dimension mismatch");
    }
    double v = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) v += params.theta[i] * features[i];
    return v;
}

double predict(const VfaParameters& params, const VehicleDesign& design) {
    return predict_features(params, vfa_features(design, params.featureSpec));
}

VfaParameters rls_update_features(const VfaParameters& params, const std::vector<double>& features,
                                  double observedCost) {
    if (!std::isfinite(observedCost) || !all_finite(features)) {
        throw std::domain_error("vfa: non-finite update input");
    }
    if (features.size() != params.dim()) {
        throw std::invalid_argument("vfa: feature dimension mismatch");
    }
    const std::size_t n = params.dim();
    VfaParameters next = params;

    // Ba = Binv * a, gamma = 1 + a'Ba.
    std::vector<double> Ba(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) Ba[i] += params.Binv[i][j] * features[j];
    }
    double gamma = 1.0;
    for (std::size_t i = 0; i < n; ++i) gamma += features[i] * Ba[i];

    // Binv' = Binv - (Ba)(Ba)'/gamma, symmetrized against drift.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            next.Binv[i][j] = params.Binv[i][j] - Ba[i] * Ba[j] / gamma;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.5 * (next.Binv[i][j] + next.Binv[j][i]);
            next.Binv[i][j] = s;
            next.Binv[j][i] = s;
        }
    }

    // theta' = theta - Binv' a (theta'a - cost).
    double innovation = predict_features(params, features) - observedCost;
    for (std::size_t i = 0; i < n; ++i) {
        double Bnext_a = 0.0;
        for (std::size_t j = 0; j < n; ++j) Bnext_a += next.Binv[i][j] * features[j];
        next.theta[i] = params.theta[i] - Bnext_a * innovation;
    }
    next.updateCount = params.updateCount + 1;
    return next;
}

VfaParameters rls_update(const VfaParameters& params, const VehicleDesign& design, double observedCost) {
    return rls_update_features(params, vfa_features(design, params.featureSpec), observedCost);
}

std::vector<double> batch_fit(const std::vector<std::pair<std::vector<double>, double>>& history) {
    if (history.empty()) throw std::runtime_error("batch fit: empty history");
    const std::size_t n = history.front().first.size();
    for (const auto& [a, y] : history) {
        if (a.size() != n) throw std::invalid_argument("batch fit: ragged feature rows");
        if (!all_finite(a) || !std::isfinite(y)) throw std::domain_error("batch fit: non-finite input");
    }

    // Normal equations (A'A) theta = A'y.
    std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
    std::vector<double> rhs(n, 0.0);
    for (const auto& [a, y] : history) {
        for (std::size_t i = 0; i < n; ++i) {
            rhs[i] += a[i] * y;
            for (std::size_t j = 0; j < n; ++j) M[i][j] += a[i] * a[j];
        }
    }

    // Gaussian elimination with partial pivoting; remember which original
    // feature each pivot column corresponds to so singularity is nameable.
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(M[i][i]));
    const double tol = std::max(1e-12 * scale, 1e-300);

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(M[r][col]) > std::abs(M[pivot][col])) pivot = r;
        }
        if (std::abs(M[pivot][col]) < tol) {
            throw std::runtime_error("batch fit: feature " + std::to_string(col) +
                                     " is linearly dependent on the others");
        }
        std::swap(M[col], M[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = M[r][col] / M[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) M[r][c] -= f * M[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> theta(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double v = rhs[i];
        for (std::size_t j = i + 1; j < n; ++j) v -= M[i][j] * theta[j];
        theta[i] = v / M[i][i];
    }
    return theta;
}

std::vector<double> batch_fit_designs(const std::vector<std::pair<VehicleDesign, double>>& history,
                                      const VfaFeatureSpec& spec) {
    std::vector<std::pair<std::vector<double>, double>> rows;
    rows.reserve(history.size());
    for (const auto& [design, cost] : history) {
        rows.emplace_back(vfa_features(design, spec), cost);
    }
    return batch_fit(rows);
}

} // namespace campopt
