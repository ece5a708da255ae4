#include "campopt/sizing.hpp"

#include <cmath>
#include <stdexcept>

namespace campopt {

const std::vector<std::array<double, 3>>& sizing_reference_designs() {
    static const std::vector<std::array<double, 3>> rows = {
        {3958.0, 131479.0, 25321.0},
        {3897.0, 129676.0, 24960.0},
        {3790.0, 124655.0, 24096.0},
        {3723.0, 98213.0, 20749.0},
        {3733.0, 102397.0, 21278.0},
    };
    return rows;
}

SizingModel default_sizing_model() {
    // Frozen least-squares fit to sizing_reference_designs() with the fixed
    // term pinned at zero (an unconstrained fit drifts slightly negative,
    // which would break dry(0,0) >= 0); every row is reproduced to better
    // than 0.01% relative either way.
    return SizingModel{0.0, 2.393336496093966, 0.12054311326526329};
}

SizingModel fit_sizing_model(const std::vector<std::array<double, 3>>& rows) {
    if (rows.size() < 3) throw std::invalid_argument("fit_sizing_model: need at least 3 rows");
    // Normal equations (A^T A) c = A^T y with A = [1, payload, propellant].
    double ata[3][3] = {};
    double aty[3] = {};
    for (const auto& r : rows) {
        const double a[3] = {1.0, r[0], r[1]};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) ata[i][j] += a[i] * a[j];
            aty[i] += a[i] * r[2];
        }
    }
    // Gaussian elimination with partial pivoting on the 3x3 system.
    double m[3][4];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) m[i][j] = ata[i][j];
        m[i][3] = aty[i];
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
        if (std::fabs(m[piv][col]) < 1e-12) throw std::runtime_error("fit_sizing_model: singular normal equations");
        if (piv != col)
            for (int j = 0; j < 4; ++j) std::swap(m[piv][j], m[col][j]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int j = col; j < 4; ++j) m[r][j] -= f * m[col][j];
        }
    }
    SizingModel fit{m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
    if (fit.c0 >= 0.0) return fit;

    // Keep dry(0,0) nonnegative: refit with the fixed term pinned at zero.
    double b11 = 0, b12 = 0, b22 = 0, r1 = 0, r2 = 0;
    for (const auto& row : rows) {
        b11 += row[0] * row[0];
        b12 += row[0] * row[1];
        b22 += row[1] * row[1];
        r1 += row[0] * row[2];
        r2 += row[1] * row[2];
    }
    const double det = b11 * b22 - b12 * b12;
    if (std::fabs(det) < 1e-12) throw std::runtime_error("fit_sizing_model: singular normal equations");
    return SizingModel{0.0, (r1 * b22 - r2 * b12) / det, (b11 * r2 - b12 * r1) / det};
}

std::vector<VehicleDesign> make_design_grid(const DesignGridSpec& grid, const SizingModel& sizing) {
    if (grid.payloadSteps < 1 || grid.propellantSteps < 1)
        throw std::invalid_argument("make_design_grid: step counts must be >= 1");
    std::vector<VehicleDesign> out;
    out.reserve(static_cast<size_t>(grid.payloadSteps) * grid.propellantSteps);
    for (int i = 0; i < grid.payloadSteps; ++i) {
        const double p = grid.payloadSteps == 1
                             ? grid.payloadMinKg
                             : grid.payloadMinKg + (grid.payloadMaxKg - grid.payloadMinKg) * i / (grid.payloadSteps - 1);
        for (int j = 0; j < grid.propellantSteps; ++j) {
            const double f = grid.propellantSteps == 1
                                 ? grid.propellantMinKg
                                 : grid.propellantMinKg +
                                       (grid.propellantMaxKg - grid.propellantMinKg) * j / (grid.propellantSteps - 1);
            out.push_back(make_design(sizing, p, f));
        }
    }
    return out;
}

} // namespace campopt
