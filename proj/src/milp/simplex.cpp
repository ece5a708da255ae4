#include "campopt/milp/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace campopt::milp {

namespace {

enum class VarState { Basic, AtLower, AtUpper, FreeAtZero };

// Raised when the basis matrix cannot be factorized; the caller retries the
// whole solve with more frequent refactorization before giving up.
struct SingularBasisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SparseColumn {
    std::vector<int> rows;
    std::vector<double> coefs;
};

class Simplex {
  public:
    Simplex(const MilpModel& model, const std::vector<double>& lower, const std::vector<double>& upper,
            const LpLimits& limits, bool conservative = false)
        : model_(model), limits_(limits) {
        if (conservative) refactorEvery_ = 5;
        n_ = model.variable_count();
        m_ = model.row_count();
        build(lower, upper);
    }

    MilpSolution run() {
        MilpSolution out;
        if (needPhase1_) {
            phase1_ = true;
            const Outcome o1 = iterate();
            if (o1 == Outcome::IterationLimit) throw std::runtime_error("simplex: iteration limit in phase 1");
            if (phase1_objective() > feasTolScaled_) {
                out.status = SolveStatus::Infeasible;
                out.simplexIters = iters_;
                return out;
            }
            evict_artificials();
        }
        phase1_ = false;
        const Outcome o2 = iterate();
        out.simplexIters = iters_;
        if (o2 == Outcome::IterationLimit) throw std::runtime_error("simplex: iteration limit in phase 2");
        if (o2 == Outcome::Unbounded) {
            out.status = SolveStatus::Unbounded;
            return out;
        }
        refresh_basics();
        verify_feasible();
        out.status = SolveStatus::Optimal;
        out.primal.resize(static_cast<size_t>(n_));
        for (int j = 0; j < n_; ++j)
            out.primal[static_cast<size_t>(j)] = value(j) * colScale_[static_cast<size_t>(j)];
        out.objective = model_.objective_value(out.primal);
        out.bestBound = out.objective;
        out.gap = 0.0;
        return out;
    }

  private:
    enum class Outcome { Optimal, Unbounded, IterationLimit };

    const MilpModel& model_;
    LpLimits limits_;
    int n_ = 0;      // structural variables
    int m_ = 0;      // rows
    int total_ = 0;  // structural + slack + artificial columns
    int slack0_ = 0; // first slack index
    int art0_ = 0;   // first artificial index

    std::vector<SparseColumn> cols_;
    std::vector<double> lower_, upper_, cost_;
    std::vector<double> rhs_;
    std::vector<VarState> state_;
    std::vector<double> nbValue_; // value of each nonbasic variable
    std::vector<int> basic_;      // variable in each basis row
    std::vector<int> rowOf_;      // basis row of each variable, -1 if nonbasic
    std::vector<double> xB_;
    std::vector<double> binv_; // row-major m x m
    std::vector<double> rowScale_, colScale_;
    bool needPhase1_ = false;
    bool phase1_ = false;
    bool blandMode_ = false;
    int stall_ = 0;
    long iters_ = 0;
    long maxIters_ = 0;
    double feasTolScaled_ = 1e-8;
    double costScale_ = 1.0;
    int sinceRefactor_ = 0;
    int refactorEvery_ = 50;

    double value(int j) const { return rowOf_[static_cast<size_t>(j)] >= 0 ? xB_[static_cast<size_t>(rowOf_[static_cast<size_t>(j)])] : nbValue_[static_cast<size_t>(j)]; }

    double phase1_objective() const {
        double s = 0.0;
        for (int j = art0_; j < total_; ++j) s += value(j);
        return s;
    }

    // Geometric-mean equilibration. Scales are snapped to powers of two so
    // applying them is exact in floating point: the scaled problem is an
    // exact reformulation, not an approximation.
    void compute_scaling() {
        rowScale_.assign(static_cast<size_t>(m_), 1.0);
        colScale_.assign(static_cast<size_t>(n_), 1.0);
        const auto& rows = model_.rows();
        std::vector<double> lo, hi;
        for (int pass = 0; pass < 3; ++pass) {
            lo.assign(static_cast<size_t>(m_), kInfinity);
            hi.assign(static_cast<size_t>(m_), 0.0);
            for (int i = 0; i < m_; ++i)
                for (const Term& t : rows[static_cast<size_t>(i)].terms) {
                    const double a = std::fabs(t.coefficient) * colScale_[static_cast<size_t>(t.variable)];
                    if (a == 0.0) continue;
                    lo[static_cast<size_t>(i)] = std::min(lo[static_cast<size_t>(i)], a);
                    hi[static_cast<size_t>(i)] = std::max(hi[static_cast<size_t>(i)], a);
                }
            for (int i = 0; i < m_; ++i)
                if (hi[static_cast<size_t>(i)] > 0.0)
                    rowScale_[static_cast<size_t>(i)] =
                        1.0 / std::sqrt(lo[static_cast<size_t>(i)] * hi[static_cast<size_t>(i)]);
            lo.assign(static_cast<size_t>(n_), kInfinity);
            hi.assign(static_cast<size_t>(n_), 0.0);
            for (int i = 0; i < m_; ++i)
                for (const Term& t : rows[static_cast<size_t>(i)].terms) {
                    const double a = std::fabs(t.coefficient) * rowScale_[static_cast<size_t>(i)];
                    if (a == 0.0) continue;
                    lo[static_cast<size_t>(t.variable)] = std::min(lo[static_cast<size_t>(t.variable)], a);
                    hi[static_cast<size_t>(t.variable)] = std::max(hi[static_cast<size_t>(t.variable)], a);
                }
            for (int j = 0; j < n_; ++j)
                if (hi[static_cast<size_t>(j)] > 0.0)
                    colScale_[static_cast<size_t>(j)] =
                        1.0 / std::sqrt(lo[static_cast<size_t>(j)] * hi[static_cast<size_t>(j)]);
        }
        for (double& s : rowScale_) s = std::exp2(std::round(std::log2(s)));
        for (double& s : colScale_) s = std::exp2(std::round(std::log2(s)));
    }

    void build(const std::vector<double>& lower, const std::vector<double>& upper) {
        total_ = n_ + m_;
        slack0_ = n_;
        cols_.assign(static_cast<size_t>(total_), {});
        lower_.assign(lower.begin(), lower.end());
        upper_.assign(upper.begin(), upper.end());
        cost_.resize(static_cast<size_t>(total_), 0.0);
        rhs_.resize(static_cast<size_t>(m_));

        compute_scaling();
        // Substituting x = C x' and premultiplying rows by R gives the scaled
        // problem: columns pick up R a C, costs c C, bounds l / C, rhs R b.
        // Slack columns keep unit coefficients (their bounds are 0 or
        // infinite, both scale-invariant).
        for (int j = 0; j < n_; ++j) {
            const double c = colScale_[static_cast<size_t>(j)];
            lower_[static_cast<size_t>(j)] /= c;
            upper_[static_cast<size_t>(j)] /= c;
        }

        double maxAbsRhs = 0.0;
        double maxAbsCost = 0.0;
        for (int j = 0; j < n_; ++j) {
            cost_[static_cast<size_t>(j)] =
                model_.objective()[static_cast<size_t>(j)] * colScale_[static_cast<size_t>(j)];
            maxAbsCost = std::max(maxAbsCost, std::fabs(cost_[static_cast<size_t>(j)]));
        }
        costScale_ = 1.0 + maxAbsCost;

        const auto& rows = model_.rows();
        for (int i = 0; i < m_; ++i) {
            const Row& r = rows[static_cast<size_t>(i)];
            rhs_[static_cast<size_t>(i)] = r.rhs * rowScale_[static_cast<size_t>(i)];
            maxAbsRhs = std::max(maxAbsRhs, std::fabs(rhs_[static_cast<size_t>(i)]));
            for (const Term& t : r.terms) {
                cols_[static_cast<size_t>(t.variable)].rows.push_back(i);
                cols_[static_cast<size_t>(t.variable)].coefs.push_back(
                    t.coefficient * rowScale_[static_cast<size_t>(i)] *
                    colScale_[static_cast<size_t>(t.variable)]);
            }
            const int s = slack0_ + i;
            cols_[static_cast<size_t>(s)].rows.push_back(i);
            cols_[static_cast<size_t>(s)].coefs.push_back(1.0);
            switch (r.sense) {
                case Sense::LessEqual:
                    lower_.push_back(0.0);
                    upper_.push_back(kInfinity);
                    break;
                case Sense::Equal:
                    lower_.push_back(0.0);
                    upper_.push_back(0.0);
                    break;
                case Sense::GreaterEqual:
                    lower_.push_back(-kInfinity);
                    upper_.push_back(0.0);
                    break;
            }
        }
        feasTolScaled_ = limits_.feasTol * std::max(1.0, maxAbsRhs);
        maxIters_ = limits_.maxIterations > 0 ? limits_.maxIterations : 50000 + 200L * (m_ + n_);

        // Nonbasic start: structural variables at the finite bound nearest
        // zero, slacks basic.
        state_.assign(static_cast<size_t>(total_), VarState::AtLower);
        nbValue_.assign(static_cast<size_t>(total_), 0.0);
        for (int j = 0; j < n_; ++j) {
            const double l = lower_[static_cast<size_t>(j)], u = upper_[static_cast<size_t>(j)];
            if (std::isinf(l) && std::isinf(u)) {
                state_[static_cast<size_t>(j)] = VarState::FreeAtZero;
                nbValue_[static_cast<size_t>(j)] = 0.0;
            } else if (std::isinf(l) || (!std::isinf(u) && std::fabs(u) < std::fabs(l))) {
                state_[static_cast<size_t>(j)] = VarState::AtUpper;
                nbValue_[static_cast<size_t>(j)] = u;
            } else {
                state_[static_cast<size_t>(j)] = VarState::AtLower;
                nbValue_[static_cast<size_t>(j)] = l;
            }
        }

        basic_.resize(static_cast<size_t>(m_));
        rowOf_.assign(static_cast<size_t>(total_), -1);
        xB_.resize(static_cast<size_t>(m_));
        std::vector<double> slackTarget(static_cast<size_t>(m_));
        for (int i = 0; i < m_; ++i) {
            double ax = 0.0;
            // residual b - A x over nonbasic structurals
            slackTarget[static_cast<size_t>(i)] = rhs_[static_cast<size_t>(i)];
            (void)ax;
        }
        for (int j = 0; j < n_; ++j) {
            const double v = nbValue_[static_cast<size_t>(j)];
            if (v == 0.0) continue;
            const auto& c = cols_[static_cast<size_t>(j)];
            for (size_t k = 0; k < c.rows.size(); ++k) slackTarget[static_cast<size_t>(c.rows[k])] -= c.coefs[k] * v;
        }

        // Rows whose natural slack value violates the slack bounds get an
        // artificial column carrying the excess.
        std::vector<int> artRows;
        for (int i = 0; i < m_; ++i) {
            const int s = slack0_ + i;
            const double v = slackTarget[static_cast<size_t>(i)];
            const double l = lower_[static_cast<size_t>(s)], u = upper_[static_cast<size_t>(s)];
            if (v >= l - feasTolScaled_ && v <= u + feasTolScaled_) {
                basic_[static_cast<size_t>(i)] = s;
                rowOf_[static_cast<size_t>(s)] = i;
                xB_[static_cast<size_t>(i)] = std::min(std::max(v, l), u);
                state_[static_cast<size_t>(s)] = VarState::Basic;
            } else {
                artRows.push_back(i);
            }
        }
        art0_ = total_;
        if (!artRows.empty()) {
            needPhase1_ = true;
            for (int i : artRows) {
                const int s = slack0_ + i;
                const double v = slackTarget[static_cast<size_t>(i)];
                const double l = lower_[static_cast<size_t>(s)], u = upper_[static_cast<size_t>(s)];
                const double pin = v > u ? u : l; // nearest feasible slack bound
                state_[static_cast<size_t>(s)] = std::isinf(l) || pin == u ? VarState::AtUpper : VarState::AtLower;
                nbValue_[static_cast<size_t>(s)] = pin;
                const double excess = v - pin;
                const int a = total_++;
                cols_.push_back({});
                cols_.back().rows.push_back(i);
                cols_.back().coefs.push_back(excess >= 0 ? 1.0 : -1.0);
                lower_.push_back(0.0);
                upper_.push_back(kInfinity);
                cost_.push_back(0.0);
                nbValue_.push_back(0.0);
                state_.push_back(VarState::Basic);
                rowOf_.push_back(i);
                basic_[static_cast<size_t>(i)] = a;
                xB_[static_cast<size_t>(i)] = std::fabs(excess);
            }
        }

        binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) binv_[static_cast<size_t>(i) * m_ + i] = 1.0;
        // Initial basis is unit columns (slacks / artificials with sign):
        // absorb artificial signs into binv rows.
        for (int i = 0; i < m_; ++i) {
            const int bv = basic_[static_cast<size_t>(i)];
            if (bv >= art0_ && cols_[static_cast<size_t>(bv)].coefs[0] < 0)
                binv_[static_cast<size_t>(i) * m_ + i] = -1.0;
        }
    }

    double current_cost(int j) const {
        if (phase1_) return j >= art0_ ? 1.0 : 0.0;
        return j < static_cast<int>(cost_.size()) ? cost_[static_cast<size_t>(j)] : 0.0;
    }

    void compute_duals(std::vector<double>& y) const {
        y.assign(static_cast<size_t>(m_), 0.0);
        for (int i = 0; i < m_; ++i) {
            const double cb = current_cost(basic_[static_cast<size_t>(i)]);
            if (cb == 0.0) continue;
            const double* row = &binv_[static_cast<size_t>(i) * m_];
            for (int k = 0; k < m_; ++k) y[static_cast<size_t>(k)] += cb * row[k];
        }
    }

    double reduced_cost(int j, const std::vector<double>& y) const {
        double d = current_cost(j);
        const auto& c = cols_[static_cast<size_t>(j)];
        for (size_t k = 0; k < c.rows.size(); ++k) d -= y[static_cast<size_t>(c.rows[k])] * c.coefs[k];
        return d;
    }

    void ftran(int j, std::vector<double>& w) const {
        w.assign(static_cast<size_t>(m_), 0.0);
        const auto& c = cols_[static_cast<size_t>(j)];
        for (size_t k = 0; k < c.rows.size(); ++k) {
            const int r = c.rows[k];
            const double a = c.coefs[k];
            for (int i = 0; i < m_; ++i) w[static_cast<size_t>(i)] += binv_[static_cast<size_t>(i) * m_ + r] * a;
        }
    }

    void refactor() {
        // Rebuild binv by Gauss-Jordan on [B | I] with partial pivoting.
        std::vector<double> B(static_cast<size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            const auto& c = cols_[static_cast<size_t>(basic_[static_cast<size_t>(i)])];
            for (size_t k = 0; k < c.rows.size(); ++k)
                B[static_cast<size_t>(c.rows[k]) * m_ + i] = c.coefs[k];
        }
        std::vector<double> inv(static_cast<size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) inv[static_cast<size_t>(i) * m_ + i] = 1.0;
        for (int col = 0; col < m_; ++col) {
            int piv = col;
            double best = std::fabs(B[static_cast<size_t>(col) * m_ + col]);
            for (int r = col + 1; r < m_; ++r) {
                const double cand = std::fabs(B[static_cast<size_t>(r) * m_ + col]);
                if (cand > best) {
                    best = cand;
                    piv = r;
                }
            }
            if (best < 1e-11) {
                std::ostringstream os;
                os << "simplex: singular basis during refactorization (column " << col << ", pivot magnitude "
                   << best << ", iteration " << iters_ << ")";
                throw SingularBasisError(os.str());
            }
            if (piv != col) {
                for (int k = 0; k < m_; ++k) {
                    std::swap(B[static_cast<size_t>(piv) * m_ + k], B[static_cast<size_t>(col) * m_ + k]);
                    std::swap(inv[static_cast<size_t>(piv) * m_ + k], inv[static_cast<size_t>(col) * m_ + k]);
                }
            }
            const double p = B[static_cast<size_t>(col) * m_ + col];
            for (int k = 0; k < m_; ++k) {
                B[static_cast<size_t>(col) * m_ + k] /= p;
                inv[static_cast<size_t>(col) * m_ + k] /= p;
            }
            for (int r = 0; r < m_; ++r) {
                if (r == col) continue;
                const double f = B[static_cast<size_t>(r) * m_ + col];
                if (f == 0.0) continue;
                for (int k = 0; k < m_; ++k) {
                    B[static_cast<size_t>(r) * m_ + k] -= f * B[static_cast<size_t>(col) * m_ + k];
                    inv[static_cast<size_t>(r) * m_ + k] -= f * inv[static_cast<size_t>(col) * m_ + k];
                }
            }
        }
        binv_ = std::move(inv);
        sinceRefactor_ = 0;
    }

    void refresh_basics() {
        // xB = binv (b - N xN)
        std::vector<double> resid = rhs_;
        for (int j = 0; j < total_; ++j) {
            if (rowOf_[static_cast<size_t>(j)] >= 0) continue;
            const double v = nbValue_[static_cast<size_t>(j)];
            if (v == 0.0) continue;
            const auto& c = cols_[static_cast<size_t>(j)];
            for (size_t k = 0; k < c.rows.size(); ++k) resid[static_cast<size_t>(c.rows[k])] -= c.coefs[k] * v;
        }
        for (int i = 0; i < m_; ++i) {
            double v = 0.0;
            const double* row = &binv_[static_cast<size_t>(i) * m_];
            for (int k = 0; k < m_; ++k) v += row[k] * resid[static_cast<size_t>(k)];
            xB_[static_cast<size_t>(i)] = v;
        }
    }

    // After phase 1, pivot zero-valued artificials out of the basis where a
    // usable pivot exists; fix the rest (redundant rows) at zero.
    void evict_artificials() {
        std::vector<double> w;
        for (int i = 0; i < m_; ++i) {
            const int bv = basic_[static_cast<size_t>(i)];
            if (bv < art0_) continue;
            int replacement = -1;
            for (int j = 0; j < art0_ && replacement < 0; ++j) {
                if (rowOf_[static_cast<size_t>(j)] >= 0) continue;
                if (lower_[static_cast<size_t>(j)] == upper_[static_cast<size_t>(j)]) continue;
                ftran(j, w);
                if (std::fabs(w[static_cast<size_t>(i)]) > 1e-7) replacement = j;
            }
            if (replacement >= 0) {
                ftran(replacement, w);
                pivot(replacement, i, w, nbValue_[static_cast<size_t>(replacement)]);
            }
        }
        for (int j = art0_; j < total_; ++j) {
            lower_[static_cast<size_t>(j)] = 0.0;
            upper_[static_cast<size_t>(j)] = 0.0;
            if (rowOf_[static_cast<size_t>(j)] < 0) {
                state_[static_cast<size_t>(j)] = VarState::AtLower;
                nbValue_[static_cast<size_t>(j)] = 0.0;
            }
        }
    }

    void pivot(int entering, int leaveRow, const std::vector<double>& w, double enteringValue) {
        const int leaving = basic_[static_cast<size_t>(leaveRow)];
        const double wr = w[static_cast<size_t>(leaveRow)];
        // binv update: divide pivot row, eliminate elsewhere
        double* prow = &binv_[static_cast<size_t>(leaveRow) * m_];
        for (int k = 0; k < m_; ++k) prow[k] /= wr;
        for (int i = 0; i < m_; ++i) {
            if (i == leaveRow) continue;
            const double f = w[static_cast<size_t>(i)];
            if (f == 0.0) continue;
            double* row = &binv_[static_cast<size_t>(i) * m_];
            for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
        }
        rowOf_[static_cast<size_t>(leaving)] = -1;
        basic_[static_cast<size_t>(leaveRow)] = entering;
        rowOf_[static_cast<size_t>(entering)] = leaveRow;
        xB_[static_cast<size_t>(leaveRow)] = enteringValue;
        // A small pivot element amplifies rounding error through every later
        // eta update, so replace the incremental inverse right away.
        if (std::fabs(wr) < 1e-7 || ++sinceRefactor_ >= refactorEvery_) {
            refactor();
            refresh_basics();
        }
    }

    // Confirms the solution reported as optimal satisfies equations and
    // bounds in the scaled space. Drift past this point would silently
    // corrupt branch-and-bound decisions, so fail loudly instead; the caller
    // retries the whole solve with near-exact refactorization.
    void verify_feasible() const {
        std::vector<double> act(static_cast<size_t>(m_), 0.0);
        for (int j = 0; j < total_; ++j) {
            const double v = value(j);
            const double tol = feasTolScaled_ + 1e-7 * (1.0 + std::fabs(v));
            if (v < lower_[static_cast<size_t>(j)] - tol || v > upper_[static_cast<size_t>(j)] + tol)
                throw SingularBasisError("simplex: solution violates variable bounds after phase 2");
            if (v == 0.0) continue;
            const auto& c = cols_[static_cast<size_t>(j)];
            for (size_t k = 0; k < c.rows.size(); ++k)
                act[static_cast<size_t>(c.rows[k])] += c.coefs[k] * v;
        }
        for (int i = 0; i < m_; ++i) {
            const double tol = feasTolScaled_ + 1e-7 * (1.0 + std::fabs(rhs_[static_cast<size_t>(i)]));
            if (std::fabs(act[static_cast<size_t>(i)] - rhs_[static_cast<size_t>(i)]) > tol)
                throw SingularBasisError("simplex: solution violates row equations after phase 2");
        }
    }

    Outcome iterate() {
        std::vector<double> y, w;
        const double dTol = 1e-9 * (phase1_ ? 1.0 : costScale_);
        while (true) {
            if (++iters_ > maxIters_) return Outcome::IterationLimit;
            compute_duals(y);

            int entering = -1;
            int dir = +1;
            double bestScore = dTol;
            for (int j = 0; j < total_; ++j) {
                if (rowOf_[static_cast<size_t>(j)] >= 0) continue;
                if (lower_[static_cast<size_t>(j)] == upper_[static_cast<size_t>(j)]) continue;
                if (phase1_ && j >= art0_) continue;
                const double d = reduced_cost(j, y);
                double score = 0.0;
                int thisDir = 0;
                switch (state_[static_cast<size_t>(j)]) {
                    case VarState::AtLower:
                        if (d < -dTol) {
                            score = -d;
                            thisDir = +1;
                        }
                        break;
                    case VarState::AtUpper:
                        if (d > dTol) {
                            score = d;
                            thisDir = -1;
                        }
                        break;
                    case VarState::FreeAtZero:
                        if (std::fabs(d) > dTol) {
                            score = std::fabs(d);
                            thisDir = d < 0 ? +1 : -1;
                        }
                        break;
                    case VarState::Basic: break;
                }
                if (thisDir == 0) continue;
                if (blandMode_) {
                    entering = j;
                    dir = thisDir;
                    break;
                }
                if (score > bestScore) {
                    bestScore = score;
                    entering = j;
                    dir = thisDir;
                }
            }
            if (entering < 0) return Outcome::Optimal;

            ftran(entering, w);

            // Ratio test: the entering variable moves by dir * step >= 0.
            // Two passes: first find the tightest step with a slight bound
            // tolerance, then among rows blocking within that step pick the
            // one with the largest pivot magnitude. Choosing large pivots
            // keeps the eta-updated inverse well conditioned; the tolerance
            // permits bound violations of at most slackTol per pivot.
            const double span = upper_[static_cast<size_t>(entering)] - lower_[static_cast<size_t>(entering)];
            int leaveRow = -1;
            bool leavesAtUpper = false;
            const double pivTol = 1e-9;
            const double slackTol = 1e-9;
            double thetaMax = std::isinf(span) ? kInfinity : span;
            struct Candidate {
                int row;
                double ratio;
                double mag;
                bool hitUpper;
            };
            std::vector<Candidate> cands;
            cands.reserve(static_cast<size_t>(m_));
            for (int i = 0; i < m_; ++i) {
                const double delta = -dir * w[static_cast<size_t>(i)]; // change in xB[i] per unit step
                if (std::fabs(delta) <= pivTol) continue;
                const int bv = basic_[static_cast<size_t>(i)];
                double room, limit;
                bool hitUpper;
                if (delta < 0) {
                    limit = lower_[static_cast<size_t>(bv)];
                    if (std::isinf(limit)) continue;
                    room = xB_[static_cast<size_t>(i)] - limit;
                    hitUpper = false;
                } else {
                    limit = upper_[static_cast<size_t>(bv)];
                    if (std::isinf(limit)) continue;
                    room = limit - xB_[static_cast<size_t>(i)];
                    hitUpper = true;
                }
                if (room < 0) room = 0;
                const double mag = std::fabs(delta);
                cands.push_back({i, room / mag, mag, hitUpper});
                const double relaxed = (room + slackTol * (1.0 + std::fabs(limit))) / mag;
                if (relaxed < thetaMax) thetaMax = relaxed;
            }

            if (std::isinf(thetaMax)) return Outcome::Unbounded;

            double step = std::isinf(span) ? kInfinity : span;
            for (const Candidate& c : cands) {
                if (c.ratio > thetaMax) continue;
                bool better;
                if (leaveRow < 0) {
                    better = true;
                } else if (blandMode_) {
                    // Classical rule for termination: strict minimum ratio,
                    // ties broken by the lowest basic-variable index.
                    better = c.ratio < step - 1e-12 ||
                             (c.ratio < step + 1e-12 &&
                              basic_[static_cast<size_t>(c.row)] < basic_[static_cast<size_t>(leaveRow)]);
                } else {
                    better = c.mag > std::fabs(w[static_cast<size_t>(leaveRow)]) + 1e-12 ||
                             (c.mag > std::fabs(w[static_cast<size_t>(leaveRow)]) - 1e-12 &&
                              c.ratio < step);
                }
                if (better) {
                    step = c.ratio;
                    leaveRow = c.row;
                    leavesAtUpper = c.hitUpper;
                }
            }
            if (leaveRow < 0) step = span; // no blocking row: bound flip

            // A tiny pivot usually means the eta updates have drifted; redo
            // this iteration from a fresh factorization before accepting it.
            if (leaveRow >= 0 && std::fabs(w[static_cast<size_t>(leaveRow)]) < 1e-7 &&
                sinceRefactor_ > 0) {
                refactor();
                refresh_basics();
                --iters_;
                continue;
            }

            const double entry = value(entering);
            if (leaveRow < 0) {
                // Bound flip: entering runs to its opposite bound.
                for (int i = 0; i < m_; ++i)
                    xB_[static_cast<size_t>(i)] -= dir * step * w[static_cast<size_t>(i)];
                state_[static_cast<size_t>(entering)] =
                    dir > 0 ? VarState::AtUpper : VarState::AtLower;
                nbValue_[static_cast<size_t>(entering)] =
                    dir > 0 ? upper_[static_cast<size_t>(entering)] : lower_[static_cast<size_t>(entering)];
            } else {
                for (int i = 0; i < m_; ++i)
                    xB_[static_cast<size_t>(i)] -= dir * step * w[static_cast<size_t>(i)];
                const int leaving = basic_[static_cast<size_t>(leaveRow)];
                state_[static_cast<size_t>(leaving)] = leavesAtUpper ? VarState::AtUpper : VarState::AtLower;
                nbValue_[static_cast<size_t>(leaving)] =
                    leavesAtUpper ? upper_[static_cast<size_t>(leaving)] : lower_[static_cast<size_t>(leaving)];
                state_[static_cast<size_t>(entering)] = VarState::Basic;
                pivot(entering, leaveRow, w, entry + dir * step);
            }

            // Degenerate-stall handling: long runs without movement flip to
            // Bland's rule (termination guarantee); any real step flips back.
            if (step > 1e-10) {
                stall_ = 0;
                blandMode_ = false;
            } else if (++stall_ > 2 * (m_ + 10)) {
                blandMode_ = true;
            }
        }
    }
};

std::vector<double> lower_bounds(const MilpModel& model) {
    std::vector<double> l;
    l.reserve(static_cast<size_t>(model.variable_count()));
    for (const Variable& v : model.variables()) l.push_back(v.lower);
    return l;
}

std::vector<double> upper_bounds(const MilpModel& model) {
    std::vector<double> u;
    u.reserve(static_cast<size_t>(model.variable_count()));
    for (const Variable& v : model.variables()) u.push_back(v.upper);
    return u;
}

} // namespace

MilpSolution solve_lp(const MilpModel& model, const LpLimits& limits) {
    return solve_lp_with_bounds(model, lower_bounds(model), upper_bounds(model), limits);
}

MilpSolution solve_lp_with_bounds(const MilpModel& model, const std::vector<double>& lower,
                                  const std::vector<double>& upper, const LpLimits& limits) {
    model.validate();
    for (size_t j = 0; j < lower.size(); ++j)
        if (lower[j] > upper[j]) {
            MilpSolution out;
            out.status = SolveStatus::Infeasible;
            return out;
        }
    try {
        Simplex s(model, lower, upper, limits);
        return s.run();
    } catch (const SingularBasisError&) {
        // Numerical breakdown: retry once with near-exact refactorization
        // before reporting failure.
        Simplex s(model, lower, upper, limits, /*conservative=*/true);
        return s.run();
    }
}

} // namespace campopt::milp
