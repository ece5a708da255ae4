#include "campopt/milp/branch_and_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace campopt::milp {
namespace {

struct Node {
    std::vector<double> lower;
    std::vector<double> upper;
    double parentBound = -kInfinity;
    std::size_t id = 0;
};

struct NodeOrder {
    // Best bound first; older nodes break ties so exploration order is
    // reproducible across runs.
    bool operator()(const Node& a, const Node& b) const {
        if (a.parentBound != b.parentBound) return a.parentBound > b.parentBound;
        return a.id > b.id;
    }
};

int most_fractional(const MilpModel& model, const std::vector<double>& x, double intTol) {
    int best = -1;
    double bestDist = intTol;
    for (std::size_t j = 0; j < model.variables().size(); ++j) {
        if (!model.variables()[j].integral) continue;
        double frac = x[j] - std::floor(x[j]);
        double dist = std::min(frac, 1.0 - frac);
        if (dist > bestDist + 1e-15) {
            bestDist = dist;
            best = static_cast<int>(j);
        }
    }
    return best;
}

} // namespace

MilpSolution solve_milp(const MilpModel& model, const SolveLimits& limits) {
    model.validate();
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    const std::size_t n = model.variables().size();
    std::vector<double> rootLower(n), rootUpper(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Variable& v = model.variables()[j];
        double lo = v.lower, hi = v.upper;
        if (v.integral) {
            // Round integer bounds inward so the LP relaxation never offers
            // a fractional sliver outside the lattice box.
            if (std::isfinite(lo)) lo = std::ceil(lo - limits.intTol);
            if (std::isfinite(hi)) hi = std::floor(hi + limits.intTol);
        }
        rootLower[j] = lo;
        rootUpper[j] = hi;
    }

    MilpSolution result;
    result.status = SolveStatus::TimeLimit;
    result.objective = kInfinity;
    result.bestBound = -kInfinity;

    LpLimits lpLimits;
    lpLimits.feasTol = limits.feasTol;

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    std::size_t nextId = 0;
    open.push(Node{rootLower, rootUpper, -kInfinity, nextId++});

    bool haveIncumbent = false;
    double incumbent = kInfinity;
    std::vector<double> incumbentX;
    long branches = 0;
    long lpIters = 0;
    bool rootUnbounded = false;
    bool hitTimeLimit = false;

    while (!open.empty()) {
        if (elapsed() > limits.timeLimitSec) {
            hitTimeLimit = true;
            break;
        }
        Node node = open.top();
        open.pop();

        if (haveIncumbent && node.parentBound >= incumbent - limits.gapTol * std::abs(incumbent)) {
            continue; // bound can only rise below this node
        }

        MilpSolution lp = solve_lp_with_bounds(model, node.lower, node.upper, lpLimits);
        lpIters += lp.simplexIters;

        if (lp.status == SolveStatus::Infeasible) continue;
        if (lp.status == SolveStatus::Unbounded) {
            if (node.id == 0) {
                rootUnbounded = true;
                break;
            }
            throw std::runtime_error("milp: child node unbounded but root was bounded");
        }

        double bound = lp.objective;
        if (std::isfinite(node.parentBound) &&
            bound < node.parentBound - limits.feasTol * (1.0 + std::abs(node.parentBound))) {
            // A child is a restriction of its parent, so its relaxation
            // cannot improve. A drop this large means the LP solves are
            // numerically unreliable.
            throw std::runtime_error("milp: child relaxation bound below parent bound");
        }
        if (haveIncumbent && bound >= incumbent - limits.gapTol * std::abs(incumbent)) {
            continue; // subtree cannot beat the incumbent
        }

        int branchVar = most_fractional(model, lp.primal, limits.intTol);
        if (branchVar < 0) {
            // Integral solution: candidate incumbent.
            if (!haveIncumbent || lp.objective < incumbent) {
                haveIncumbent = true;
                incumbent = lp.objective;
                incumbentX = lp.primal;
                for (std::size_t j = 0; j < n; ++j) {
                    if (model.variables()[j].integral) {
                        incumbentX[j] = std::round(incumbentX[j]);
                    }
                }
            }
            continue;
        }

        double val = lp.primal[static_cast<std::size_t>(branchVar)];
        ++branches;

        Node down = node;
        down.upper[static_cast<std::size_t>(branchVar)] = std::floor(val);
        down.parentBound = bound;
        down.id = nextId++;
        if (down.lower[static_cast<std::size_t>(branchVar)] <=
            down.upper[static_cast<std::size_t>(branchVar)]) {
            open.push(std::move(down));
        }

        Node up = node;
        up.lower[static_cast<std::size_t>(branchVar)] = std::ceil(val);
        up.parentBound = bound;
        up.id = nextId++;
        if (up.lower[static_cast<std::size_t>(branchVar)] <=
            up.upper[static_cast<std::size_t>(branchVar)]) {
            open.push(std::move(up));
        }
    }

    result.branchCount = branches;
    result.simplexIters = lpIters;
    result.wallTimeSec = elapsed();

    if (rootUnbounded) {
        result.status = SolveStatus::Unbounded;
        result.objective = -kInfinity;
        result.bestBound = -kInfinity;
        return result;
    }

    // The global bound is the best (lowest) bound still open, or the
    // incumbent if the tree is exhausted.
    double openBound = haveIncumbent ? incumbent : kInfinity;
    if (!open.empty()) openBound = std::min(openBound, open.top().parentBound);

    if (haveIncumbent) {
        result.primal = std::move(incumbentX);
        result.objective = incumbent;
        result.bestBound = hitTimeLimit ? openBound : incumbent;
        if (result.bestBound > result.objective + limits.feasTol * (1.0 + std::abs(result.objective))) {
            // Weak duality: the global relaxation bound can never exceed a
            // feasible integral objective.
            throw std::runtime_error("milp: best bound exceeds incumbent objective");
        }
        result.bestBound = std::min(result.bestBound, result.objective);
        result.gap = optimality_gap(result.objective, result.bestBound);
        result.status = (hitTimeLimit && result.gap > limits.gapTol) ? SolveStatus::FeasibleWithGap
                                                                     : SolveStatus::Optimal;
        if (result.status == SolveStatus::Optimal) {
            result.bestBound = incumbent;
            result.gap = 0.0;
        }
        return result;
    }

    result.status = hitTimeLimit ? SolveStatus::TimeLimit : SolveStatus::Infeasible;
    return result;
}

} // namespace campopt::milp
