#include "campopt/milp/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace campopt::milp {

int MilpModel::add_variable(std::string name, double lower, double upper, bool integral) {
    if (lower > upper) throw std::invalid_argument("variable " + name + ": lower bound above upper bound");
    variables_.push_back(Variable{std::move(name), lower, upper, integral});
    objective_.push_back(0.0);
    return static_cast<int>(variables_.size()) - 1;
}

void MilpModel::set_objective(int variable, double coefficient) {
    objective_.at(static_cast<size_t>(variable)) += coefficient;
}

int MilpModel::add_row(std::string name, Sense sense, double rhs) {
    rows_.push_back(Row{std::move(name), {}, sense, rhs});
    return static_cast<int>(rows_.size()) - 1;
}

void MilpModel::add_term(int row, int variable, double coefficient) {
    if (coefficient == 0.0) return;
    Row& r = rows_.at(static_cast<size_t>(row));
    if (variable < 0 || variable >= variable_count())
        throw std::invalid_argument("row " + r.name + ": unknown variable index");
    for (Term& t : r.terms) {
        if (t.variable == variable) {
            t.coefficient += coefficient;
            return;
        }
    }
    r.terms.push_back(Term{variable, coefficient});
}

void MilpModel::set_bounds(int variable, double lower, double upper) {
    Variable& v = variables_.at(static_cast<size_t>(variable));
    if (lower > upper)
        throw std::invalid_argument("variable " + v.name + ": lower bound above upper bound");
    v.lower = lower;
    v.upper = upper;
}

void MilpModel::tighten_bounds(int variable, double lower, double upper) {
    Variable& v = variables_.at(static_cast<size_t>(variable));
    set_bounds(variable, std::max(v.lower, lower), std::min(v.upper, upper));
}

void MilpModel::mark_integral(int variable) {
    variables_.at(static_cast<size_t>(variable)).integral = true;
}

double MilpModel::objective_value(const std::vector<double>& primal) const {
    double v = 0.0;
    for (size_t i = 0; i < objective_.size(); ++i) v += objective_[i] * primal.at(i);
    return v;
}

double MilpModel::max_violation(const std::vector<double>& primal) const {
    double worst = 0.0;
    for (size_t i = 0; i < variables_.size(); ++i) {
        worst = std::max(worst, variables_[i].lower - primal[i]);
        worst = std::max(worst, primal[i] - variables_[i].upper);
    }
    for (const Row& r : rows_) {
        double lhs = 0.0;
        for (const Term& t : r.terms) lhs += t.coefficient * primal[static_cast<size_t>(t.variable)];
        switch (r.sense) {
            case Sense::LessEqual: worst = std::max(worst, lhs - r.rhs); break;
            case Sense::GreaterEqual: worst = std::max(worst, r.rhs - lhs); break;
            case Sense::Equal: worst = std::max(worst, std::fabs(lhs - r.rhs)); break;
        }
    }
    return worst;
}

void MilpModel::validate() const {
    for (const Variable& v : variables_) {
        if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper)
            throw std::invalid_argument("variable " + v.name + ": malformed bounds");
    }
    for (const Row& r : rows_) {
        if (std::isnan(r.rhs)) throw std::invalid_argument("row " + r.name + ": NaN right-hand side");
        for (const Term& t : r.terms) {
            if (t.variable < 0 || t.variable >= variable_count())
                throw std::invalid_argument("row " + r.name + ": term references unknown variable");
            if (std::isnan(t.coefficient))
                throw std::invalid_argument("row " + r.name + ": NaN coefficient");
        }
    }
}

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::FeasibleWithGap: return "feasible-with-gap";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::TimeLimit: return "time-limit";
    }
    return "unknown";
}

double optimality_gap(double objective, double bestBound) {
    if (objective == 0.0) return 0.0;
    return (objective - bestBound) / objective;
}

} // namespace campopt::milp
