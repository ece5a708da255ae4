#pragma once

#include <limits>
#include <string>
#include <vector>

namespace campopt::milp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal, GreaterEqual };

enum class SolveStatus { Optimal, FeasibleWithGap, Infeasible, Unbounded, TimeLimit };

struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInfinity;
    bool integral = false;
};

struct Term {
    int variable = 0;
    double coefficient = 0.0;
};

struct Row {
    std::string name;
    std::vector<Term> terms;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
};

class MilpModel {
  public:
    int add_variable(std::string name, double lower, double upper, bool integral);
    void set_objective(int variable, double coefficient); // accumulates
    int add_row(std::string name, Sense sense, double rhs);
    void add_term(int row, int variable, double coefficient); // accumulates per (row, var)

    void set_bounds(int variable, double lower, double upper);
    // Intersects with the current bounds (never loosens).
    void tighten_bounds(int variable, double lower, double upper);
    void mark_integral(int variable);
    void set_name(std::string name) { name_ = std::move(name); }
    const std::string& name() const { return name_; }

    int variable_count() const { return static_cast<int>(variables_.size()); }
    int row_count() const { return static_cast<int>(rows_.size()); }
    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<Row>& rows() const { return rows_; }
    const std::vector<double>& objective() const { return objective_; }

    double objective_value(const std::vector<double>& primal) const;
    // Largest violation of rows and bounds at the given point.
    double max_violation(const std::vector<double>& primal) const;
    void validate() const; // throws std::invalid_argument on malformed input

  private:
    std::string name_;
    std::vector<Variable> variables_;
    std::vector<Row> rows_;
    std::vector<double> objective_;
};

struct MilpSolution {
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<double> primal; // empty unless an incumbent exists
    double objective = 0.0;
    double bestBound = 0.0;
    double gap = 0.0; // (objective - bestBound) / objective
    double wallTimeSec = 0.0;
    long branchCount = 0;   // branch-and-bound nodes explored
    long simplexIters = 0;

    bool has_primal() const { return !primal.empty(); }
};

const char* status_name(SolveStatus s);

// Gap as reported alongside time limits: (objective - bestBound) / objective,
// zero when the incumbent objective is zero.
double optimality_gap(double objective, double bestBound);

} // namespace campopt::milp
