#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "campopt/milp/branch_and_bound.hpp"
#include "campopt/milp/lp_text.hpp"
#include "campopt/milp/model.hpp"
#include "campopt/milp/simplex.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace campopt::milp;

namespace {

// Exhaustive 0/1 oracle used to cross-check branch-and-bound on small
// all-binary models.
struct BruteForceResult {
    bool feasible = false;
    double objective = 0.0;
    std::vector<double> x;
};

BruteForceResult brute_force_binary(const MilpModel& model) {
    const int n = model.variable_count();
    BruteForceResult best;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<double> x(static_cast<std::size_t>(n));
        bool inBounds = true;
        for (int j = 0; j < n; ++j) {
            x[static_cast<std::size_t>(j)] = (mask >> j) & 1u;
            const Variable& v = model.variables()[static_cast<std::size_t>(j)];
            if (x[static_cast<std::size_t>(j)] < v.lower - 1e-12 ||
                x[static_cast<std::size_t>(j)] > v.upper + 1e-12) {
                inBounds = false;
            }
        }
        if (!inBounds || model.max_violation(x) > 1e-9) continue;
        double obj = model.objective_value(x);
        if (!best.feasible || obj < best.objective) {
            best.feasible = true;
            best.objective = obj;
            best.x = x;
        }
    }
    return best;
}

} // namespace

TEST_CASE("lp: single lower-bounded variable sits on its bound") {
    MilpModel m;
    int x = m.add_variable("x", 0.0, kInfinity, false);
    m.set_objective(x, 1.0);
    int r = m.add_row("floor", Sense::GreaterEqual, 3.0);
    m.add_term(r, x, 1.0);

    MilpSolution s = solve_lp(m);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(s.primal[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(s.gap == 0.0);
}

TEST_CASE("lp: two-constraint diet model lands on the hand-solved vertex") {
    // min x1 + x2 with x1 + 2 x2 >= 4 and 2 x1 + x2 >= 4 meets at (4/3, 4/3).
    MilpModel m;
    int x1 = m.add_variable("x1", 0.0, kInfinity, false);
    int x2 = m.add_variable("x2", 0.0, kInfinity, false);
    m.set_objective(x1, 1.0);
    m.set_objective(x2, 1.0);
    int r1 = m.add_row("r1", Sense::GreaterEqual, 4.0);
    m.add_term(r1, x1, 1.0);
    m.add_term(r1, x2, 2.0);
    int r2 = m.add_row("r2", Sense::GreaterEqual, 4.0);
    m.add_term(r2, x1, 2.0);
    m.add_term(r2, x2, 1.0);

    MilpSolution s = solve_lp(m);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(8.0 / 3.0).epsilon(1e-10));
    CHECK(s.primal[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
    CHECK(s.primal[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
    CHECK(m.max_violation(s.primal) <= 1e-8);
}

TEST_CASE("lp: contradictory bounds-as-rows are reported infeasible") {
    MilpModel m;
    int x = m.add_variable("x", -kInfinity, kInfinity, false);
    m.set_objective(x, 1.0);
    int r1 = m.add_row("le", Sense::LessEqual, 0.0);
    m.add_term(r1, x, 1.0);
    int r2 = m.add_row("ge", Sense::GreaterEqual, 1.0);
    m.add_term(r2, x, 1.0);

    MilpSolution s = solve_lp(m);
    CHECK(s.status == SolveStatus::Infeasible);
    CHECK_FALSE(s.has_primal());
}

TEST_CASE("lp: unbounded direction is detected") {
    MilpModel m;
    int x = m.add_variable("x", -kInfinity, kInfinity, false);
    m.set_objective(x, 1.0);

    MilpSolution s = solve_lp(m);
    CHECK(s.status == SolveStatus::Unbounded);
}

TEST_CASE("lp: equality rows and upper bounds hold exactly") {
    // min -x - y  s.t.  x + y = 5, x <= 3, y <= 4  ->  x=3 (or y=4), obj -5.
    MilpModel m;
    int x = m.add_variable("x", 0.0, 3.0, false);
    int y = m.add_variable("y", 0.0, 4.0, false);
    m.set_objective(x, -1.0);
    m.set_objective(y, -1.0);
    int r = m.add_row("sum", Sense::Equal, 5.0);
    m.add_term(r, x, 1.0);
    m.add_term(r, y, 1.0);

    MilpSolution s = solve_lp(m);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(-5.0).epsilon(1e-10));
    CHECK(s.primal[0] + s.primal[1] == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(m.max_violation(s.primal) <= 1e-8);
}

TEST_CASE("lp: negative-lower-bound variables are handled") {
    // min x + y with x >= -2, y >= -1, x + y >= -2 -> vertex (-2, 0)? No:
    // both want to go low. x=-2, y=-1 gives x+y=-3 < -2, infeasible; the
    // active row x + y = -2 gives objective -2.
    MilpModel m;
    int x = m.add_variable("x", -2.0, kInfinity, false);
    int y = m.add_variable("y", -1.0, kInfinity, false);
    m.set_objective(x, 1.0);
    m.set_objective(y, 1.0);
    int r = m.add_row("cap", Sense::GreaterEqual, -2.0);
    m.add_term(r, x, 1.0);
    m.add_term(r, y, 1.0);

    MilpSolution s = solve_lp(m);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(-2.0).epsilon(1e-10));
}

TEST_CASE("milp: fractional box rounds down under minimization of -x") {
    MilpModel m;
    int x = m.add_variable("x", 0.0, 2.5, true);
    m.set_objective(x, -1.0);

    MilpSolution s = solve_milp(m);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(-2.0));
    CHECK(s.primal[0] == doctest::Approx(2.0));
    CHECK(s.gap <= 1e-6);
}

TEST_CASE("milp: six-item covering instance matches exhaustive enumeration") {
    // Pick items to cover three requirements at least cost; integrality
    // matters (LP relaxation splits items).
    MilpModel m;
    const double cost[6] = {4.0, 3.0, 5.0, 6.0, 2.0, 7.0};
    const double cover[3][6] = {
        {1, 0, 1, 1, 0, 1},
        {0, 1, 1, 0, 1, 0},
        {1, 1, 0, 0, 0, 1},
    };
    for (int j = 0; j < 6; ++j) {
        int v = m.add_variable("item" + std::to_string(j), 0.0, 1.0, true);
        m.set_objective(v, cost[j]);
    }
    for (int i = 0; i < 3; ++i) {
        int r = m.add_row("cover" + std::to_string(i), Sense::GreaterEqual, 1.0);
        for (int j = 0; j < 6; ++j) {
            if (cover[i][j] != 0.0) m.add_term(r, j, cover[i][j]);
        }
    }

    BruteForceResult oracle = brute_force_binary(m);
    REQUIRE(oracle.feasible);

    MilpSolution s = solve_milp(m);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(oracle.objective).epsilon(1e-12));
    for (double v : s.primal) {
        CHECK(std::abs(v - std::round(v)) <= 1e-6);
    }
}

TEST_CASE("milp: random binary models agree with enumeration") {
    std::mt19937 rng(20240811u);
    std::uniform_real_distribution<double> coef(-5.0, 5.0);
    std::uniform_int_distribution<int> nvars(3, 10);
    std::uniform_int_distribution<int> nrows(1, 6);
    std::uniform_int_distribution<int> senseDraw(0, 2);

    for (int trial = 0; trial < 60; ++trial) {
        MilpModel m;
        int n = nvars(rng);
        for (int j = 0; j < n; ++j) {
            int v = m.add_variable("b" + std::to_string(j), 0.0, 1.0, true);
            m.set_objective(v, coef(rng));
        }
        int rows = nrows(rng);
        for (int i = 0; i < rows; ++i) {
            // Integer-valued data keeps the enumeration oracle free of
            // tolerance ambiguity at the feasibility boundary.
            Sense sense = senseDraw(rng) == 0   ? Sense::LessEqual
                          : senseDraw(rng) == 1 ? Sense::GreaterEqual
                                                : Sense::Equal;
            int r = m.add_row("r" + std::to_string(i), sense,
                              std::floor(coef(rng)));
            for (int j = 0; j < n; ++j) {
                double c = std::floor(coef(rng));
                if (c != 0.0) m.add_term(r, j, c);
            }
        }

        BruteForceResult oracle = brute_force_binary(m);
        MilpSolution s = solve_milp(m);
        if (!oracle.feasible) {
            CHECK(s.status == SolveStatus::Infeasible);
            continue;
        }
        REQUIRE(s.status == SolveStatus::Optimal);
        CHECK(s.objective == doctest::Approx(oracle.objective).epsilon(1e-9));
        CHECK(m.max_violation(s.primal) <= 1e-8);
    }
}

TEST_CASE("milp: mixed-integer model keeps continuous part optimal") {
    // min 3 n + y  s.t.  n + y >= 4.3, y <= 1.8, n integer.
    // n = 2 forces y >= 2.3 > 1.8 (infeasible), so n = 3 and y drops to the
    // row boundary 1.3; objective 9 + 1.3 = 10.3.
    MilpModel m;
    int n = m.add_variable("n", 0.0, kInfinity, true);
    int y = m.add_variable("y", 0.0, 1.8, false);
    m.set_objective(n, 3.0);
    m.set_objective(y, 1.0);
    int r = m.add_row("need", Sense::GreaterEqual, 4.3);
    m.add_term(r, n, 1.0);
    m.add_term(r, y, 1.0);

    MilpSolution s = solve_milp(m);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.primal[0] == doctest::Approx(3.0));
    CHECK(s.primal[1] == doctest::Approx(1.3).epsilon(1e-9));
    CHECK(s.objective == doctest::Approx(10.3).epsilon(1e-9));
}

TEST_CASE("milp: determinism across repeated solves") {
    MilpModel m;
    std::mt19937 rng(7u);
    std::uniform_real_distribution<double> coef(0.5, 9.5);
    for (int j = 0; j < 8; ++j) {
        int v = m.add_variable("b" + std::to_string(j), 0.0, 1.0, true);
        m.set_objective(v, coef(rng));
    }
    for (int i = 0; i < 4; ++i) {
        int r = m.add_row("r" + std::to_string(i), Sense::GreaterEqual, 2.0);
        for (int j = 0; j < 8; ++j) m.add_term(r, j, (i + j) % 3 == 0 ? 1.0 : 0.0);
    }

    MilpSolution a = solve_milp(m);
    MilpSolution b = solve_milp(m);
    REQUIRE(a.status == SolveStatus::Optimal);
    REQUIRE(b.status == SolveStatus::Optimal);
    CHECK(a.objective == b.objective);
    CHECK(a.branchCount == b.branchCount);
    CHECK(a.simplexIters == b.simplexIters);
    REQUIRE(a.primal.size() == b.primal.size());
    for (std::size_t j = 0; j < a.primal.size(); ++j) CHECK(a.primal[j] == b.primal[j]);
}

TEST_CASE("milp: gap formula matches the reported definition") {
    CHECK(optimality_gap(100.0, 70.0) == doctest::Approx(0.30).epsilon(1e-15));
    CHECK(optimality_gap(0.0, 0.0) == 0.0);
    CHECK(optimality_gap(50.0, 50.0) == 0.0);
}

TEST_CASE("milp: time limit with an incumbent reports feasible-with-gap") {
    // A 22-variable knapsack-style model with correlated coefficients makes
    // the tree deep enough that a tiny time limit stops before optimality.
    MilpModel m;
    int n = 22;
    int r = m.add_row("cap", Sense::LessEqual, 50.0);
    for (int j = 0; j < n; ++j) {
        int v = m.add_variable("b" + std::to_string(j), 0.0, 1.0, true);
        double w = 5.0 + (j * 7) % 13;
        m.set_objective(v, -(w + 0.1 * j)); // maximize value
        m.add_term(r, v, w);
    }
    SolveLimits limits;
    limits.timeLimitSec = 0.0; // expire immediately after the root
    MilpSolution s = solve_milp(m, limits);
    CHECK((s.status == SolveStatus::TimeLimit || s.status == SolveStatus::FeasibleWithGap));
    if (s.status == SolveStatus::FeasibleWithGap) {
        CHECK(s.has_primal());
        CHECK(s.gap >= 0.0);
        CHECK(s.bestBound <= s.objective + 1e-9);
    } else {
        CHECK_FALSE(s.has_primal());
    }
}

TEST_CASE("milp: infeasible integer model reported as such") {
    MilpModel m;
    int x = m.add_variable("x", 0.0, 10.0, true);
    m.set_objective(x, 1.0);
    int r1 = m.add_row("low", Sense::GreaterEqual, 2.2);
    m.add_term(r1, x, 1.0);
    int r2 = m.add_row("high", Sense::LessEqual, 2.8);
    m.add_term(r2, x, 1.0);

    MilpSolution s = solve_milp(m);
    CHECK(s.status == SolveStatus::Infeasible);
    CHECK_FALSE(s.has_primal());
}

TEST_CASE("lp text: single-variable model exports bounds and objective") {
    MilpModel m;
    int x = m.add_variable("x", 1.5, 7.0, false);
    m.set_objective(x, 2.0);
    std::string text = export_model(m);
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("2 x") != std::string::npos);
    CHECK(text.find("1.5 <= x <= 7") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
}

TEST_CASE("lp text: equality sense survives export") {
    MilpModel m;
    int x = m.add_variable("x", 0.0, kInfinity, false);
    int r = m.add_row("fix", Sense::Equal, 4.0);
    m.add_term(r, x, 1.0);
    m.set_objective(x, 1.0);
    std::string text = export_model(m);
    CHECK(text.find("fix: 1 x = 4") != std::string::npos);
}

TEST_CASE("lp text: round trip preserves solution and coefficients") {
    std::mt19937 rng(991u);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    MilpModel m;
    m.set_name("roundtrip");
    for (int j = 0; j < 20; ++j) {
        bool integral = j % 3 == 0;
        double lo = (j % 4 == 0) ? -2.0 : 0.0;
        double hi = (j % 5 == 0) ? kInfinity : 4.0 + j;
        int v = m.add_variable("v" + std::to_string(j), lo, hi, integral);
        m.set_objective(v, coef(rng));
    }
    for (int i = 0; i < 8; ++i) {
        Sense sense = i % 3 == 0 ? Sense::Equal : (i % 3 == 1 ? Sense::LessEqual : Sense::GreaterEqual);
        int r = m.add_row("c" + std::to_string(i), sense, std::round(coef(rng) * 2.0));
        for (int j = 0; j < 20; ++j) {
            if ((i + j) % 4 == 0) m.add_term(r, j, coef(rng));
        }
    }

    std::string text = export_model(m);
    MilpModel back = parse_lp_text(text);

    REQUIRE(back.variable_count() == m.variable_count());
    REQUIRE(back.row_count() == m.row_count());
    for (int j = 0; j < m.variable_count(); ++j) {
        const auto& a = m.variables()[static_cast<std::size_t>(j)];
        const auto& b = back.variables()[static_cast<std::size_t>(j)];
        CHECK(a.name == b.name);
        CHECK(a.integral == b.integral);
        if (std::isfinite(a.lower)) {
            CHECK(b.lower == doctest::Approx(a.lower).epsilon(1e-14));
        } else {
            CHECK(!std::isfinite(b.lower));
        }
        if (std::isfinite(a.upper)) {
            CHECK(b.upper == doctest::Approx(a.upper).epsilon(1e-14));
        } else {
            CHECK(!std::isfinite(b.upper));
        }
        CHECK(back.objective()[static_cast<std::size_t>(j)] ==
              doctest::Approx(m.objective()[static_cast<std::size_t>(j)]).epsilon(1e-14));
    }

    // The exported text must describe the same optimization problem.
    MilpSolution orig = solve_milp(m);
    MilpSolution reread = solve_milp(back);
    REQUIRE(orig.status == reread.status);
    if (orig.status == SolveStatus::Optimal) {
        CHECK(orig.objective == doctest::Approx(reread.objective).epsilon(1e-9));
    }

    // And a second export is byte-identical (stable sanitization).
    CHECK(export_model(back) == text);
}

TEST_CASE("lp text: parser handles hand-written dialect") {
    std::string text =
        "\\ small sample\n"
        "Minimize\n"
        " obj: x + 2 y\n"
        "Subject To\n"
        " c1: x + y >= 2\n"
        " c2: -x + y <= 1\n"
        "Bounds\n"
        " x free\n"
        " -1 <= y <= 10\n"
        "Generals\n"
        " y\n"
        "End\n";
    MilpModel m = parse_lp_text(text);
    CHECK(m.variable_count() == 2);
    CHECK(m.row_count() == 2);
    CHECK(m.variables()[0].lower == -kInfinity);
    CHECK(m.variables()[1].integral);
    MilpSolution s = solve_milp(m);
    REQUIRE(s.status == SolveStatus::Optimal);
    // x unbounded below but c1 ties it to y; optimum pushes y to its
    // cheapest integral value satisfying both rows.
    CHECK(m.max_violation(s.primal) <= 1e-8);
}

TEST_CASE("lp text: malformed input reports line numbers") {
    CHECK_THROWS_WITH_AS(parse_lp_text("Minimize\n obj: x\nSubject To\n c: x ? 3\nEnd\n"),
                         doctest::Contains("line 4"), std::runtime_error);
    CHECK_THROWS_AS(parse_lp_text("Maximize\n obj: x\nEnd\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_lp_text("Bounds\n x <= 4\nEnd\n"), std::runtime_error);
}

TEST_CASE("milp: weak duality holds on a solved model") {
    MilpModel m;
    for (int j = 0; j < 6; ++j) {
        int v = m.add_variable("b" + std::to_string(j), 0.0, 1.0, true);
        m.set_objective(v, 1.0 + j);
    }
    int r = m.add_row("pick", Sense::GreaterEqual, 3.0);
    for (int j = 0; j < 6; ++j) m.add_term(r, j, 1.0);
    MilpSolution s = solve_milp(m);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.bestBound <= s.objective + 1e-9);
    CHECK(s.objective == doctest::Approx(6.0)); // 1 + 2 + 3
}
