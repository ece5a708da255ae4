#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "campopt/lunar_dataset.hpp"
#include "campopt/scenario.hpp"
#include "campopt/scenario_io.hpp"
#include "campopt/time_network.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>
#include <string>

using namespace campopt;

namespace {

bool has_violation_on(const std::vector<Violation>& vs, const std::string& fieldPart) {
    return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) {
        return v.field.find(fieldPart) != std::string::npos;
    });
}

ScenarioSpec two_node_scenario() {
    ScenarioSpec s;
    s.name = "pair";
    s.missionCount = 1;
    s.cycleLengthDays = 30;
    s.crewCount = 0;
    s.earthNode = "a";
    s.vehicle.fleetSize = 1;
    s.vehicle.ispSeconds = 400.0;
    s.nodes = {{"a", true, {}}, {"b", true, {}}};
    s.arcs = {{"a", "b", 1000.0, 3, ArcKind::Transport, {{10, 10}}}};
    s.demands = {{"a", 10, Commodity::Propellant, 5.0}, {"b", 13, Commodity::Propellant, -5.0}};
    s.isru.node = "b";
    s.isru.deployCapKg = 0.0;
    return s;
}

} // namespace

TEST_CASE("grid: lunar cycle events cover the published schedule") {
    ScenarioSpec s = lunar_scenario();
    REQUIRE(validate_scenario(s).empty());
    std::vector<int> grid = build_time_grid(s);
    std::set<int> got(grid.begin(), grid.end());
    for (int day : {352, 357, 360, 365}) {
        CAPTURE(day);
        CHECK(got.count(day) == 1);
    }
    // Arrival closure adds the transfer knee days.
    CHECK(got.count(356) == 1);
    CHECK(got.count(361) == 1);
    CHECK(grid == std::vector<int>({352, 356, 357, 360, 361, 365}));
}

TEST_CASE("grid: degenerate scenario keeps its single demand day") {
    ScenarioSpec s;
    s.name = "point";
    s.cycleLengthDays = 365;
    s.earthNode = "a";
    s.nodes = {{"a", true, {}}};
    s.demands = {{"a", 0, Commodity::Propellant, 1.0}};
    std::vector<int> grid = build_time_grid(s);
    CHECK(grid == std::vector<int>({0}));
}

TEST_CASE("grid: window day plus flight time appears as an event") {
    ScenarioSpec s = two_node_scenario();
    s.arcs.push_back({"b", "a", 500.0, 3, ArcKind::Transport, {{10, 10}}});
    std::vector<int> grid = build_time_grid(s);
    std::set<int> got(grid.begin(), grid.end());
    CHECK(got.count(10) == 1);
    CHECK(got.count(13) == 1);

    // A wider window lets the day-13 arrival become a departure, whose own
    // arrival then joins the grid (fixpoint closure).
    s.arcs[1].windows = {{10, 13}};
    grid = build_time_grid(s);
    got = std::set<int>(grid.begin(), grid.end());
    CHECK(got.count(16) == 1);
}

TEST_CASE("grid: deterministic for identical inputs") {
    ScenarioSpec s = lunar_scenario_variant('D');
    CHECK(build_time_grid(s) == build_time_grid(s));
    ScenarioSpec t = lunar_scenario_variant('D');
    CHECK(build_time_grid(s) == build_time_grid(t));
}

TEST_CASE("grid: window past cycle end is rejected by name") {
    ScenarioSpec s = two_node_scenario();
    s.arcs[0].windows = {{25, 40}}; // cycle is 30 days
    std::vector<Violation> vs = validate_scenario(s);
    CHECK(has_violation_on(vs, "arcs[0]"));
}

TEST_CASE("expand: one vehicle slot per fleet member per admissible day") {
    ScenarioSpec s = two_node_scenario();
    s.vehicle.fleetSize = 4;
    s.nodes[0].allowDwell = false;
    s.nodes[1].allowDwell = false;
    TimeExpandedNetwork net = expand_network(s);
    CHECK(net.transport_arc_count() == 4);
    CHECK(net.holdover_arc_count() == 0);
    for (const ExpandedArc& arc : net.arcs) {
        CHECK(arc.departDay == 10);
        CHECK(arc.arriveDay == 13);
    }
}

TEST_CASE("expand: zero vehicles leaves only holdover arcs") {
    ScenarioSpec s = two_node_scenario();
    s.vehicle.fleetSize = 0;
    TimeExpandedNetwork net = expand_network(s);
    CHECK(net.transport_arc_count() == 0);
    CHECK(net.holdover_arc_count() > 0);
}

TEST_CASE("expand: holdover count is events minus one per dwell node") {
    ScenarioSpec s = two_node_scenario();
    s.vehicle.fleetSize = 0;
    s.demands.push_back({"a", 20, Commodity::Propellant, 1.0});
    std::vector<int> grid = build_time_grid(s);
    REQUIRE(grid.size() == 3); // {10, 13, 20}
    TimeExpandedNetwork net = expand_network(s);
    CHECK(net.holdover_arc_count() == 4);
}

TEST_CASE("expand: lunar dataset counts match the closed-form product") {
    ScenarioSpec s = lunar_scenario();
    TimeExpandedNetwork net = expand_network(s);
    // 5 arcs x 4 vehicles x 1 admissible day each.
    CHECK(net.transport_arc_count() == 5 * 4);
    // Dwell permitted at earth, llo, moon; 6 grid events.
    CHECK(net.holdover_arc_count() == 3 * 5);
    CHECK(net.timeSteps.size() == 6);
}

TEST_CASE("expand: departures stay inside declared windows") {
    std::mt19937 rng(318u);
    std::uniform_int_distribution<int> dayDraw(0, 40);
    std::uniform_int_distribution<int> tofDraw(0, 6);
    std::uniform_int_distribution<int> fleetDraw(0, 3);
    for (int trial = 0; trial < 40; ++trial) {
        ScenarioSpec s;
        s.name = "rand";
        s.cycleLengthDays = 60;
        s.earthNode = "a";
        s.vehicle.fleetSize = fleetDraw(rng);
        s.vehicle.ispSeconds = 400.0;
        s.nodes = {{"a", true, {}}, {"b", true, {}}, {"c", false, {}}};
        s.isru.node = "b";
        const char* ids[3] = {"a", "b", "c"};
        std::uniform_int_distribution<int> nodeDraw(0, 2);
        int arcCount = 1 + trial % 4;
        for (int k = 0; k < arcCount; ++k) {
            int from = nodeDraw(rng);
            int to = nodeDraw(rng);
            if (to == from) to = (to + 1) % 3;
            int w0 = dayDraw(rng);
            int w1 = std::min(60, w0 + trial % 5);
            s.arcs.push_back(
                {ids[from], ids[to], 100.0 * k, tofDraw(rng), ArcKind::Transport, {{w0, w1}}});
        }
        s.demands = {{"a", 5, Commodity::Propellant, 1.0}};
        REQUIRE(validate_scenario(s).empty());

        TimeExpandedNetwork net = expand_network(s);
        std::set<int> grid(net.timeSteps.begin(), net.timeSteps.end());
        long expected = 0;
        for (const ArcSpec& arc : s.arcs) {
            long steps = 0;
            for (int day : net.timeSteps) {
                bool inWindow = false;
                for (const Window& w : arc.windows) {
                    inWindow = inWindow || (day >= w.startDay && day <= w.endDay);
                }
                if (inWindow && day + arc.tofDays <= s.cycleLengthDays) ++steps;
            }
            expected += steps * s.vehicle.fleetSize;
        }
        CHECK(net.transport_arc_count() == expected);

        for (const ExpandedArc& arc : net.arcs) {
            if (arc.holdover) continue;
            const ArcSpec& spec = s.arcs[static_cast<std::size_t>(arc.specIndex)];
            bool inWindow = false;
            for (const Window& w : spec.windows) {
                inWindow = inWindow || (arc.departDay >= w.startDay && arc.departDay <= w.endDay);
            }
            CHECK(inWindow);
            CHECK(grid.count(arc.departDay) == 1);
            CHECK(grid.count(arc.arriveDay) == 1);
            CHECK(arc.arriveDay == arc.departDay + spec.tofDays);
        }
    }
}

TEST_CASE("expand: demands aggregate per node and day") {
    ScenarioSpec s = lunar_scenario();
    TimeExpandedNetwork net = expand_network(s);
    int moon = s.node_index("moon");
    auto it = net.nodeTimeDemand.find({moon, 357});
    REQUIRE(it != net.nodeTimeDemand.end());
    CHECK(it->second[index_of(Commodity::Crew)] == doctest::Approx(-6.0));
    CHECK(it->second[index_of(Commodity::HabitatEquipment)] == doctest::Approx(-5000.0));
    auto ret = net.nodeTimeDemand.find({moon, 360});
    REQUIRE(ret != net.nodeTimeDemand.end());
    CHECK(ret->second[index_of(Commodity::Crew)] == doctest::Approx(6.0));
    CHECK(ret->second[index_of(Commodity::ReturnSample)] == doctest::Approx(2500.0));
}

TEST_CASE("validate: shipped five-mission variant passes") {
    ScenarioSpec s = lunar_scenario_variant('D');
    CHECK(s.missionCount == 5);
    CHECK(s.crewCount == 6);
    CHECK(s.habitatMassKg == 5000.0);
    CHECK(s.isru.productionRate.mean == 5.0);
    CHECK(s.isru.productionRate.sd == 1.5);
    CHECK(s.isru.decayRatePct.mean == 10.0);
    CHECK(s.isru.decayRatePct.sd == 10.0);
    CHECK(validate_scenario(s).empty());
}

TEST_CASE("validate: all shipped variants pass") {
    for (const LunarVariant& v : lunar_variants()) {
        CAPTURE(v.letter);
        ScenarioSpec s = lunar_scenario_variant(v.letter);
        CHECK(validate_scenario(s).empty());
    }
    CHECK(validate_scenario(lunar_scenario_compact()).empty());
}

TEST_CASE("validate: negative habitat mass is flagged on the field") {
    ScenarioSpec s = lunar_scenario();
    s.habitatMassKg = -1.0;
    std::vector<Violation> vs = validate_scenario(s);
    CHECK(has_violation_on(vs, "habitatMassKg"));
}

TEST_CASE("validate: holdover arcs may not carry delta-v") {
    ScenarioSpec s = two_node_scenario();
    s.arcs.push_back({"a", "a", 100.0, 1, ArcKind::Holdover, {{0, 30}}});
    std::vector<Violation> vs = validate_scenario(s);
    CHECK(has_violation_on(vs, "arcs[1]"));
}

TEST_CASE("validate: unknown arc endpoint is flagged") {
    ScenarioSpec s = two_node_scenario();
    s.arcs[0].to = "nowhere";
    std::vector<Violation> vs = validate_scenario(s);
    CHECK(!vs.empty());
    CHECK(has_violation_on(vs, "arcs[0]"));
}

TEST_CASE("io: scenario survives a save/load round trip") {
    ScenarioSpec s = lunar_scenario_variant('I');
    std::string text = serialize_scenario(s);
    ScenarioSpec back = parse_scenario(text);
    CHECK(serialize_scenario(back) == text);
    CHECK(scenario_hash(back) == scenario_hash(s));
    CHECK(back.name == s.name);
    CHECK(back.missionCount == s.missionCount);
    CHECK(back.crewCount == 12);
    CHECK(back.habitatMassKg == 10000.0);
    CHECK(back.nodes.size() == s.nodes.size());
    CHECK(back.arcs.size() == s.arcs.size());
    CHECK(back.demands.size() == s.demands.size());
    CHECK(back.vehicle.designGrid.payloadSteps == s.vehicle.designGrid.payloadSteps);
    CHECK(back.isru.decayRatePct.sd == s.isru.decayRatePct.sd);

    std::string path = "roundtrip_scenario.json";
    save_scenario(s, path);
    ScenarioSpec fromFile = load_scenario(path);
    CHECK(scenario_hash(fromFile) == scenario_hash(s));
    std::remove(path.c_str());
}

TEST_CASE("io: malformed documents fail with the offending field") {
    CHECK_THROWS_AS(parse_scenario("{"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"schema_version": 99})"),
                         doctest::Contains("schema_version"), std::runtime_error);
    ScenarioSpec s = lunar_scenario();
    std::string text = serialize_scenario(s);
    std::string broken = text;
    std::size_t pos = broken.find("\"crew_count\"");
    REQUIRE(pos != std::string::npos);
    broken.replace(pos, 12, "\"crew_cnt\"");
    CHECK_THROWS_AS(parse_scenario(broken), std::runtime_error);
}

TEST_CASE("io: hash tracks content changes") {
    ScenarioSpec a = lunar_scenario_variant('A');
    ScenarioSpec b = lunar_scenario_variant('B');
    CHECK(scenario_hash(a) != scenario_hash(b));
    ScenarioSpec a2 = lunar_scenario_variant('A');
    CHECK(scenario_hash(a) == scenario_hash(a2));
    a2.isru.productionRate.mean += 1e-9;
    CHECK(scenario_hash(a) != scenario_hash(a2));
}
