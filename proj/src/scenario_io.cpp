#include "campopt/scenario_io.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace campopt {

using nlohmann::json;

namespace {

Commodity parse_commodity(const json& j, const std::string& where) {
    const auto c = commodity_from_name(j.get<std::string>());
    if (!c) throw std::runtime_error("scenario: unknown commodity '" + j.get<std::string>() + "' in " + where);
    return *c;
}

Distribution parse_distribution(const json& j) {
    return Distribution{j.at("mean").get<double>(), j.at("sd").get<double>()};
}

json dump_distribution(const Distribution& d) { return json{{"mean", d.mean}, {"sd", d.sd}}; }

} // namespace

ScenarioSpec parse_scenario(const std::string& jsonText) {
    json j;
    try {
        j = json::parse(jsonText);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("scenario: not valid JSON: ") + e.what());
    }

    ScenarioSpec s;
    try {
        s.schemaVersion = j.at("schema_version").get<int>();
        if (s.schemaVersion != 1)
            throw std::runtime_error("scenario: unsupported schema_version " + std::to_string(s.schemaVersion));
        s.name = j.value("name", std::string{});
        s.description = j.value("description", std::string{});
        s.missionCount = j.at("missions").get<int>();
        s.cycleLengthDays = j.at("cycle_length_days").get<int>();
        s.crewCount = j.at("crew_count").get<int>();
        s.habitatMassKg = j.at("habitat_mass_kg").get<double>();
        s.earthNode = j.at("earth_node").get<std::string>();

        const json& crew = j.at("crew");
        s.crew.massKg = crew.at("mass_kg").get<double>();
        s.crew.consumptionKgPerDay = crew.at("consumption_kg_per_day").get<double>();

        const json& veh = j.at("vehicle");
        s.vehicle.fleetSize = veh.at("fleet_size").get<int>();
        s.vehicle.ispSeconds = veh.at("isp_s").get<double>();
        s.vehicle.maintenanceFractionPerFlight = veh.value("maintenance_fraction_per_flight", 0.01);
        if (veh.contains("sizing")) {
            const json& sz = veh.at("sizing");
            s.vehicle.sizing = SizingModel{sz.at("c0").get<double>(), sz.at("c1").get<double>(),
                                           sz.at("c2").get<double>()};
        } else {
            s.vehicle.sizing = default_sizing_model();
        }
        const json& grid = veh.at("design_grid");
        const json& pay = grid.at("payload_kg");
        const json& prop = grid.at("propellant_kg");
        s.vehicle.designGrid = DesignGridSpec{pay.at("min").get<double>(),  pay.at("max").get<double>(),
                                              pay.at("steps").get<int>(),   prop.at("min").get<double>(),
                                              prop.at("max").get<double>(), prop.at("steps").get<int>()};

        const json& isru = j.at("isru");
        s.isru.node = isru.at("node").get<std::string>();
        s.isru.productionRate = parse_distribution(isru.at("production_rate_per_year"));
        s.isru.decayRatePct = parse_distribution(isru.at("decay_rate_pct_per_year"));
        s.isru.deployCapKg = isru.at("deploy_cap_kg").get<double>();
        s.isru.maintenanceFractionPerYear = isru.value("maintenance_fraction_per_year", 0.05);
        s.isru.electrolysisLossFactor = isru.value("electrolysis_loss_factor", 1.0);

        for (const json& n : j.at("nodes")) {
            NodeSpec node;
            node.id = n.at("id").get<std::string>();
            node.allowDwell = n.value("allow_dwell", true);
            if (n.contains("infinite_supply"))
                for (const json& c : n.at("infinite_supply"))
                    node.infiniteSupply.push_back(parse_commodity(c, "nodes/" + node.id));
            s.nodes.push_back(std::move(node));
        }

        for (const json& a : j.at("arcs")) {
            ArcSpec arc;
            arc.from = a.at("from").get<std::string>();
            arc.to = a.at("to").get<std::string>();
            arc.deltaVMps = a.at("delta_v_mps").get<double>();
            arc.tofDays = a.at("tof_days").get<int>();
            arc.kind = a.value("kind", std::string("transport")) == "holdover" ? ArcKind::Holdover
                                                                               : ArcKind::Transport;
            for (const json& w : a.at("windows")) {
                if (!w.is_array() || w.size() != 2)
                    throw std::runtime_error("scenario: window must be a [start, end] pair");
                arc.windows.push_back(Window{w[0].get<int>(), w[1].get<int>()});
            }
            s.arcs.push_back(std::move(arc));
        }

        for (const json& d : j.at("demands")) {
            DemandEntry e;
            e.node = d.at("node").get<std::string>();
            e.day = d.at("day").get<int>();
            e.commodity = parse_commodity(d.at("commodity"), "demands");
            e.amount = d.at("amount").get<double>();
            s.demands.push_back(e);
        }
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("scenario: ") + e.what());
    }
    return s;
}

ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("scenario: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioSpec& s) {
    json j;
    j["schema_version"] = s.schemaVersion;
    j["name"] = s.name;
    j["description"] = s.description;
    j["missions"] = s.missionCount;
    j["cycle_length_days"] = s.cycleLengthDays;
    j["crew_count"] = s.crewCount;
    j["habitat_mass_kg"] = s.habitatMassKg;
    j["earth_node"] = s.earthNode;
    j["crew"] = json{{"mass_kg", s.crew.massKg}, {"consumption_kg_per_day", s.crew.consumptionKgPerDay}};
    j["vehicle"] = json{
        {"fleet_size", s.vehicle.fleetSize},
        {"isp_s", s.vehicle.ispSeconds},
        {"maintenance_fraction_per_flight", s.vehicle.maintenanceFractionPerFlight},
        {"sizing", json{{"c0", s.vehicle.sizing.c0}, {"c1", s.vehicle.sizing.c1}, {"c2", s.vehicle.sizing.c2}}},
        {"design_grid", json{{"payload_kg", json{{"min", s.vehicle.designGrid.payloadMinKg},
                                                 {"max", s.vehicle.designGrid.payloadMaxKg},
                                                 {"steps", s.vehicle.designGrid.payloadSteps}}},
                             {"propellant_kg", json{{"min", s.vehicle.designGrid.propellantMinKg},
                                                    {"max", s.vehicle.designGrid.propellantMaxKg},
                                                    {"steps", s.vehicle.designGrid.propellantSteps}}}}}};
    j["isru"] = json{{"node", s.isru.node},
                     {"production_rate_per_year", dump_distribution(s.isru.productionRate)},
                     {"decay_rate_pct_per_year", dump_distribution(s.isru.decayRatePct)},
                     {"deploy_cap_kg", s.isru.deployCapKg},
                     {"maintenance_fraction_per_year", s.isru.maintenanceFractionPerYear},
                     {"electrolysis_loss_factor", s.isru.electrolysisLossFactor}};
    j["nodes"] = json::array();
    for (const NodeSpec& n : s.nodes) {
        json jn{{"id", n.id}, {"allow_dwell", n.allowDwell}};
        json supply = json::array();
        for (Commodity c : n.infiniteSupply) supply.push_back(commodity_name(c));
        jn["infinite_supply"] = supply;
        j["nodes"].push_back(jn);
    }
    j["arcs"] = json::array();
    for (const ArcSpec& a : s.arcs) {
        json ja{{"from", a.from},
                {"to", a.to},
                {"delta_v_mps", a.deltaVMps},
                {"tof_days", a.tofDays},
                {"kind", a.kind == ArcKind::Holdover ? "holdover" : "transport"}};
        json windows = json::array();
        for (const Window& w : a.windows) windows.push_back(json::array({w.startDay, w.endDay}));
        ja["windows"] = windows;
        j["arcs"].push_back(ja);
    }
    j["demands"] = json::array();
    for (const DemandEntry& d : s.demands)
        j["demands"].push_back(json{{"node", d.node},
                                    {"day", d.day},
                                    {"commodity", commodity_name(d.commodity)},
                                    {"amount", d.amount}});
    return j.dump(2) + "\n";
}

void save_scenario(const ScenarioSpec& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("scenario: cannot write " + path);
    out << serialize_scenario(scenario);
}

std::uint64_t scenario_hash(const ScenarioSpec& scenario) {
    const std::string text = serialize_scenario(scenario);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace campopt
