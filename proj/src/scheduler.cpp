#include "campopt/scheduler.hpp"

#include "campopt/milp/simplex.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace campopt {

namespace {

using milp::Sense;

std::string safe_token(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        unsigned char u = static_cast<unsigned char>(ch);
        out.push_back(std::isalnum(u) || ch == '_' || ch == '.' ? ch : '_');
    }
    return out;
}

std::string commodity_token(Commodity c) { return safe_token(commodity_name(c)); }

std::string arc_var_name(const ScenarioSpec& sc, const ExpandedArc& arc, Commodity c) {
    std::ostringstream os;
    if (arc.holdover) {
        os << "x(hold," << safe_token(sc.nodes[arc.fromNode].id) << ",t" << arc.departDay << "."
           << arc.arriveDay << "," << commodity_token(c) << ")";
    } else {
        os << "x(v" << arc.vehicle << "," << safe_token(sc.nodes[arc.fromNode].id) << "."
           << safe_token(sc.nodes[arc.toNode].id) << ",t" << arc.departDay << ","
           << commodity_token(c) << ")";
    }
    return os.str();
}

std::string arc_tag(const ScenarioSpec& sc, const ExpandedArc& arc) {
    std::ostringstream os;
    if (arc.holdover) {
        os << "hold," << safe_token(sc.nodes[arc.fromNode].id) << ",t" << arc.departDay << "."
           << arc.arriveDay;
    } else {
        os << "v" << arc.vehicle << "," << safe_token(sc.nodes[arc.fromNode].id) << "."
           << safe_token(sc.nodes[arc.toNode].id) << ",t" << arc.departDay;
    }
    return os.str();
}

double burn_fraction(const ArcSpec& arc, const ScenarioSpec& sc) {
    return 1.0 - 1.0 / mass_ratio(arc.deltaVMps, sc.vehicle.ispSeconds);
}

struct BalanceAccum {
    std::vector<milp::Term> terms;
    double rhs = 0.0;
    bool touched = false;
};

// The day the deployment demand lands: earliest transport arrival at the
// resource node, so delivery is forced onto a physically flyable leg.
int plant_arrival_day(const ScenarioSpec& sc, const TimeExpandedNetwork& net, int isruIdx) {
    int day = net.timeSteps.empty() ? 0 : net.timeSteps.front();
    bool found = false;
    for (const ExpandedArc& arc : net.arcs) {
        if (arc.holdover || arc.toNode != isruIdx) continue;
        if (!found || arc.arriveDay < day) {
            day = arc.arriveDay;
            found = true;
        }
    }
    (void)sc;
    return day;
}

MissionProblem assemble_core(const CampaignState& state, double actionAiKg,
                             const ScenarioSpec& scenario, const StochasticParams& q,
                             const VehicleDesign* fixedDesign,
                             const std::vector<VehicleDesign>* designGrid,
                             const VfaParameters* vfa) {
    if (actionAiKg < 0.0) throw std::invalid_argument("deployment action must be nonnegative");

    MissionProblem problem;
    problem.net = expand_network(scenario);
    problem.scenario = scenario;
    problem.state = state;
    problem.q = q;
    problem.actionAiKg = actionAiKg;

    const TimeExpandedNetwork& net = problem.net;
    const ScenarioSpec& sc = problem.scenario;
    milp::MilpModel& model = problem.model;
    const bool grid = designGrid != nullptr;
    const VehicleDesign zero{};
    const VehicleDesign& assemblyDesign = grid ? zero : *fixedDesign;

    const int nodeCount = static_cast<int>(sc.nodes.size());
    const int dayCount = static_cast<int>(net.timeSteps.size());
    std::map<int, int> dayIdx;
    for (int i = 0; i < dayCount; ++i) dayIdx[net.timeSteps[i]] = i;
    const int firstDay = dayCount > 0 ? net.timeSteps.front() : 0;

    const int earthIdx = sc.node_index(sc.earthNode);
    const int isruIdx = sc.node_index(sc.isru.node);
    if (isruIdx < 0 && (actionAiKg > 0.0 || state.plantMassKg > 0.0)) {
        throw std::invalid_argument("scenario has no resource node to deploy plant at");
    }

    // Earliest grid event at which each node is touched by any arc. Supplies
    // and carryover draws inject there: anything placed on an earlier day has
    // no arc to carry it forward and would silently vanish.
    std::vector<int> nodeFirstDay(static_cast<std::size_t>(nodeCount), -1);
    for (const ExpandedArc& arc : net.arcs) {
        int& tail = nodeFirstDay[static_cast<std::size_t>(arc.fromNode)];
        if (tail < 0 || arc.departDay < tail) tail = arc.departDay;
        int& head = nodeFirstDay[static_cast<std::size_t>(arc.toNode)];
        if (head < 0 || arc.arriveDay < head) head = arc.arriveDay;
    }

    double gridPayloadMax = 0.0, gridPropellantMax = 0.0, gridDryMax = 0.0;
    if (grid) {
        if (designGrid->empty()) throw std::invalid_argument("design grid is empty");
        problem.designGrid = *designGrid;
        for (const VehicleDesign& d : *designGrid) {
            gridPayloadMax = std::max(gridPayloadMax, d.payloadCapacityKg);
            gridPropellantMax = std::max(gridPropellantMax, d.propellantCapacityKg);
            gridDryMax = std::max(gridDryMax, d.dryMassKg);
        }
    } else {
        problem.fixedDesign = *fixedDesign;
    }

    // Per-arc inflow transforms at the design the rows are written against.
    // In grid mode that is the zero design: the dry-mass dependent entries
    // vanish and come back through the relay columns below.
    std::vector<ArcTransform> arcT(net.arcs.size());
    for (std::size_t a = 0; a < net.arcs.size(); ++a) {
        const ExpandedArc& arc = net.arcs[a];
        if (arc.holdover) {
            arcT[a] = holdover_transform(sc.nodes[arc.fromNode],
                                         static_cast<double>(arc.arriveDay - arc.departDay), q, sc);
        } else {
            arcT[a] = transport_transform(sc.arcs[arc.specIndex], assemblyDesign, sc);
        }
    }

    // Flow variables.
    problem.arcColumn.assign(net.arcs.size(), {-1, -1, -1, -1, -1, -1, -1, -1});
    problem.capacityColumn.assign(net.arcs.size(), {-1, -1, -1});
    for (std::size_t a = 0; a < net.arcs.size(); ++a) {
        const ExpandedArc& arc = net.arcs[a];
        for (int c = 0; c < kCommodityCount; ++c) {
            Commodity com = static_cast<Commodity>(c);
            // A commodity in bottomless supply at a node gains nothing from
            // dwelling there; the column would be a free unconstrained loop.
            if (arc.holdover && sc.nodes[arc.fromNode].has_infinite(com)) continue;
            double upper = milp::kInfinity;
            bool integral = false;
            if (com == Commodity::VehicleUnit) {
                upper = arc.holdover ? static_cast<double>(sc.vehicle.fleetSize) : 1.0;
                integral = true;
            } else if (com == Commodity::Crew) {
                integral = true;
            }
            std::string name = arc_var_name(sc, arc, com);
            int col = model.add_variable(name, 0.0, upper, integral);
            problem.arcColumn[a][c] = col;
            problem.decodingMap[name] = FlowVarRef{static_cast<int>(a), com};
        }
        if (grid && !arc.holdover) {
            std::string tag = arc_tag(sc, arc);
            problem.capacityColumn[a] = {
                model.add_variable("cap(pay," + tag + ")", 0.0, gridPayloadMax, false),
                model.add_variable("cap(prop," + tag + ")", 0.0, gridPropellantMax, false),
                model.add_variable("cap(dry," + tag + ")", 0.0, gridDryMax, false)};
        }
    }

    // Design selection binaries and their downstream-value objective terms.
    if (grid) {
        problem.designColumn.reserve(designGrid->size());
        problem.designValue.reserve(designGrid->size());
        for (std::size_t g = 0; g < designGrid->size(); ++g) {
            int col = model.add_variable("pick(g" + std::to_string(g) + ")", 0.0, 1.0, true);
            problem.designColumn.push_back(col);
            problem.designValue.push_back(predict(*vfa, (*designGrid)[g]));
            model.set_objective(col, problem.designValue.back());
        }
    }

    // Carryover draws: one bounded column per banked commodity. Nodes the
    // mission never touches keep their bank untouched (no draw column).
    for (const auto& [nodeId, amounts] : state.inventory) {
        int n = sc.node_index(nodeId);
        if (n < 0) throw std::invalid_argument("carryover inventory names unknown node " + nodeId);
        if (n == earthIdx) continue; // the Earth side replenishes itself
        if (nodeFirstDay[static_cast<std::size_t>(n)] < 0) continue;
        for (int c = 0; c < kCommodityCount; ++c) {
            if (amounts[c] <= 0.0) continue;
            Commodity com = static_cast<Commodity>(c);
            if (com == Commodity::IsruPlant) {
                throw std::invalid_argument("plant carryover is tracked by plantMassKg, not inventory");
            }
            if (!sc.nodes[n].allowDwell) {
                throw std::invalid_argument("carryover inventory at non-dwelling node " + nodeId);
            }
            int col = model.add_variable("draw(" + safe_token(nodeId) + "," + commodity_token(com) + ")",
                                         0.0, amounts[c], is_discrete(com));
            problem.drawColumn[{nodeId, c}] = col;
        }
    }

    // Mass-balance accumulation per (node, event, commodity):
    //   sum(outflows) - sum(transformed inflows) - draws <= supply - demand.
    std::vector<BalanceAccum> accum(static_cast<std::size_t>(nodeCount) * dayCount * kCommodityCount);
    auto at = [&](int n, int d, int c) -> BalanceAccum& {
        return accum[(static_cast<std::size_t>(n) * dayCount + d) * kCommodityCount + c];
    };

    for (const auto& [key, amounts] : net.nodeTimeDemand) {
        int d = dayIdx.at(key.second);
        for (int c = 0; c < kCommodityCount; ++c) {
            if (amounts[c] == 0.0) continue;
            BalanceAccum& row = at(key.first, d, c);
            row.rhs += amounts[c];
            row.touched = true;
        }
    }

    problem.plantArrivalDay = isruIdx >= 0 ? plant_arrival_day(sc, net, isruIdx) : firstDay;
    const double cycleYears = sc.cycleLengthDays / 365.0;
    problem.plantMaintenanceKg =
        sc.isru.maintenanceFractionPerYear * (state.plantMassKg + actionAiKg) * cycleYears;
    if (isruIdx >= 0 && dayCount > 0) {
        int d = dayIdx.at(problem.plantArrivalDay);
        if (actionAiKg > 0.0) {
            BalanceAccum& row = at(isruIdx, d, index_of(Commodity::IsruPlant));
            row.rhs -= actionAiKg;
            row.touched = true;
        }
        if (problem.plantMaintenanceKg > 0.0) {
            BalanceAccum& row = at(isruIdx, d, index_of(Commodity::MaintenanceMass));
            row.rhs -= problem.plantMaintenanceKg;
            row.touched = true;
        }
    }

    // Fleet refresh: vehicles parked away from Earth shrink what launches.
    double carried = 0.0;
    for (const auto& [nodeId, amounts] : state.inventory) {
        if (sc.node_index(nodeId) != earthIdx) carried += amounts[index_of(Commodity::VehicleUnit)];
    }
    double freshVehicles = std::max(0.0, sc.vehicle.fleetSize - carried);
    if (earthIdx >= 0 && freshVehicles > 0.0 && nodeFirstDay[static_cast<std::size_t>(earthIdx)] >= 0) {
        BalanceAccum& row = at(earthIdx, dayIdx.at(nodeFirstDay[static_cast<std::size_t>(earthIdx)]),
                               index_of(Commodity::VehicleUnit));
        row.rhs += freshVehicles;
        row.touched = true;
    }

    for (const auto& [key, col] : problem.drawColumn) {
        int n = sc.node_index(key.first);
        BalanceAccum& row = at(n, dayIdx.at(nodeFirstDay[static_cast<std::size_t>(n)]), key.second);
        row.terms.push_back({col, -1.0});
        row.touched = true;
    }

    for (std::size_t a = 0; a < net.arcs.size(); ++a) {
        const ExpandedArc& arc = net.arcs[a];
        int dTail = dayIdx.at(arc.departDay);
        int dHead = dayIdx.at(arc.arriveDay);
        for (int c = 0; c < kCommodityCount; ++c) {
            int col = problem.arcColumn[a][c];
            if (col < 0) continue;
            BalanceAccum& tail = at(arc.fromNode, dTail, c);
            tail.terms.push_back({col, 1.0});
            tail.touched = true;
        }
        for (int in = 0; in < kCommodityCount; ++in) {
            BalanceAccum& head = at(arc.toNode, dHead, in);
            for (int outc = 0; outc < kCommodityCount; ++outc) {
                int col = problem.arcColumn[a][outc];
                if (col < 0) continue;
                double coef = arcT[a].coefficient(static_cast<Commodity>(in), static_cast<Commodity>(outc));
                if (coef == 0.0) continue;
                head.terms.push_back({col, -coef});
                head.touched = true;
            }
        }
        if (grid && !arc.holdover) {
            // Dry-mass share of the burn and the per-flight maintenance are
            // zero under the zero design; reinstate them on the relay column.
            double f = burn_fraction(sc.arcs[arc.specIndex], sc);
            int zdry = problem.capacityColumn[a][2];
            if (f > 0.0) {
                BalanceAccum& head = at(arc.toNode, dHead, index_of(Commodity::Propellant));
                head.terms.push_back({zdry, f});
                head.touched = true;
            }
            if (sc.vehicle.maintenanceFractionPerFlight > 0.0) {
                BalanceAccum& head = at(arc.toNode, dHead, index_of(Commodity::MaintenanceMass));
                head.terms.push_back({zdry, sc.vehicle.maintenanceFractionPerFlight});
                head.touched = true;
            }
        }
    }

    for (int n = 0; n < nodeCount; ++n) {
        for (int d = 0; d < dayCount; ++d) {
            for (int c = 0; c < kCommodityCount; ++c) {
                Commodity com = static_cast<Commodity>(c);
                if (sc.nodes[n].has_infinite(com)) continue;
                BalanceAccum& row = at(n, d, c);
                if (!row.touched) continue;
                if (row.terms.empty() && row.rhs >= 0.0) continue;
                std::ostringstream os;
                os << "bal(" << safe_token(sc.nodes[n].id) << ",t" << net.timeSteps[d] << ","
                   << commodity_token(com) << ")";
                int r = model.add_row(os.str(), Sense::LessEqual, row.rhs);
                for (const milp::Term& t : row.terms) model.add_term(r, t.variable, t.coefficient);
            }
        }
    }

    // Per-arc concurrency rows. In grid mode the capacity and dry-mass
    // coefficients move onto the relay columns, exact once the vehicle
    // binaries are integer.
    for (std::size_t a = 0; a < net.arcs.size(); ++a) {
        const ExpandedArc& arc = net.arcs[a];
        ConcurrencyBlock block;
        if (arc.holdover) {
            block = holdover_concurrency(sc.nodes[arc.fromNode],
                                         static_cast<double>(arc.arriveDay - arc.departDay), sc);
        } else {
            block = transport_concurrency(sc.arcs[arc.specIndex], assemblyDesign, sc);
        }
        for (const ConcurrencyRow& row : block.rows) {
            int r = model.add_row("h(" + safe_token(row.label) + "," + arc_tag(sc, arc) + ")",
                                  Sense::LessEqual, 0.0);
            for (int c = 0; c < kCommodityCount; ++c) {
                int col = problem.arcColumn[a][c];
                if (col < 0 || row.coeffs[c] == 0.0) continue;
                model.add_term(r, col, row.coeffs[c]);
            }
            if (grid && !arc.holdover) {
                const auto& caps = problem.capacityColumn[a];
                if (row.label == "payload-capacity") {
                    model.add_term(r, caps[0], -1.0);
                } else if (row.label == "propellant-capacity") {
                    model.add_term(r, caps[1], -1.0);
                } else if (row.label == "burn-requirement") {
                    double f = burn_fraction(sc.arcs[arc.specIndex], sc);
                    if (f > 0.0) model.add_term(r, caps[2], f);
                } else if (row.label == "maintenance-requirement") {
                    if (sc.vehicle.maintenanceFractionPerFlight > 0.0) {
                        model.add_term(r, caps[2], sc.vehicle.maintenanceFractionPerFlight);
                    }
                }
            }
        }
    }

    // Relay linking: each capacity relay is capped by the selected design and
    // by the vehicle binary; the dry relay is forced up to the selected dry
    // mass whenever the vehicle flies.
    if (grid) {
        for (std::size_t a = 0; a < net.arcs.size(); ++a) {
            const ExpandedArc& arc = net.arcs[a];
            if (arc.holdover) continue;
            const auto& caps = problem.capacityColumn[a];
            int vu = problem.arcColumn[a][index_of(Commodity::VehicleUnit)];
            std::string tag = arc_tag(sc, arc);

            int r = model.add_row("link(pay.sel," + tag + ")", Sense::LessEqual, 0.0);
            model.add_term(r, caps[0], 1.0);
            for (std::size_t g = 0; g < designGrid->size(); ++g) {
                model.add_term(r, problem.designColumn[g], -(*designGrid)[g].payloadCapacityKg);
            }
            r = model.add_row("link(pay.veh," + tag + ")", Sense::LessEqual, 0.0);
            model.add_term(r, caps[0], 1.0);
            model.add_term(r, vu, -gridPayloadMax);

            r = model.add_row("link(prop.sel," + tag + ")", Sense::LessEqual, 0.0);
            model.add_term(r, caps[1], 1.0);
            for (std::size_t g = 0; g < designGrid->size(); ++g) {
                model.add_term(r, problem.designColumn[g], -(*designGrid)[g].propellantCapacityKg);
            }
            r = model.add_row("link(prop.veh," + tag + ")", Sense::LessEqual, 0.0);
            model.add_term(r, caps[1], 1.0);
            model.add_term(r, vu, -gridPropellantMax);

            // selected dry + dryMax * vu - zdry <= dryMax
            r = model.add_row("link(dry," + tag + ")", Sense::LessEqual, gridDryMax);
            for (std::size_t g = 0; g < designGrid->size(); ++g) {
                model.add_term(r, problem.designColumn[g], (*designGrid)[g].dryMassKg);
            }
            model.add_term(r, vu, gridDryMax);
            model.add_term(r, caps[2], -1.0);
        }

        int r = model.add_row("pick(one)", Sense::Equal, 1.0);
        for (int col : problem.designColumn) model.add_term(r, col, 1.0);
    }

    // Identical vehicles are interchangeable; ordering their binaries per
    // (arc, departure) slot removes the permutation copies from the search.
    {
        std::map<std::pair<int, int>, std::vector<std::pair<int, std::size_t>>> slots;
        for (std::size_t a = 0; a < net.arcs.size(); ++a) {
            const ExpandedArc& arc = net.arcs[a];
            if (arc.holdover) continue;
            slots[{arc.specIndex, arc.departDay}].push_back({arc.vehicle, a});
        }
        for (auto& [key, group] : slots) {
            std::sort(group.begin(), group.end());
            for (std::size_t i = 1; i < group.size(); ++i) {
                int prev = problem.arcColumn[group[i - 1].second][index_of(Commodity::VehicleUnit)];
                int cur = problem.arcColumn[group[i].second][index_of(Commodity::VehicleUnit)];
                std::ostringstream os;
                os << "sym(a" << key.first << ",t" << key.second << ",v" << group[i].first << ")";
                int r = model.add_row(os.str(), Sense::LessEqual, 0.0);
                model.add_term(r, cur, 1.0);
                model.add_term(r, prev, -1.0);
            }
        }
    }

    // Objective: mass leaving the Earth node on transport arcs.
    CommodityVector unitMass = mass_per_unit(assemblyDesign, sc);
    for (std::size_t a = 0; a < net.arcs.size(); ++a) {
        const ExpandedArc& arc = net.arcs[a];
        if (arc.holdover || arc.fromNode != earthIdx) continue;
        for (int c = 0; c < kCommodityCount; ++c) {
            int col = problem.arcColumn[a][c];
            if (col < 0) continue;
            if (static_cast<Commodity>(c) == Commodity::VehicleUnit) {
                if (grid) {
                    model.set_objective(problem.capacityColumn[a][2], 1.0);
                } else {
                    model.set_objective(col, problem.fixedDesign.dryMassKg);
                }
            } else if (unitMass[c] != 0.0) {
                model.set_objective(col, unitMass[c]);
            }
        }
    }

    model.set_name(sc.name.empty() ? "mission" : sc.name + ".mission");
    model.validate();
    return problem;
}

} // namespace

MissionProblem assemble_mission(const CampaignState& state, double actionAiKg,
                                const ScenarioSpec& scenario, const VehicleDesign& design,
                                const StochasticParams& q) {
    return assemble_core(state, actionAiKg, scenario, q, &design, nullptr, nullptr);
}

MissionProblem assemble_first_mission(const CampaignState& state, double actionAiKg,
                                      const ScenarioSpec& scenario,
                                      const std::vector<VehicleDesign>& designGrid,
                                      const VfaParameters& vfa) {
    if (designGrid.empty()) throw std::invalid_argument("design grid is empty");
    return assemble_core(state, actionAiKg, scenario, state.observedQ, nullptr, &designGrid, &vfa);
}

// With the integer decisions frozen at their solved values, re-optimize the
// continuous flows to use as little banked inventory as possible, then
// re-minimize launched mass with the draws pinned. The solve itself leaves
// the split between drawn credits and launched mass arbitrary wherever both
// cost the same, and the campaign level needs to know exactly how much of
// each bank survives; the second pass keeps the reported flows from drifting
// to a more expensive vertex of the draw-minimal face.
milp::MilpSolution minimize_draw_usage(const MissionProblem& problem, const milp::MilpSolution& sol) {
    std::vector<int> freeDraws; // draws of divisible commodities; vehicles and
                                // crews are integral and frozen with the rest
    for (const auto& [key, col] : problem.drawColumn) {
        if (!problem.model.variables()[static_cast<std::size_t>(col)].integral)
            freeDraws.push_back(col);
    }
    if (freeDraws.empty()) return sol;

    milp::MilpModel polished = problem.model;
    polished.set_name(problem.model.name() + ".drawmin");
    const std::vector<double> cost = polished.objective();
    // The incumbent satisfies the budget with equality, so the slack only has
    // to absorb solver arithmetic noise; anything larger would let the
    // refinement trade extra launched mass for a smaller draw.
    const int budget = polished.add_row("budget(objective)", Sense::LessEqual,
                                        sol.objective + 1e-7 * (1.0 + std::fabs(sol.objective)));
    for (int j = 0; j < polished.variable_count(); ++j) {
        if (cost[static_cast<std::size_t>(j)] != 0.0) {
            polished.add_term(budget, j, cost[static_cast<std::size_t>(j)]);
            polished.set_objective(j, -cost[static_cast<std::size_t>(j)]);
        }
        if (polished.variables()[static_cast<std::size_t>(j)].integral) {
            const double r = std::round(sol.primal[static_cast<std::size_t>(j)]);
            polished.tighten_bounds(j, r, r);
        }
    }
    for (int col : freeDraws) polished.set_objective(col, 1.0);
    const milp::MilpSolution drawMin = milp::solve_lp(polished);
    if (drawMin.status != milp::SolveStatus::Optimal)
        throw std::runtime_error("draw-usage refinement failed on a feasible mission (" +
                                 std::string(milp::status_name(drawMin.status)) + ")");

    // Second pass: pin every draw at its minimum and go back to minimizing
    // the original objective over the remaining flows.
    for (int col : freeDraws) {
        const double v = drawMin.primal[static_cast<std::size_t>(col)];
        const double pad = 1e-9 * (1.0 + std::fabs(v));
        polished.tighten_bounds(col, v - pad, v + pad);
        polished.set_objective(col, -1.0);
    }
    for (int j = 0; j < polished.variable_count(); ++j) {
        if (cost[static_cast<std::size_t>(j)] != 0.0)
            polished.set_objective(j, cost[static_cast<std::size_t>(j)]);
    }
    milp::MilpSolution refined = milp::solve_lp(polished);
    if (refined.status != milp::SolveStatus::Optimal)
        throw std::runtime_error("draw-usage refinement failed on a feasible mission (" +
                                 std::string(milp::status_name(refined.status)) + ")");
    refined.status = sol.status;
    refined.objective = sol.objective;
    refined.gap = sol.gap;
    return refined;
}

MissionOutcome decode(const MissionProblem& problem, const milp::MilpSolution& sol) {
    MissionOutcome out;
    out.status = sol.status;
    out.objectiveValue = sol.objective;
    out.optimalityGap = sol.gap;
    if (!sol.has_primal() ||
        (sol.status != milp::SolveStatus::Optimal && sol.status != milp::SolveStatus::FeasibleWithGap)) {
        return out;
    }

    const ScenarioSpec& sc = problem.scenario;
    const TimeExpandedNetwork& net = problem.net;
    const milp::MilpSolution use = minimize_draw_usage(problem, sol);
    const std::vector<double>& x = use.primal;
    constexpr double kTol = 1e-6;

    // Chosen design.
    if (problem.design_is_fixed()) {
        out.chosenDesign = problem.fixedDesign;
    } else {
        int chosen = -1;
        for (std::size_t g = 0; g < problem.designColumn.size(); ++g) {
            if (x[problem.designColumn[g]] > 0.5) {
                if (chosen >= 0) throw std::runtime_error("multiple design binaries selected");
                chosen = static_cast<int>(g);
            }
        }
        if (chosen < 0) throw std::runtime_error("no design binary selected");
        out.chosenDesign = problem.designGrid[chosen];
    }

    // Flow vectors per arc.
    std::vector<CommodityVector> flow(net.arcs.size(), zero_commodities());
    for (std::size_t a = 0; a < net.arcs.size(); ++a) {
        for (int c = 0; c < kCommodityCount; ++c) {
            int col = problem.arcColumn[a][c];
            if (col >= 0) flow[a][c] = x[col];
        }
    }

    double worst = 0.0;
    auto note = [&](double violation) { worst = std::max(worst, violation); };

    // Independent recheck, built from the scenario and the physical design
    // rather than from the assembled rows.
    const int nodeCount = static_cast<int>(sc.nodes.size());
    const int dayCount = static_cast<int>(net.timeSteps.size());
    std::map<int, int> dayIdx;
    for (int i = 0; i < dayCount; ++i) dayIdx[net.timeSteps[i]] = i;
    const int earthIdx = sc.node_index(sc.earthNode);

    // Supplies and draws enter at each node's first touched event, matching
    // the assembly rule.
    std::vector<int> nodeFirstDay(static_cast<std::size_t>(nodeCount), -1);
    for (const ExpandedArc& arc : net.arcs) {
        int& tail = nodeFirstDay[static_cast<std::size_t>(arc.fromNode)];
        if (tail < 0 || arc.departDay < tail) tail = arc.departDay;
        int& head = nodeFirstDay[static_cast<std::size_t>(arc.toNode)];
        if (head < 0 || arc.arriveDay < head) head = arc.arriveDay;
    }

    std::vector<double> lhs(static_cast<std::size_t>(nodeCount) * dayCount * kCommodityCount, 0.0);
    std::vector<double> rhs(lhs.size(), 0.0);
    auto idx = [&](int n, int d, int c) {
        return (static_cast<std::size_t>(n) * dayCount + d) * kCommodityCount + c;
    };

    for (const DemandEntry& dem : sc.demands) {
        int n = sc.node_index(dem.node);
        rhs[idx(n, dayIdx.at(dem.day), index_of(dem.commodity))] += dem.amount;
    }
    const int isruIdx = sc.node_index(sc.isru.node);
    if (isruIdx >= 0 && dayCount > 0) {
        int d = dayIdx.at(problem.plantArrivalDay);
        rhs[idx(isruIdx, d, index_of(Commodity::IsruPlant))] -= problem.actionAiKg;
        rhs[idx(isruIdx, d, index_of(Commodity::MaintenanceMass))] -= problem.plantMaintenanceKg;
    }
    double carried = 0.0;
    for (const auto& [nodeId, amounts] : problem.state.inventory) {
        if (sc.node_index(nodeId) != earthIdx) carried += amounts[index_of(Commodity::VehicleUnit)];
    }
    if (earthIdx >= 0 && nodeFirstDay[static_cast<std::size_t>(earthIdx)] >= 0) {
        rhs[idx(earthIdx, dayIdx.at(nodeFirstDay[static_cast<std::size_t>(earthIdx)]),
                index_of(Commodity::VehicleUnit))] += std::max(0.0, sc.vehicle.fleetSize - carried);
    }
    for (const auto& [key, col] : problem.drawColumn) {
        double v = x[col];
        int n = sc.node_index(key.first);
        lhs[idx(n, dayIdx.at(nodeFirstDay[static_cast<std::size_t>(n)]), key.second)] -= v;
        out.inventoryDraw[key.first][key.second] = v;
        double credit = problem.state.inventory.at(key.first)[key.second];
        note(v - credit);
        note(-v);
    }

    for (std::size_t a = 0; a < net.arcs.size(); ++a) {
        const ExpandedArc& arc = net.arcs[a];
        ArcTransform T;
        ConcurrencyBlock block;
        if (arc.holdover) {
            double dur = static_cast<double>(arc.arriveDay - arc.departDay);
            T = holdover_transform(sc.nodes[arc.fromNode], dur, problem.q, sc);
            block = holdover_concurrency(sc.nodes[arc.fromNode], dur, sc);
        } else {
            T = transport_transform(sc.arcs[arc.specIndex], out.chosenDesign, sc);
            block = transport_concurrency(sc.arcs[arc.specIndex], out.chosenDesign, sc);
        }
        CommodityVector arrived = T.apply(flow[a]);
        for (int c = 0; c < kCommodityCount; ++c) {
            lhs[idx(arc.fromNode, dayIdx.at(arc.departDay), c)] += flow[a][c];
            lhs[idx(arc.toNode, dayIdx.at(arc.arriveDay), c)] -= arrived[c];
        }
        for (const ConcurrencyRow& row : block.rows) {
            double v = 0.0;
            for (int c = 0; c < kCommodityCount; ++c) v += row.coeffs[c] * flow[a][c];
            note(v);
        }
        double vu = flow[a][index_of(Commodity::VehicleUnit)];
        double crewFlow = flow[a][index_of(Commodity::Crew)];
        note(-vu);
        note(vu - (arc.holdover ? static_cast<double>(sc.vehicle.fleetSize) : 1.0));
        note(std::abs(vu - std::round(vu)));
        note(std::abs(crewFlow - std::round(crewFlow)));

        for (int c = 0; c < kCommodityCount; ++c) {
            double v = flow[a][c];
            if (std::abs(v) <= 1e-9) continue;
            out.flows.push_back(FlowRecord{arc.vehicle, sc.nodes[arc.fromNode].id,
                                           sc.nodes[arc.toNode].id, arc.departDay, arc.arriveDay,
                                           arc.holdover, static_cast<Commodity>(c), v});
        }
    }

    for (int n = 0; n < nodeCount; ++n) {
        for (int d = 0; d < dayCount; ++d) {
            for (int c = 0; c < kCommodityCount; ++c) {
                if (sc.nodes[n].has_infinite(static_cast<Commodity>(c))) continue;
                note(lhs[idx(n, d, c)] - rhs[idx(n, d, c)]);
            }
        }
    }

    // What remains banked at each storage-capable node. The balance rows are
    // inequalities, so a unit that stops flowing shows up as slack at exactly
    // the one event where it was dropped and at no later event; summing the
    // slacks over all events therefore counts every leftover unit once, no
    // matter where along the schedule the solver left it.
    for (int n = 0; n < nodeCount; ++n) {
        if (n == earthIdx || !sc.nodes[n].allowDwell) continue;
        CommodityVector rem = zero_commodities();
        bool any = false;
        for (int c = 0; c < kCommodityCount; ++c) {
            if (sc.nodes[n].has_infinite(static_cast<Commodity>(c))) continue;
            for (int d = 0; d < dayCount; ++d) {
                rem[c] += std::max(0.0, rhs[idx(n, d, c)] - lhs[idx(n, d, c)]);
            }
            if (rem[c] > 1e-9) any = true;
            else rem[c] = 0.0;
        }
        if (any) out.endState[sc.nodes[n].id] = rem;
    }

    out.maxResidual = worst;
    if (worst > kTol) {
        std::ostringstream os;
        os << "decoded mission violates the flow recheck (residual " << worst << ")";
        throw std::runtime_error(os.str());
    }

    // Launched mass, valued at the physical design.
    CommodityVector unitMass = mass_per_unit(out.chosenDesign, sc);
    double cost = 0.0;
    for (std::size_t a = 0; a < net.arcs.size(); ++a) {
        const ExpandedArc& arc = net.arcs[a];
        if (arc.holdover || arc.fromNode != earthIdx) continue;
        for (int c = 0; c < kCommodityCount; ++c) cost += unitMass[c] * flow[a][c];
    }
    out.costJ = cost;
    out.feasible = true;
    return out;
}

} // namespace campopt
