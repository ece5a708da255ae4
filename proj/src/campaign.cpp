#include "campopt/campaign.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "campopt/commodities.hpp"
#include "campopt/scenario_io.hpp"
#include "campopt/sizing.hpp"

namespace campopt {

namespace {

using nlohmann::json;

// Shortest exact decimal representation; locale-independent, so logs are
// byte-stable across runs and machines.
std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32), stream};
    return std::mt19937_64(seq);
}

std::string rng_state_string(const std::mt19937_64& rng) {
    std::ostringstream out;
    out << rng;
    return out.str();
}

} // namespace

StochasticParams sample_q(const IsruSpec& isru, std::mt19937_64& rng) {
    const auto draw = [&rng](const Distribution& d) {
        if (d.sd <= 0.0) return std::max(0.0, d.mean);
        std::normal_distribution<double> normal(d.mean, d.sd);
        double v = normal(rng);
        while (v < 0.0) v = normal(rng);
        return v;
    };
    StochasticParams q;
    q.productionRatePerYear = draw(isru.productionRate);
    q.decayFractionPerYear = draw(isru.decayRatePct) / 100.0;
    return q;
}

double compute_baseline(const ScenarioSpec& scenario, const milp::SolveLimits& limits) {
    using Key = std::tuple<std::uint64_t, double, double, double, double>;
    static std::mutex cacheMutex;
    static std::map<Key, double> cache;

    const Key key{scenario_hash(scenario), limits.timeLimitSec, limits.gapTol, limits.intTol,
                  limits.feasTol};
    {
        std::lock_guard<std::mutex> lock(cacheMutex);
        const auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }

    const CampaignState fresh{};
    const auto grid = make_design_grid(scenario.vehicle.designGrid, scenario.vehicle.sizing);
    MissionProblem problem =
        assemble_first_mission(fresh, 0.0, scenario, grid, make_vfa_parameters());
    const MissionOutcome out = decode(problem, milp::solve_milp(problem.model, limits));
    if (!out.feasible)
        throw std::runtime_error("baseline mission is infeasible for scenario '" + scenario.name +
                                 "': no campaign reward is defined");

    std::lock_guard<std::mutex> lock(cacheMutex);
    cache[key] = out.costJ;
    return out.costJ;
}

double reward(const std::vector<double>& costs, double baseCost, int tau, int gamma,
              bool feasibleAtTau) {
    if (!(baseCost > 0.0)) throw std::domain_error("reward: baseline cost must be positive");
    if (gamma < 1 || tau < 1 || tau > gamma)
        throw std::invalid_argument("reward: mission index outside the campaign horizon");

    if (!feasibleAtTau) {
        if (static_cast<int>(costs.size()) < tau - 1)
            throw std::invalid_argument("reward: fewer cost entries than flown missions");
        double r = -1.0;
        for (int k = 0; k < tau - 1; ++k) r += (baseCost - costs[k]) / baseCost;
        return r;
    }
    if (tau < gamma) return 0.0;
    if (static_cast<int>(costs.size()) < gamma)
        throw std::invalid_argument("reward: fewer cost entries than the campaign horizon");
    double r = 0.0;
    for (int k = 0; k < gamma; ++k) r += (baseCost - costs[k]) / baseCost;
    return r;
}

double episode_total_cost(const std::vector<double>& feasibleCosts,
                          std::optional<int> terminatedAt, int gamma, double baseCost) {
    if (gamma < 1) throw std::invalid_argument("episode_total_cost: horizon must be positive");
    if (terminatedAt && (*terminatedAt < 1 || *terminatedAt > gamma))
        throw std::invalid_argument("episode_total_cost: termination outside the horizon");
    const int flown = terminatedAt ? *terminatedAt - 1 : gamma;
    if (static_cast<int>(feasibleCosts.size()) < flown)
        throw std::invalid_argument("episode_total_cost: fewer cost entries than flown missions");

    double total = 0.0;
    for (int k = 0; k < flown; ++k) total += feasibleCosts[k];
    if (terminatedAt) total += static_cast<double>(gamma - *terminatedAt + 1) * baseCost;
    return total;
}

int state_dimension(const ScenarioSpec& scenario) { return scenario.missionCount + 5; }

std::vector<double> state_vector(const CampaignState& state, const ScenarioSpec& scenario) {
    const int gamma = scenario.missionCount;
    if (gamma < 1) throw std::invalid_argument("state_vector: scenario horizon must be positive");

    std::vector<double> x(static_cast<std::size_t>(gamma) + 5, 0.0);
    x[0] = static_cast<double>(state.missionIndex) / gamma;

    const double capScale = scenario.isru.deployCapKg > 0.0 ? scenario.isru.deployCapKg : 1.0;
    const std::size_t slots = std::min(state.deployedIsruKg.size(), static_cast<std::size_t>(gamma));
    for (std::size_t i = 0; i < slots; ++i) x[1 + i] = state.deployedIsruKg[i] / capScale;

    const double prodScale =
        scenario.isru.productionRate.mean > 0.0 ? scenario.isru.productionRate.mean : 1.0;
    const double decayScale =
        scenario.isru.decayRatePct.mean > 0.0 ? scenario.isru.decayRatePct.mean / 100.0 : 1.0;
    x[gamma + 1] = state.observedQ.productionRatePerYear / prodScale;
    x[gamma + 2] = state.observedQ.decayFractionPerYear / decayScale;

    const auto& grid = scenario.vehicle.designGrid;
    const double payScale = grid.payloadMaxKg > 0.0 ? grid.payloadMaxKg : 1.0;
    const double propScale = grid.propellantMaxKg > 0.0 ? grid.propellantMaxKg : 1.0;
    x[gamma + 3] = state.design.payloadCapacityKg / payScale;
    x[gamma + 4] = state.design.propellantCapacityKg / propScale;
    return x;
}

CampaignState advance_state(const CampaignState& state, double deliveredKg,
                            const MissionOutcome& outcome, const StochasticParams& trueQ,
                            const ScenarioSpec& scenario) {
    if (!outcome.feasible)
        throw std::invalid_argument("advance_state: cannot advance across an infeasible mission");
    if (deliveredKg < 0.0)
        throw std::invalid_argument("advance_state: delivered plant mass must be nonnegative");

    CampaignState next;
    next.missionIndex = state.missionIndex + 1;
    next.deployedIsruKg = state.deployedIsruKg;
    next.deployedIsruKg.push_back(deliveredKg);
    next.observedQ = trueQ;
    next.design = state.missionIndex == 0 ? outcome.chosenDesign : state.design;

    // Undrawn credits stay banked; add what the mission left behind.
    std::map<std::string, CommodityVector> inv;
    const int plantIdx = index_of(Commodity::IsruPlant);
    for (const auto& [node, credit] : state.inventory) {
        const auto drawIt = outcome.inventoryDraw.find(node);
        for (int c = 0; c < kCommodityCount; ++c) {
            const double drawn =
                drawIt != outcome.inventoryDraw.end() ? drawIt->second[c] : 0.0;
            const double left = credit[c] - drawn;
            if (left > 1e-9) inv[node][c] += left;
        }
    }
    double strayPlantKg = 0.0;
    for (const auto& [node, rem] : outcome.endState) {
        for (int c = 0; c < kCommodityCount; ++c) {
            if (rem[c] <= 1e-9) continue;
            if (c == plantIdx) {
                // Plant mass is tracked analytically, never as inventory. A
                // stray unit at the plant node joins the fleet at cycle end
                // (it produced nothing on the way); anywhere else it is
                // stranded without a site to operate at and is written off.
                if (node == scenario.isru.node) strayPlantKg += rem[c];
                continue;
            }
            inv[node][c] += rem[c];
        }
    }

    const double cycleYears = scenario.cycleLengthDays / 365.0;
    const double fleetKg = state.plantMassKg + deliveredKg;
    if (!scenario.isru.node.empty() && fleetKg > 0.0) {
        const double producedKg = fleetKg * trueQ.productionRatePerYear * cycleYears *
                                  scenario.isru.electrolysisLossFactor;
        if (producedKg > 0.0) inv[scenario.isru.node][index_of(Commodity::Propellant)] += producedKg;
    }
    next.plantMassKg =
        fleetKg * std::pow(std::max(0.0, 1.0 - trueQ.decayFractionPerYear), cycleYears) +
        strayPlantKg;

    for (auto& [node, vec] : inv) {
        bool any = false;
        for (int c = 0; c < kCommodityCount; ++c) {
            if (vec[c] <= 1e-9) vec[c] = 0.0;
            else any = true;
        }
        if (any) next.inventory[node] = vec;
    }
    return next;
}

namespace {

struct MissionStep {
    MissionProblem problem;
    MissionOutcome outcome;
};

// Assembles and solves mission missionIndex+1 of the campaign: a design-grid
// model with the value term at mission one, a fixed-design model afterwards.
MissionStep solve_mission_step(const CampaignState& state, double actionKg,
                               const ScenarioSpec& scenario, const VfaParameters& designValue,
                               const milp::SolveLimits& limits) {
    MissionStep step;
    if (state.missionIndex == 0) {
        const auto grid = make_design_grid(scenario.vehicle.designGrid, scenario.vehicle.sizing);
        step.problem = assemble_first_mission(state, actionKg, scenario, grid, designValue);
    } else {
        step.problem = assemble_mission(state, actionKg, scenario, state.design, state.observedQ);
    }
    step.outcome = decode(step.problem, milp::solve_milp(step.problem.model, limits));
    return step;
}

} // namespace

EpisodeLog run_episode(HrlAgents& agents, rl::ReplayBuffer& buffer, const ScenarioSpec& scenario,
                       const StochasticParams& q, double baseCost,
                       const milp::SolveLimits& limits, std::mt19937_64& rng,
                       const EpisodeOptions& options) {
    const int gamma = scenario.missionCount;
    if (gamma < 1) throw std::invalid_argument("run_episode: scenario horizon must be positive");
    if (!(baseCost > 0.0)) throw std::domain_error("run_episode: baseline cost must be positive");

    EpisodeLog log;
    log.q = q;
    CampaignState state{}; // nothing flown, nothing observed, no design
    std::vector<double> feasibleCosts;
    const rl::Td3Config& cfg = agents.deployment.config;

    for (int tau = 1; tau <= gamma; ++tau) {
        const std::vector<double> obs = state_vector(state, scenario);
        double action;
        if (options.forcedActions && tau <= static_cast<int>(options.forcedActions->size())) {
            action = std::clamp((*options.forcedActions)[tau - 1], cfg.actionLow, cfg.actionHigh);
        } else {
            action = rl::select_action(agents.deployment, obs, options.explore, rng);
        }

        const MissionStep step = solve_mission_step(state, action, scenario, agents.design, limits);
        const bool feasible = step.outcome.feasible;

        MissionRecord rec;
        rec.mission = tau;
        rec.actionKg = action;
        rec.feasible = feasible;
        if (feasible) {
            rec.costJ = step.outcome.costJ;
            feasibleCosts.push_back(rec.costJ);
            if (tau == 1) log.design = step.outcome.chosenDesign;
        }
        rec.reward = reward(feasibleCosts, baseCost, tau, gamma, feasible);

        CampaignState nextState;
        if (feasible) nextState = advance_state(state, action, step.outcome, q, scenario);

        rl::Transition t;
        t.state = obs;
        t.action = action;
        t.reward = rec.reward;
        t.terminal = !feasible || tau == gamma;
        t.nextState = feasible ? state_vector(nextState, scenario)
                               : std::vector<double>(obs.size(), 0.0);
        buffer.push(std::move(t));
        if (options.updateRl && buffer.size() >= static_cast<std::size_t>(options.batchSize))
            rl::td3_update(agents.deployment, buffer, options.batchSize, rng);

        log.missions.push_back(rec);
        log.finalReward = rec.reward;
        if (!feasible) {
            log.terminatedEarlyAt = tau;
            break;
        }
        state = std::move(nextState);
    }

    log.totalCost = episode_total_cost(feasibleCosts, log.terminatedEarlyAt, gamma, baseCost);

    // The design fit learns the cost of everything downstream of mission one,
    // which is exactly what mission one's selection trades off against. No
    // design exists when mission one itself failed.
    if (!log.terminatedEarlyAt || *log.terminatedEarlyAt > 1) {
        log.designCostToGo = log.totalCost - feasibleCosts.front();
        if (options.updateVfa)
            agents.design = rls_update(agents.design, log.design, log.designCostToGo);
    }
    return log;
}

TrainResult train(const ScenarioSpec& scenario, const CampaignConfig& config) {
    if (scenario.missionCount < 1)
        throw std::invalid_argument("train: scenario horizon must be positive");
    if (scenario.isru.deployCapKg <= 0.0)
        throw std::invalid_argument("train: deployment cap must be positive");
    if (config.episodes < std::max(config.rlWarmupEpisodes, config.vfaWarmupEpisodes))
        throw std::invalid_argument("train: episode budget smaller than the warm-up");
    if (config.batchSize < 1) throw std::invalid_argument("train: batch size must be positive");
    if (config.bufferCapacity < static_cast<std::size_t>(config.batchSize))
        throw std::invalid_argument("train: replay buffer smaller than one batch");

    TrainResult result;
    result.baseCost = compute_baseline(scenario, config.limits);

    rl::Td3Config td3 = config.td3;
    td3.stateDim = state_dimension(scenario);
    td3.actionLow = 0.0;
    td3.actionHigh = scenario.isru.deployCapKg;

    // Independent streams so the parameter sequence of episode e never shifts
    // with how much noise or how many updates earlier episodes consumed.
    std::mt19937_64 initRng = make_stream(config.seed, 0);
    std::mt19937_64 qRng = make_stream(config.seed, 1);
    std::mt19937_64 agentRng = make_stream(config.seed, 2);

    result.agents.deployment = rl::make_agent(td3, initRng);
    result.agents.design = make_vfa_parameters();
    rl::ReplayBuffer buffer(config.bufferCapacity);

    result.episodes.reserve(static_cast<std::size_t>(config.episodes));
    for (int ep = 1; ep <= config.episodes; ++ep) {
        const StochasticParams q = sample_q(scenario.isru, qRng);
        EpisodeOptions opt;
        opt.explore = true;
        opt.updateRl = ep > config.rlWarmupEpisodes;
        opt.updateVfa = ep > config.vfaWarmupEpisodes;
        opt.batchSize = config.batchSize;
        EpisodeLog log = run_episode(result.agents, buffer, scenario, q, result.baseCost,
                                     config.limits, agentRng, opt);
        log.episode = ep;
        result.episodes.push_back(std::move(log));
    }
    result.qStreamState = rng_state_string(qRng);
    result.agentStreamState = rng_state_string(agentRng);
    return result;
}

EvalReport evaluate(const HrlAgents& agents, const ScenarioSpec& scenario, int nCases,
                    std::uint64_t seed, const milp::SolveLimits& limits) {
    const int gamma = scenario.missionCount;
    if (gamma < 1) throw std::invalid_argument("evaluate: scenario horizon must be positive");
    if (nCases < 1) throw std::invalid_argument("evaluate: need at least one case");

    EvalReport report;
    report.nCases = nCases;
    report.missionHorizon = gamma;
    const double baseCost = compute_baseline(scenario, limits);

    // The fixed case set: one draw per case, all from the seed.
    std::mt19937_64 qRng = make_stream(seed, 1);
    std::vector<StochasticParams> qs(static_cast<std::size_t>(nCases));
    for (auto& q : qs) q = sample_q(scenario.isru, qRng);

    // Deterministic rollouts never draw from this generator.
    std::mt19937_64 idle(0);

    // Mission one sees no case-specific information, so its decision, solve,
    // and cost are shared by construction.
    const CampaignState start{};
    const std::vector<double> startObs = state_vector(start, scenario);
    const double firstAction = rl::select_action(agents.deployment, startObs, false, idle);
    const MissionStep first = solve_mission_step(start, firstAction, scenario, agents.design, limits);

    report.firstDeploymentKg = firstAction;
    report.firstMissionFeasible = first.outcome.feasible;
    if (first.outcome.feasible) {
        report.design = first.outcome.chosenDesign;
        report.firstMissionCostJ = first.outcome.costJ;
    }

    report.cases.resize(static_cast<std::size_t>(nCases));
    for (int i = 0; i < nCases; ++i) {
        CaseResult& cr = report.cases[static_cast<std::size_t>(i)];
        cr.caseIndex = i;
        cr.q = qs[static_cast<std::size_t>(i)];
        if (!first.outcome.feasible) {
            cr.infeasible = true;
            cr.terminatedEarlyAt = 1;
            cr.totalCost = episode_total_cost({}, 1, gamma, baseCost);
            continue;
        }

        cr.deploymentsKg.push_back(firstAction);
        std::vector<double> costs{first.outcome.costJ};
        CampaignState state = advance_state(start, firstAction, first.outcome, cr.q, scenario);
        std::optional<int> term;
        for (int tau = 2; tau <= gamma; ++tau) {
            const std::vector<double> obs = state_vector(state, scenario);
            const double action = rl::select_action(agents.deployment, obs, false, idle);
            const MissionStep step =
                solve_mission_step(state, action, scenario, agents.design, limits);
            if (!step.outcome.feasible) {
                term = tau;
                break;
            }
            cr.deploymentsKg.push_back(action);
            costs.push_back(step.outcome.costJ);
            state = advance_state(state, action, step.outcome, cr.q, scenario);
        }
        cr.terminatedEarlyAt = term;
        cr.infeasible = term.has_value();
        cr.totalCost = episode_total_cost(costs, term, gamma, baseCost);
    }

    double sum = 0.0;
    report.minCost = report.cases.front().totalCost;
    report.maxCost = report.cases.front().totalCost;
    for (const CaseResult& cr : report.cases) {
        sum += cr.totalCost;
        report.minCost = std::min(report.minCost, cr.totalCost);
        report.maxCost = std::max(report.maxCost, cr.totalCost);
    }
    report.meanCost = sum / nCases;
    if (nCases > 1) {
        double ss = 0.0;
        for (const CaseResult& cr : report.cases) {
            const double d = cr.totalCost - report.meanCost;
            ss += d * d;
        }
        report.sdCost = std::sqrt(ss / (nCases - 1));
    }
    return report;
}

namespace {

json vfa_to_json(const VfaParameters& v) {
    return json{{"theta", v.theta},
                {"normal_matrix_inverse", v.Binv},
                {"feature_spec",
                 {{"payload_scale_kg", v.featureSpec.payloadScaleKg},
                  {"propellant_scale_kg", v.featureSpec.propellantScaleKg}}},
                {"update_count", v.updateCount}};
}

VfaParameters vfa_from_json(const json& j) {
    VfaParameters v;
    v.theta = j.at("theta").get<std::vector<double>>();
    v.Binv = j.at("normal_matrix_inverse").get<std::vector<std::vector<double>>>();
    v.featureSpec.payloadScaleKg = j.at("feature_spec").at("payload_scale_kg").get<double>();
    v.featureSpec.propellantScaleKg =
        j.at("feature_spec").at("propellant_scale_kg").get<double>();
    v.updateCount = j.at("update_count").get<long>();
    return v;
}

} // namespace

Checkpoint make_checkpoint(const TrainResult& result, const ScenarioSpec& scenario) {
    Checkpoint c;
    c.scenarioName = scenario.name;
    c.scenarioHash = scenario_hash(scenario);
    c.baseCost = result.baseCost;
    c.episodesCompleted = static_cast<int>(result.episodes.size());
    c.agents = result.agents;
    c.qStreamState = result.qStreamState;
    c.agentStreamState = result.agentStreamState;
    return c;
}

std::string checkpoint_to_json(const Checkpoint& checkpoint) {
    json j{{"format", "campaign-checkpoint"},
           {"version", checkpoint.version},
           {"scenario_name", checkpoint.scenarioName},
           {"scenario_hash", checkpoint.scenarioHash},
           {"base_cost", checkpoint.baseCost},
           {"episodes_completed", checkpoint.episodesCompleted},
           {"design_value_fit", vfa_to_json(checkpoint.agents.design)},
           {"deployment_agent", json::parse(rl::agent_to_json(checkpoint.agents.deployment))},
           {"rng",
            {{"parameter_stream", checkpoint.qStreamState},
             {"agent_stream", checkpoint.agentStreamState}}}};
    return j.dump(2) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("checkpoint: malformed JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "campaign-checkpoint")
            throw std::runtime_error("checkpoint: not a campaign checkpoint file");
        Checkpoint c;
        c.version = j.at("version").get<int>();
        if (c.version != 1)
            throw std::runtime_error("checkpoint: unsupported version " +
                                     std::to_string(c.version));
        c.scenarioName = j.at("scenario_name").get<std::string>();
        c.scenarioHash = j.at("scenario_hash").get<std::uint64_t>();
        c.baseCost = j.at("base_cost").get<double>();
        c.episodesCompleted = j.at("episodes_completed").get<int>();
        c.agents.design = vfa_from_json(j.at("design_value_fit"));
        c.agents.deployment = rl::agent_from_json(j.at("deployment_agent").dump());
        c.qStreamState = j.at("rng").at("parameter_stream").get<std::string>();
        c.agentStreamState = j.at("rng").at("agent_stream").get<std::string>();
        return c;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("checkpoint: missing or mistyped field: ") +
                                 e.what());
    }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    out << checkpoint_to_json(checkpoint);
    if (!out) throw std::runtime_error("checkpoint: write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return checkpoint_from_json(buf.str());
}

void write_training_csv(std::ostream& out, const std::vector<EpisodeLog>& episodes) {
    out << "episode,mission,production_rate,decay_fraction,payload_capacity_kg,"
           "propellant_capacity_kg,action_kg,feasible,cost_t,reward,episode_total_cost_t,"
           "terminated_early_at\n";
    for (const EpisodeLog& ep : episodes) {
        for (const MissionRecord& m : ep.missions) {
            out << ep.episode << ',' << m.mission << ',' << fmt(ep.q.productionRatePerYear) << ','
                << fmt(ep.q.decayFractionPerYear) << ',' << fmt(ep.design.payloadCapacityKg)
                << ',' << fmt(ep.design.propellantCapacityKg) << ',' << fmt(m.actionKg) << ','
                << (m.feasible ? 1 : 0) << ',' << fmt(m.costJ / 1000.0) << ',' << fmt(m.reward)
                << ',' << fmt(ep.totalCost / 1000.0) << ',';
            if (ep.terminatedEarlyAt) out << *ep.terminatedEarlyAt;
            out << '\n';
        }
    }
}

void write_eval_csv(std::ostream& out, const EvalReport& report) {
    out << "case,production_rate,decay_fraction,infeasible,terminated_early_at,total_cost_t";
    for (int m = 1; m <= report.missionHorizon; ++m) out << ",deploy_kg_" << m;
    out << '\n';
    for (const CaseResult& cr : report.cases) {
        out << cr.caseIndex << ',' << fmt(cr.q.productionRatePerYear) << ','
            << fmt(cr.q.decayFractionPerYear) << ',' << (cr.infeasible ? 1 : 0) << ',';
        if (cr.terminatedEarlyAt) out << *cr.terminatedEarlyAt;
        out << ',' << fmt(cr.totalCost / 1000.0);
        for (int m = 1; m <= report.missionHorizon; ++m) {
            out << ',';
            if (m <= static_cast<int>(cr.deploymentsKg.size()))
                out << fmt(cr.deploymentsKg[static_cast<std::size_t>(m - 1)]);
        }
        out << '\n';
    }
}

} // namespace campopt
