#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "campopt/milp/branch_and_bound.hpp"
#include "campopt/rl.hpp"
#include "campopt/scenario.hpp"
#include "campopt/scheduler.hpp"
#include "campopt/vfa.hpp"

namespace campopt {

// ---------------------------------------------------------------------------
// Stochastic parameters
// ---------------------------------------------------------------------------

// Draws the campaign's stochastic parameters for one episode: the plant
// production rate and the plant decay rate, each normal with the configured
// mean/sd and redrawn while negative (zero-truncated). Decay is configured in
// percent per year and returned as a fraction per year. sd == 0 yields the
// mean exactly. The draw order is production first, then decay, so a seeded
// generator reproduces the same parameter sequence.
StochasticParams sample_q(const IsruSpec& isru, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Baseline cost
// ---------------------------------------------------------------------------

// Optimal single-mission cost with no plant deployment, no carryover, and the
// vehicle design co-optimized over the scenario's grid without any downstream
// value term. This is the normalizer of every reward and the substitute cost
// of failed missions. Memoized on (scenario content hash, solve limits);
// throws std::runtime_error when the baseline mission is infeasible, because
// no campaign quantity is defined without it.
double compute_baseline(const ScenarioSpec& scenario, const milp::SolveLimits& limits = {});

// ---------------------------------------------------------------------------
// Reward
// ---------------------------------------------------------------------------

// Reward earned at mission tau (1-based) of a gamma-mission campaign.
//   - mission tau infeasible: sum_{k<tau} (base - costs[k-1]) / base - 1,
//     and the episode terminates (costs needs tau-1 leading entries);
//   - tau == gamma and feasible: sum_{k<=gamma} (base - costs[k-1]) / base
//     (costs needs gamma entries);
//   - otherwise: 0.
// Throws std::domain_error when baseCost <= 0 and std::invalid_argument on a
// tau outside [1, gamma] or too few cost entries.
double reward(const std::vector<double>& costs, double baseCost, int tau, int gamma,
              bool feasibleAtTau);

// Total campaign cost: the observed per-mission costs, plus one baseline cost
// for each of missions terminatedAt..gamma when the episode ended early at
// mission terminatedAt. feasibleCosts must hold gamma entries when the
// episode completed, terminatedAt-1 entries otherwise.
double episode_total_cost(const std::vector<double>& feasibleCosts,
                          std::optional<int> terminatedAt, int gamma, double baseCost);

// ---------------------------------------------------------------------------
// Campaign state encoding
// ---------------------------------------------------------------------------

// Dimension of the deployment agent's observation: mission progress, one
// deployment-history slot per mission, the two stochastic parameters, and the
// two design coordinates.
int state_dimension(const ScenarioSpec& scenario);

// Encodes the campaign state as the agent observation. Every component is
// normalized by a scenario-derived scale (horizon, deployment cap, parameter
// means, design-grid maxima) so the untouched initial state maps to the zero
// vector exactly and trained policies transfer across unit choices.
std::vector<double> state_vector(const CampaignState& state, const ScenarioSpec& scenario);

// ---------------------------------------------------------------------------
// State transition
// ---------------------------------------------------------------------------

// Advances the campaign state across one flown mission: appends the delivered
// deployment, reveals the true stochastic parameters, fixes the design chosen
// at mission one, carries inventories forward as (undrawn credit + leftover
// stock), banks the propellant produced by the plant fleet over one cycle at
// the plant node, and decays the plant fleet. The newly delivered plant both
// produces and decays for the full cycle it lands in, matching how its
// maintenance is charged.
CampaignState advance_state(const CampaignState& state, double deliveredKg,
                            const MissionOutcome& outcome, const StochasticParams& trueQ,
                            const ScenarioSpec& scenario);

// ---------------------------------------------------------------------------
// Episode rollout
// ---------------------------------------------------------------------------

// The two cooperating agents: a deployment policy choosing how much plant
// mass each mission carries, and a linear value estimate of the campaign cost
// downstream of the vehicle design chosen at mission one.
struct HrlAgents {
    rl::AgentState deployment;
    VfaParameters design;
};

struct MissionRecord {
    int mission = 0;      // 1-based
    double actionKg = 0.0; // commanded deployment
    double costJ = 0.0;    // launched mass (kg); 0 when infeasible
    double reward = 0.0;
    bool feasible = false;
};

struct EpisodeLog {
    int episode = 0;
    StochasticParams q{};
    VehicleDesign design{};
    std::vector<MissionRecord> missions;
    std::optional<int> terminatedEarlyAt; // mission that failed, when any
    double totalCost = 0.0;               // baseline-substituted when terminated
    double finalReward = 0.0;             // reward of the last mission played
    double designCostToGo = 0.0;          // cost of missions 2.. fed to the value fit
};

struct EpisodeOptions {
    bool explore = false;   // exploration noise on the deployment action
    bool updateRl = false;  // one policy update per stored transition
    bool updateVfa = false; // one value-fit update at episode end
    int batchSize = 64;
    // Per-mission deployment override for experiments; entries are clipped to
    // the action range. Missions beyond the vector fall back to the policy.
    const std::vector<double>* forcedActions = nullptr;
};

// Plays one full campaign under one parameter draw: mission one chooses the
// design (value term included) from a zeroed design state, later missions
// schedule against the fixed design with the revealed parameters, every
// decision is pushed to the replay buffer, and an infeasible mission ends the
// episode with baseline costs substituted for the unflown remainder. A solver
// time-out without an incumbent counts as infeasible.
EpisodeLog run_episode(HrlAgents& agents, rl::ReplayBuffer& buffer, const ScenarioSpec& scenario,
                       const StochasticParams& q, double baseCost,
                       const milp::SolveLimits& limits, std::mt19937_64& rng,
                       const EpisodeOptions& options = {});

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct CampaignConfig {
    int episodes = 700;          // M
    int rlWarmupEpisodes = 100;  // n1: policy updates start after this episode
    int vfaWarmupEpisodes = 300; // n2: value-fit updates start after this episode
    int batchSize = 64;
    std::size_t bufferCapacity = 1500;
    std::uint64_t seed = 1;
    // stateDim and the action range are derived from the scenario; the other
    // hyperparameters are taken as given.
    rl::Td3Config td3;
    milp::SolveLimits limits;
};

struct TrainResult {
    HrlAgents agents;
    std::vector<EpisodeLog> episodes;
    double baseCost = 0.0;
    // Final generator states (stream order: parameter draws, agent noise),
    // captured so a checkpoint records exactly where randomness stopped.
    std::string qStreamState;
    std::string agentStreamState;
};

// Runs config.episodes training episodes with fresh agents. Episode e draws
// its parameters, rolls out, and updates the deployment policy when e >
// rlWarmupEpisodes and the value fit when e > vfaWarmupEpisodes. Deterministic:
// the same scenario, config, and seed reproduce bit-identical logs. Throws
// std::invalid_argument on a non-positive deployment cap or horizon, or when
// episodes < max(rlWarmupEpisodes, vfaWarmupEpisodes).
TrainResult train(const ScenarioSpec& scenario, const CampaignConfig& config);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct CaseResult {
    int caseIndex = 0;
    StochasticParams q{};
    double totalCost = 0.0; // baseline-substituted when infeasible
    bool infeasible = false;
    std::optional<int> terminatedEarlyAt;
    std::vector<double> deploymentsKg; // delivered plant mass per mission
};

struct EvalReport {
    int nCases = 0;
    int missionHorizon = 0;
    // Mission one is decided before the stochastic parameters are observable,
    // so its design, deployment, and cost are computed once and shared by
    // every case.
    VehicleDesign design{};
    double firstDeploymentKg = 0.0;
    double firstMissionCostJ = 0.0;
    bool firstMissionFeasible = false;
    std::vector<CaseResult> cases; // ordered by caseIndex
    double meanCost = 0.0;
    double sdCost = 0.0; // sample standard deviation; 0 for a single case
    double minCost = 0.0;
    double maxCost = 0.0;
};

// Frozen-policy test protocol: draws nCases parameter vectors from the seed,
// solves mission one once, then rolls each case forward mission by mission
// under its own parameters without exploration or learning. Infeasible cases
// keep the baseline substitution so the mean stays defined, and are flagged.
EvalReport evaluate(const HrlAgents& agents, const ScenarioSpec& scenario, int nCases,
                    std::uint64_t seed, const milp::SolveLimits& limits = {});

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

// Versioned snapshot of a training run: both agents, the baseline, and the
// generator states, stamped with the scenario it belongs to.
struct Checkpoint {
    int version = 1;
    std::string scenarioName;
    std::uint64_t scenarioHash = 0;
    double baseCost = 0.0;
    int episodesCompleted = 0;
    HrlAgents agents;
    std::string qStreamState;
    std::string agentStreamState;
};

Checkpoint make_checkpoint(const TrainResult& result, const ScenarioSpec& scenario);

// JSON round-trip is exact: every weight, fit coefficient, and generator
// state is restored bit for bit. Loading rejects unknown versions with
// std::runtime_error.
std::string checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// ---------------------------------------------------------------------------
// Log export
// ---------------------------------------------------------------------------

// Training log, one row per mission. Columns:
//   episode, mission, production_rate, decay_fraction, payload_capacity_kg,
//   propellant_capacity_kg, action_kg, feasible, cost_t, reward,
//   episode_total_cost_t, terminated_early_at
// Costs are reported in metric tons (1 t = 1000 kg of launched mass);
// terminated_early_at is empty for completed episodes.
void write_training_csv(std::ostream& out, const std::vector<EpisodeLog>& episodes);

// Evaluation log, one row per case. Columns:
//   case, production_rate, decay_fraction, infeasible, terminated_early_at,
//   total_cost_t, deploy_kg_1 .. deploy_kg_<missions>
void write_eval_csv(std::ostream& out, const EvalReport& report);

} // namespace campopt
