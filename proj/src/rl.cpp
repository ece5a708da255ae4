#include "campopt/rl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include <json.hpp>

namespace campopt::rl {

namespace {

double clip(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

void check_dimension(const Mlp& net, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw std::invalid_argument("network input has dimension " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(net.input_dim()));
}

// State concatenated with the action rescaled to [0, 1]; the critics never
// see raw kilogram-scale deployments.
std::vector<double> critic_input(const Td3Config& cfg, const std::vector<double>& state,
                                 double action) {
    std::vector<double> in = state;
    in.push_back((action - cfg.actionLow) / (cfg.actionHigh - cfg.actionLow));
    return in;
}

} // namespace

Mlp make_mlp(const std::vector<int>& sizes, std::mt19937_64& rng) {
    if (sizes.size() < 2) throw std::invalid_argument("network needs at least input and output sizes");
    for (int s : sizes)
        if (s <= 0) throw std::invalid_argument("network layer sizes must be positive");
    Mlp net;
    net.sizes = sizes;
    net.weights.resize(sizes.size() - 1);
    net.biases.resize(sizes.size() - 1);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int fanIn = sizes[l];
        const int fanOut = sizes[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fanIn));
        std::uniform_real_distribution<double> dist(-bound, bound);
        net.weights[l].resize(static_cast<std::size_t>(fanOut) * fanIn);
        for (double& w : net.weights[l]) w = dist(rng);
        net.biases[l].resize(static_cast<std::size_t>(fanOut));
        for (double& b : net.biases[l]) b = dist(rng);
    }
    return net;
}

std::vector<double> forward(const Mlp& net, const std::vector<double>& x, MlpTape& tape) {
    check_dimension(net, x);
    tape.input = x;
    tape.preact.assign(net.layer_count(), {});
    tape.act.assign(net.layer_count(), {});
    const std::vector<double>* in = &tape.input;
    for (int l = 0; l < net.layer_count(); ++l) {
        const int fanIn = net.sizes[l];
        const int fanOut = net.sizes[l + 1];
        std::vector<double>& pre = tape.preact[l];
        pre.assign(static_cast<std::size_t>(fanOut), 0.0);
        for (int o = 0; o < fanOut; ++o) {
            double v = net.biases[l][static_cast<std::size_t>(o)];
            const double* row = net.weights[l].data() + static_cast<std::size_t>(o) * fanIn;
            for (int i = 0; i < fanIn; ++i) v += row[i] * (*in)[static_cast<std::size_t>(i)];
            pre[static_cast<std::size_t>(o)] = v;
        }
        std::vector<double>& act = tape.act[l];
        if (l + 1 == net.layer_count()) {
            act = pre; // linear output layer
        } else {
            act.resize(pre.size());
            for (std::size_t k = 0; k < pre.size(); ++k) act[k] = std::max(0.0, pre[k]);
        }
        in = &act;
    }
    return tape.act.back();
}

std::vector<double> forward(const Mlp& net, const std::vector<double>& x) {
    MlpTape tape;
    return forward(net, x, tape);
}

MlpGradients make_zero_gradients(const Mlp& net) {
    MlpGradients g;
    g.weights.resize(net.weights.size());
    g.biases.resize(net.biases.size());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        g.weights[l].assign(net.weights[l].size(), 0.0);
        g.biases[l].assign(net.biases[l].size(), 0.0);
    }
    g.input.assign(static_cast<std::size_t>(net.input_dim()), 0.0);
    return g;
}

void accumulate_gradients(const Mlp& net, const MlpTape& tape,
                          const std::vector<double>& upstream, MlpGradients& grad) {
    if (static_cast<int>(upstream.size()) != net.output_dim())
        throw std::invalid_argument("upstream gradient dimension does not match network output");
    std::vector<double> delta = upstream;
    for (int l = net.layer_count() - 1; l >= 0; --l) {
        const int fanIn = net.sizes[l];
        const int fanOut = net.sizes[l + 1];
        const std::vector<double>& in = l == 0 ? tape.input : tape.act[l - 1];
        for (int o = 0; o < fanOut; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            grad.biases[l][static_cast<std::size_t>(o)] += d;
            double* wrow = grad.weights[l].data() + static_cast<std::size_t>(o) * fanIn;
            for (int i = 0; i < fanIn; ++i) wrow[i] += d * in[static_cast<std::size_t>(i)];
        }
        std::vector<double> prev(static_cast<std::size_t>(fanIn), 0.0);
        for (int o = 0; o < fanOut; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            const double* row = net.weights[l].data() + static_cast<std::size_t>(o) * fanIn;
            for (int i = 0; i < fanIn; ++i) prev[static_cast<std::size_t>(i)] += d * row[i];
        }
        if (l > 0) {
            // Rectifier derivative of the previous hidden layer.
            for (int i = 0; i < fanIn; ++i)
                if (tape.preact[l - 1][static_cast<std::size_t>(i)] <= 0.0)
                    prev[static_cast<std::size_t>(i)] = 0.0;
        }
        delta = std::move(prev);
    }
    for (std::size_t i = 0; i < delta.size(); ++i) grad.input[i] += delta[i];
}

AdamState make_adam(const Mlp& net, double learningRate) {
    AdamState opt;
    opt.learningRate = learningRate;
    opt.weightM.resize(net.weights.size());
    opt.weightV.resize(net.weights.size());
    opt.biasM.resize(net.biases.size());
    opt.biasV.resize(net.biases.size());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        opt.weightM[l].assign(net.weights[l].size(), 0.0);
        opt.weightV[l].assign(net.weights[l].size(), 0.0);
        opt.biasM[l].assign(net.biases[l].size(), 0.0);
        opt.biasV[l].assign(net.biases[l].size(), 0.0);
    }
    return opt;
}

namespace {
void adam_update_span(std::vector<double>& param, std::vector<double>& m, std::vector<double>& v,
                      const std::vector<double>& g, const AdamState& opt, double correctM,
                      double correctV) {
    for (std::size_t k = 0; k < param.size(); ++k) {
        m[k] = opt.beta1 * m[k] + (1.0 - opt.beta1) * g[k];
        v[k] = opt.beta2 * v[k] + (1.0 - opt.beta2) * g[k] * g[k];
        const double mhat = m[k] / correctM;
        const double vhat = v[k] / correctV;
        param[k] -= opt.learningRate * mhat / (std::sqrt(vhat) + opt.epsilon);
    }
}
} // namespace

void adam_step(Mlp& net, AdamState& opt, const MlpGradients& grad) {
    ++opt.stepCount;
    const double correctM = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.stepCount));
    const double correctV = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.stepCount));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        adam_update_span(net.weights[l], opt.weightM[l], opt.weightV[l], grad.weights[l], opt,
                         correctM, correctV);
        adam_update_span(net.biases[l], opt.biasM[l], opt.biasV[l], grad.biases[l], opt,
                         correctM, correctV);
    }
}

void soft_update(Mlp& target, const Mlp& main, double tau) {
    // Blend form rather than increment form so tau == 1 copies exactly and
    // the target-to-main distance contracts by precisely (1 - tau) per call.
    for (std::size_t l = 0; l < main.weights.size(); ++l) {
        for (std::size_t k = 0; k < main.weights[l].size(); ++k)
            target.weights[l][k] = (1.0 - tau) * target.weights[l][k] + tau * main.weights[l][k];
        for (std::size_t k = 0; k < main.biases[l].size(); ++k)
            target.biases[l][k] = (1.0 - tau) * target.biases[l][k] + tau * main.biases[l][k];
    }
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
    items_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[next_] = std::move(t);
        next_ = (next_ + 1) % capacity_;
    }
}

const Transition& ReplayBuffer::sample(std::mt19937_64& rng) const {
    if (items_.empty()) throw std::out_of_range("cannot sample from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    return items_[pick(rng)];
}

Td3Config desk_td3_config(int stateDim, double actionLow, double actionHigh) {
    Td3Config cfg;
    cfg.stateDim = stateDim;
    cfg.actionLow = actionLow;
    cfg.actionHigh = actionHigh;
    cfg.hidden = {32, 32};
    return cfg;
}

AgentState make_agent(const Td3Config& config, std::mt19937_64& rng) {
    if (config.stateDim < 1) throw std::invalid_argument("agent state dimension must be positive");
    if (!(config.actionHigh > config.actionLow))
        throw std::invalid_argument("agent action range is empty");
    if (config.policyDelay < 1) throw std::invalid_argument("policy delay must be >= 1");
    AgentState agent;
    agent.config = config;
    std::vector<int> actorSizes{config.stateDim};
    actorSizes.insert(actorSizes.end(), config.hidden.begin(), config.hidden.end());
    actorSizes.push_back(1);
    std::vector<int> criticSizes{config.stateDim + 1};
    criticSizes.insert(criticSizes.end(), config.hidden.begin(), config.hidden.end());
    criticSizes.push_back(1);
    agent.actor = make_mlp(actorSizes, rng);
    agent.critic1 = make_mlp(criticSizes, rng);
    agent.critic2 = make_mlp(criticSizes, rng);
    agent.targetActor = agent.actor;
    agent.targetCritic1 = agent.critic1;
    agent.targetCritic2 = agent.critic2;
    agent.actorOpt = make_adam(agent.actor, config.learningRate);
    agent.critic1Opt = make_adam(agent.critic1, config.learningRate);
    agent.critic2Opt = make_adam(agent.critic2, config.learningRate);
    return agent;
}

double squash_action(const Td3Config& config, double raw) {
    return config.actionLow +
           (config.actionHigh - config.actionLow) * 0.5 * (1.0 + std::tanh(raw));
}

double select_action(const AgentState& agent, const std::vector<double>& state, bool explore,
                     std::mt19937_64& rng) {
    const double raw = forward(agent.actor, state)[0];
    double action = squash_action(agent.config, raw);
    if (explore) {
        const double half = 0.5 * (agent.config.actionHigh - agent.config.actionLow);
        std::normal_distribution<double> noise(0.0, agent.config.explorationStd * half);
        action += noise(rng);
    }
    return clip(action, agent.config.actionLow, agent.config.actionHigh);
}

double critic_value(const AgentState& agent, const std::vector<double>& state, double action) {
    return forward(agent.critic1, critic_input(agent.config, state, action))[0];
}

namespace {

// Bellman target with target-policy smoothing; noise == 0 gives the
// deterministic diagnostic target.
double bellman_target(const AgentState& agent, const Transition& t, double noise) {
    if (t.terminal) return t.reward;
    const Td3Config& cfg = agent.config;
    double next = squash_action(cfg, forward(agent.targetActor, t.nextState)[0]);
    next = clip(next + noise, cfg.actionLow, cfg.actionHigh);
    const std::vector<double> in = critic_input(cfg, t.nextState, next);
    const double q1 = forward(agent.targetCritic1, in)[0];
    const double q2 = forward(agent.targetCritic2, in)[0];
    return t.reward + cfg.gamma * std::min(q1, q2);
}

} // namespace

void td3_update(AgentState& agent, const ReplayBuffer& buffer, int batchSize,
                std::mt19937_64& rng) {
    if (batchSize < 1) throw std::invalid_argument("batch size must be positive");
    if (buffer.size() < static_cast<std::size_t>(batchSize))
        throw std::invalid_argument("replay buffer holds fewer items than the batch size");
    const Td3Config& cfg = agent.config;
    const double half = 0.5 * (cfg.actionHigh - cfg.actionLow);
    std::normal_distribution<double> smoothing(0.0, cfg.targetSmoothingStd * half);
    const double noiseClip = cfg.targetSmoothingClip * half;

    std::vector<const Transition*> batch;
    std::vector<double> targets;
    batch.reserve(static_cast<std::size_t>(batchSize));
    targets.reserve(static_cast<std::size_t>(batchSize));
    for (int k = 0; k < batchSize; ++k) {
        const Transition& t = buffer.sample(rng);
        batch.push_back(&t);
        const double noise =
            t.terminal ? 0.0 : clip(smoothing(rng), -noiseClip, noiseClip);
        targets.push_back(bellman_target(agent, t, noise));
    }

    const double invB = 1.0 / static_cast<double>(batchSize);
    for (Mlp* critic : {&agent.critic1, &agent.critic2}) {
        MlpGradients grad = make_zero_gradients(*critic);
        MlpTape tape;
        for (int k = 0; k < batchSize; ++k) {
            const Transition& t = *batch[static_cast<std::size_t>(k)];
            const double q =
                forward(*critic, critic_input(cfg, t.state, t.action), tape)[0];
            const double upstream =
                2.0 * (q - targets[static_cast<std::size_t>(k)]) * invB;
            accumulate_gradients(*critic, tape, {upstream}, grad);
        }
        adam_step(*critic, critic == &agent.critic1 ? agent.critic1Opt : agent.critic2Opt,
                  grad);
    }

    ++agent.updateCount;
    if (agent.updateCount % cfg.policyDelay != 0) return;

    // Delayed policy step: ascend critic1's value of the actor's action.
    MlpGradients actorGrad = make_zero_gradients(agent.actor);
    MlpTape actorTape, criticTape;
    for (int k = 0; k < batchSize; ++k) {
        const Transition& t = *batch[static_cast<std::size_t>(k)];
        const double raw = forward(agent.actor, t.state, actorTape)[0];
        const double action = squash_action(cfg, raw);
        forward(agent.critic1, critic_input(cfg, t.state, action), criticTape);
        MlpGradients criticGrad = make_zero_gradients(agent.critic1);
        accumulate_gradients(agent.critic1, criticTape, {-invB}, criticGrad);
        // d(normalized action)/d(raw score): the squash spans the action
        // range, the critic input rescales it away, leaving tanh's slope.
        const double th = std::tanh(raw);
        const double dNormDRaw = 0.5 * (1.0 - th * th);
        const double upstream = criticGrad.input.back() * dNormDRaw;
        accumulate_gradients(agent.actor, actorTape, {upstream}, actorGrad);
    }
    adam_step(agent.actor, agent.actorOpt, actorGrad);

    soft_update(agent.targetActor, agent.actor, cfg.tauSoft);
    soft_update(agent.targetCritic1, agent.critic1, cfg.tauSoft);
    soft_update(agent.targetCritic2, agent.critic2, cfg.tauSoft);
}

double critic_loss(const AgentState& agent, const std::vector<Transition>& batch) {
    if (batch.empty()) throw std::invalid_argument("critic loss needs a non-empty batch");
    double sum = 0.0;
    for (const Transition& t : batch) {
        const double q =
            forward(agent.critic1, critic_input(agent.config, t.state, t.action))[0];
        const double err = q - bellman_target(agent, t, 0.0);
        sum += err * err;
    }
    return sum / static_cast<double>(batch.size());
}

namespace {

nlohmann::json mlp_to_json(const Mlp& net) {
    return nlohmann::json{{"sizes", net.sizes}, {"weights", net.weights}, {"biases", net.biases}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
    Mlp net;
    net.sizes = j.at("sizes").get<std::vector<int>>();
    net.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    net.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    return net;
}

nlohmann::json adam_to_json(const AdamState& opt) {
    return nlohmann::json{{"learningRate", opt.learningRate}, {"beta1", opt.beta1},
                          {"beta2", opt.beta2},               {"epsilon", opt.epsilon},
                          {"stepCount", opt.stepCount},       {"weightM", opt.weightM},
                          {"weightV", opt.weightV},           {"biasM", opt.biasM},
                          {"biasV", opt.biasV}};
}

AdamState adam_from_json(const nlohmann::json& j) {
    AdamState opt;
    opt.learningRate = j.at("learningRate").get<double>();
    opt.beta1 = j.at("beta1").get<double>();
    opt.beta2 = j.at("beta2").get<double>();
    opt.epsilon = j.at("epsilon").get<double>();
    opt.stepCount = j.at("stepCount").get<long>();
    opt.weightM = j.at("weightM").get<std::vector<std::vector<double>>>();
    opt.weightV = j.at("weightV").get<std::vector<std::vector<double>>>();
    opt.biasM = j.at("biasM").get<std::vector<std::vector<double>>>();
    opt.biasV = j.at("biasV").get<std::vector<std::vector<double>>>();
    return opt;
}

} // namespace

std::string agent_to_json(const AgentState& agent) {
    const Td3Config& c = agent.config;
    nlohmann::json j{
        {"config",
         {{"stateDim", c.stateDim},
          {"actionLow", c.actionLow},
          {"actionHigh", c.actionHigh},
          {"hidden", c.hidden},
          {"gamma", c.gamma},
          {"learningRate", c.learningRate},
          {"tauSoft", c.tauSoft},
          {"policyDelay", c.policyDelay},
          {"explorationStd", c.explorationStd},
          {"targetSmoothingStd", c.targetSmoothingStd},
          {"targetSmoothingClip", c.targetSmoothingClip}}},
        {"actor", mlp_to_json(agent.actor)},
        {"critic1", mlp_to_json(agent.critic1)},
        {"critic2", mlp_to_json(agent.critic2)},
        {"targetActor", mlp_to_json(agent.targetActor)},
        {"targetCritic1", mlp_to_json(agent.targetCritic1)},
        {"targetCritic2", mlp_to_json(agent.targetCritic2)},
        {"actorOpt", adam_to_json(agent.actorOpt)},
        {"critic1Opt", adam_to_json(agent.critic1Opt)},
        {"critic2Opt", adam_to_json(agent.critic2Opt)},
        {"updateCount", agent.updateCount}};
    return j.dump();
}

AgentState agent_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    const nlohmann::json& jc = j.at("config");
    AgentState agent;
    Td3Config& c = agent.config;
    c.stateDim = jc.at("stateDim").get<int>();
    c.actionLow = jc.at("actionLow").get<double>();
    c.actionHigh = jc.at("actionHigh").get<double>();
    c.hidden = jc.at("hidden").get<std::vector<int>>();
    c.gamma = jc.at("gamma").get<double>();
    c.learningRate = jc.at("learningRate").get<double>();
    c.tauSoft = jc.at("tauSoft").get<double>();
    c.policyDelay = jc.at("policyDelay").get<int>();
    c.explorationStd = jc.at("explorationStd").get<double>();
    c.targetSmoothingStd = jc.at("targetSmoothingStd").get<double>();
    c.targetSmoothingClip = jc.at("targetSmoothingClip").get<double>();
    agent.actor = mlp_from_json(j.at("actor"));
    agent.critic1 = mlp_from_json(j.at("critic1"));
    agent.critic2 = mlp_from_json(j.at("critic2"));
    agent.targetActor = mlp_from_json(j.at("targetActor"));
    agent.targetCritic1 = mlp_from_json(j.at("targetCritic1"));
    agent.targetCritic2 = mlp_from_json(j.at("targetCritic2"));
    agent.actorOpt = adam_from_json(j.at("actorOpt"));
    agent.critic1Opt = adam_from_json(j.at("critic1Opt"));
    agent.critic2Opt = adam_from_json(j.at("critic2Opt"));
    agent.updateCount = j.at("updateCount").get<long>();
    return agent;
}

} // namespace campopt::rl
