#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace campopt::rl {

// Fully connected network with rectified-linear hidden layers and a linear
// output layer. Stored densely; layer l maps sizes[l] inputs to sizes[l+1]
// outputs via weights[l] (row-major [out][in]) and biases[l].
struct Mlp {
    std::vector<int> sizes;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    int input_dim() const { return sizes.empty() ? 0 : sizes.front(); }
    int output_dim() const { return sizes.empty() ? 0 : sizes.back(); }
    int layer_count() const { return static_cast<int>(weights.size()); }
};

// Uniform fan-in initialization: each layer's weights and biases are drawn
// from U(-1/sqrt(fanIn), +1/sqrt(fanIn)). Throws std::invalid_argument for
// fewer than two layer sizes or a non-positive size.
Mlp make_mlp(const std::vector<int>& sizes, std::mt19937_64& rng);

// Activations recorded during a forward pass, consumed by gradients().
struct MlpTape {
    std::vector<double> input;
    std::vector<std::vector<double>> preact; // per layer, before activation
    std::vector<std::vector<double>> act;    // per layer, after activation
};

// Deterministic forward pass. Throws std::invalid_argument on an input whose
// dimension does not match the first layer.
std::vector<double> forward(const Mlp& net, const std::vector<double>& x);
std::vector<double> forward(const Mlp& net, const std::vector<double>& x, MlpTape& tape);

// Parameter gradients of the scalar L = sum_k upstream[k] * output[k], plus
// the gradient with respect to the network input (used to push critic value
// gradients through the actor).
struct MlpGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    std::vector<double> input;
};

MlpGradients make_zero_gradients(const Mlp& net);
// Exact reverse-mode differentiation through the recorded tape; accumulates
// into grad so batches can sum their contributions.
void accumulate_gradients(const Mlp& net, const MlpTape& tape,
                          const std::vector<double>& upstream, MlpGradients& grad);

// Adaptive-moment gradient descent state, shaped like the network it trains.
struct AdamState {
    double learningRate = 4e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long stepCount = 0;
    std::vector<std::vector<double>> weightM, weightV;
    std::vector<std::vector<double>> biasM, biasV;
};

AdamState make_adam(const Mlp& net, double learningRate);
void adam_step(Mlp& net, AdamState& opt, const MlpGradients& grad);

// target <- (1 - tau) * target + tau * main, elementwise over parameters.
void soft_update(Mlp& target, const Mlp& main, double tau);

// One stored interaction: the deployment decision taken in `state`, the
// reward observed, and the successor state (ignored when terminal).
struct Transition {
    std::vector<double> state;
    double action = 0.0;
    double reward = 0.0;
    std::vector<double> nextState;
    bool terminal = false;
};

// Fixed-capacity ring buffer with uniform sampling over the stored items.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return items_[i]; }
    const Transition& sample(std::mt19937_64& rng) const;

  private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> items_;
};

// Hyperparameters of the deployment agent. Noise scales are fractions of the
// action half-range so configs transfer across deployment caps.
struct Td3Config {
    int stateDim = 0;
    double actionLow = 0.0;
    double actionHigh = 1.0;
    std::vector<int> hidden{256, 256};
    double gamma = 0.95;
    double learningRate = 4e-4;
    double tauSoft = 0.005;
    int policyDelay = 2;
    double explorationStd = 0.1;
    double targetSmoothingStd = 0.2;
    double targetSmoothingClip = 0.5;
};

// Small preset for fast tests and desk-scale runs.
Td3Config desk_td3_config(int stateDim, double actionLow, double actionHigh);

// Actor, twin critics, their target copies, and optimizer state. The actor
// emits one unsquashed score; actions are tanh-squashed into
// [actionLow, actionHigh]. Critics consume the state concatenated with the
// action rescaled to [0, 1].
struct AgentState {
    Td3Config config;
    Mlp actor, critic1, critic2;
    Mlp targetActor, targetCritic1, targetCritic2;
    AdamState actorOpt, critic1Opt, critic2Opt;
    long updateCount = 0;
};

AgentState make_agent(const Td3Config& config, std::mt19937_64& rng);

// Squashes the actor's raw score into the action range.
double squash_action(const Td3Config& config, double raw);

// Deterministic policy action, plus clipped Gaussian exploration noise when
// explore is set; always within [actionLow, actionHigh]. Throws
// std::invalid_argument on a state dimension mismatch.
double select_action(const AgentState& agent, const std::vector<double>& state, bool explore,
                     std::mt19937_64& rng);

// Critic value of a (state, action) pair under the first main critic.
double critic_value(const AgentState& agent, const std::vector<double>& state, double action);

// One training step: both critics regress onto
//   r + gamma * (1 - terminal) * min(targetQ1, targetQ2)(s', smoothed a'),
// and every config.policyDelay-th call the actor ascends critic1 and all
// targets soft-update. Throws std::invalid_argument when the buffer holds
// fewer than batchSize items.
void td3_update(AgentState& agent, const ReplayBuffer& buffer, int batchSize,
                std::mt19937_64& rng);

// Mean squared critic error of the first main critic over a batch of
// transitions against the current targets (diagnostic; used by tests to
// verify learning progress).
double critic_loss(const AgentState& agent, const std::vector<Transition>& batch);

// JSON (de)serialization for experiment checkpoints; round-trips exactly.
std::string agent_to_json(const AgentState& agent);
AgentState agent_from_json(const std::string& text);

} // namespace campopt::rl
