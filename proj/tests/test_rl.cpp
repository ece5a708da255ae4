// Deployment-agent tests: network forward/backward oracles against hand
// computations and central finite differences, optimizer and soft-update
// behavior, replay uniformity, and the training-step contracts.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "campopt/rl.hpp"

namespace {

using namespace campopt::rl;

Mlp zero_mlp(const std::vector<int>& sizes) {
    std::mt19937_64 rng(0);
    Mlp net = make_mlp(sizes, rng);
    for (auto& layer : net.weights)
        for (double& w : layer) w = 0.0;
    for (auto& layer : net.biases)
        for (double& b : layer) b = 0.0;
    return net;
}

double scalar_loss(const Mlp& net, const std::vector<double>& x,
                   const std::vector<double>& upstream) {
    const std::vector<double> y = forward(net, x);
    double loss = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) loss += upstream[k] * y[k];
    return loss;
}

// Worst relative error between reverse-mode and central finite differences
// over every weight, bias, and input coordinate.
double max_gradient_error(Mlp net, const std::vector<double>& x,
                          const std::vector<double>& upstream) {
    MlpTape tape;
    forward(net, x, tape);
    MlpGradients grad = make_zero_gradients(net);
    accumulate_gradients(net, tape, upstream, grad);

    const double h = 1e-5;
    double worst = 0.0;
    auto check = [&](double analytic, double* param) {
        const double saved = *param;
        *param = saved + h;
        const double up = scalar_loss(net, x, upstream);
        *param = saved - h;
        const double down = scalar_loss(net, x, upstream);
        *param = saved;
        const double fd = (up - down) / (2.0 * h);
        worst = std::max(worst, std::fabs(analytic - fd) / std::max(std::fabs(fd), 1e-6));
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (std::size_t k = 0; k < net.weights[l].size(); ++k)
            check(grad.weights[l][k], &net.weights[l][k]);
        for (std::size_t k = 0; k < net.biases[l].size(); ++k)
            check(grad.biases[l][k], &net.biases[l][k]);
    }
    std::vector<double> xFd = x;
    for (std::size_t i = 0; i < xFd.size(); ++i) {
        const double saved = xFd[i];
        xFd[i] = saved + h;
        const double up = scalar_loss(net, xFd, upstream);
        xFd[i] = saved - h;
        const double down = scalar_loss(net, xFd, upstream);
        xFd[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        worst = std::max(worst, std::fabs(grad.input[i] - fd) / std::max(std::fabs(fd), 1e-6));
    }
    return worst;
}

bool mlp_equal(const Mlp& a, const Mlp& b) {
    return a.sizes == b.sizes && a.weights == b.weights && a.biases == b.biases;
}

double mlp_distance(const Mlp& a, const Mlp& b) {
    double worst = 0.0;
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        for (std::size_t k = 0; k < a.weights[l].size(); ++k)
            worst = std::max(worst, std::fabs(a.weights[l][k] - b.weights[l][k]));
        for (std::size_t k = 0; k < a.biases[l].size(); ++k)
            worst = std::max(worst, std::fabs(a.biases[l][k] - b.biases[l][k]));
    }
    return worst;
}

} // namespace

TEST_SUITE("feedforward networks") {
    TEST_CASE("construction validates layer sizes and respects fan-in bounds") {
        std::mt19937_64 rng(7);
        CHECK_THROWS_AS(make_mlp({}, rng), std::invalid_argument);
        CHECK_THROWS_AS(make_mlp({4}, rng), std::invalid_argument);
        CHECK_THROWS_AS(make_mlp({4, 0, 1}, rng), std::invalid_argument);

        const Mlp net = make_mlp({9, 5, 2}, rng);
        REQUIRE(net.layer_count() == 2);
        CHECK(net.weights[0].size() == 45);
        CHECK(net.biases[0].size() == 5);
        CHECK(net.weights[1].size() == 10);
        CHECK(net.biases[1].size() == 2);
        for (double w : net.weights[0]) CHECK(std::fabs(w) <= 1.0 / 3.0);
        for (double w : net.weights[1]) CHECK(std::fabs(w) <= 1.0 / std::sqrt(5.0));
    }

    TEST_CASE("zero weights pass the output bias through for any input") {
        Mlp net = zero_mlp({2, 3, 2});
        net.biases[1] = {1.5, -2.25};
        CHECK(forward(net, {0.0, 0.0}) == std::vector<double>{1.5, -2.25});
        CHECK(forward(net, {100.0, -40.0}) == std::vector<double>{1.5, -2.25});
    }

    TEST_CASE("hand-computed forward pass through one hidden unit") {
        Mlp net = zero_mlp({1, 1, 1});
        net.weights[0] = {2.0};
        net.biases[0] = {0.5};
        net.weights[1] = {-3.0};
        net.biases[1] = {1.0};
        // x=0.7: hidden = relu(1.9) = 1.9, output = -3*1.9 + 1 = -4.7
        CHECK(forward(net, {0.7})[0] == doctest::Approx(-4.7).epsilon(1e-12));
        // x=-1: hidden preactivation -1.5 rectifies to zero, output = bias
        CHECK(forward(net, {-1.0})[0] == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("input dimension mismatches are rejected") {
        std::mt19937_64 rng(3);
        const Mlp net = make_mlp({3, 4, 1}, rng);
        CHECK_THROWS_AS(forward(net, {1.0, 2.0}), std::invalid_argument);
        CHECK_THROWS_AS(forward(net, {1.0, 2.0, 3.0, 4.0}), std::invalid_argument);
    }

    TEST_CASE("single linear layer gradients equal the input outer product") {
        Mlp net = zero_mlp({3, 1});
        net.weights[0] = {0.5, -1.0, 2.0};
        net.biases[0] = {0.25};
        const std::vector<double> x{1.0, -2.0, 3.0};
        MlpTape tape;
        forward(net, x, tape);
        MlpGradients grad = make_zero_gradients(net);
        accumulate_gradients(net, tape, {2.0}, grad);
        CHECK(grad.weights[0] == std::vector<double>{2.0, -4.0, 6.0});
        CHECK(grad.biases[0] == std::vector<double>{2.0});
        CHECK(grad.input == std::vector<double>{1.0, -2.0, 4.0});
    }

    TEST_CASE("gradients vanish inside a rectifier's dead region") {
        Mlp net = zero_mlp({1, 1, 1});
        net.weights[0] = {2.0};
        net.biases[0] = {0.5};
        net.weights[1] = {-3.0};
        net.biases[1] = {1.0};
        MlpTape tape;
        forward(net, {-1.0}, tape); // hidden unit off
        MlpGradients grad = make_zero_gradients(net);
        accumulate_gradients(net, tape, {1.0}, grad);
        CHECK(grad.weights[0][0] == 0.0);
        CHECK(grad.biases[0][0] == 0.0);
        CHECK(grad.weights[1][0] == 0.0); // hidden activation is zero
        CHECK(grad.biases[1][0] == 1.0);
        CHECK(grad.input[0] == 0.0);
    }

    TEST_CASE("reverse-mode gradients match central finite differences") {
        const std::vector<std::vector<int>> shapes = {
            {4, 8, 8, 2}, {3, 16, 1}, {5, 5, 5, 5}, {2, 32, 32, 1}, {7, 3, 2}};
        std::mt19937_64 rng(41);
        std::normal_distribution<double> unit(0.0, 1.0);
        for (const auto& sizes : shapes) {
            const Mlp net = make_mlp(sizes, rng);
            std::vector<double> x(static_cast<std::size_t>(sizes.front()));
            for (double& v : x) v = unit(rng);
            std::vector<double> upstream(static_cast<std::size_t>(sizes.back()));
            for (double& v : upstream) v = unit(rng);
            CHECK(max_gradient_error(net, x, upstream) <= 1e-4);
        }
    }

    TEST_CASE("first adaptive-moment step moves by the learning rate") {
        Mlp net = zero_mlp({1, 1});
        net.weights[0] = {0.3};
        net.biases[0] = {-0.2};
        AdamState opt = make_adam(net, 1e-3);
        MlpGradients grad = make_zero_gradients(net);
        grad.weights[0][0] = 2.0;
        grad.biases[0][0] = -0.5;
        adam_step(net, opt, grad);
        // First step: mhat = g, vhat = g^2, so the move is lr * sign(g).
        CHECK(net.weights[0][0] == doctest::Approx(0.3 - 1e-3).epsilon(1e-6));
        CHECK(net.biases[0][0] == doctest::Approx(-0.2 + 1e-3).epsilon(1e-6));
        CHECK(opt.stepCount == 1);
    }

    TEST_CASE("soft update contracts the target toward the main network") {
        std::mt19937_64 rng(11);
        const Mlp main = make_mlp({3, 8, 1}, rng);
        Mlp target = make_mlp({3, 8, 1}, rng);

        Mlp copied = target;
        soft_update(copied, main, 1.0);
        CHECK(mlp_equal(copied, main));

        const double d0 = mlp_distance(target, main);
        REQUIRE(d0 > 0.0);
        const double tau = 0.005;
        for (int k = 1; k <= 200; ++k) {
            soft_update(target, main, tau);
            const double expected = d0 * std::pow(1.0 - tau, k);
            CHECK(std::fabs(mlp_distance(target, main) - expected) <= 1e-9 * (1.0 + expected));
        }
    }
}

TEST_SUITE("replay buffer") {
    TEST_CASE("capacity is enforced and eviction is first-in-first-out") {
        CHECK_THROWS_AS(ReplayBuffer(0), std::invalid_argument);
        ReplayBuffer buf(3);
        for (int k = 1; k <= 5; ++k) {
            Transition t;
            t.action = static_cast<double>(k);
            buf.push(t);
        }
        REQUIRE(buf.size() == 3);
        std::vector<double> kept;
        for (std::size_t i = 0; i < buf.size(); ++i) kept.push_back(buf[i].action);
        std::sort(kept.begin(), kept.end());
        CHECK(kept == std::vector<double>{3.0, 4.0, 5.0});

        std::mt19937_64 rng(1);
        ReplayBuffer empty(4);
        CHECK_THROWS_AS(empty.sample(rng), std::out_of_range);
    }

    TEST_CASE("sampling is uniform over the stored items") {
        const std::size_t n = 20;
        ReplayBuffer buf(n);
        for (std::size_t k = 0; k < n; ++k) {
            Transition t;
            t.action = static_cast<double>(k);
            buf.push(t);
        }
        std::mt19937_64 rng(2024);
        const int draws = 100000;
        std::vector<int> counts(n, 0);
        for (int k = 0; k < draws; ++k)
            counts[static_cast<std::size_t>(buf.sample(rng).action)]++;
        const double expected = static_cast<double>(draws) / static_cast<double>(n);
        double chi2 = 0.0;
        for (int c : counts) {
            const double dev = c - expected;
            chi2 += dev * dev / expected;
        }
        // 0.99 quantile of chi-square with 19 degrees of freedom.
        CHECK(chi2 <= 36.1909);
    }
}

TEST_SUITE("deployment agent") {
    TEST_CASE("actions are deterministic without exploration and stay in range") {
        std::mt19937_64 rng(5);
        AgentState agent = make_agent(desk_td3_config(3, 0.0, 5000.0), rng);
        const std::vector<double> state{0.2, -0.4, 0.9};
        std::mt19937_64 r1(1), r2(1);
        CHECK(select_action(agent, state, false, r1) == select_action(agent, state, false, r2));

        // Saturate the actor: a huge output bias squashes to the cap.
        AgentState pinned = agent;
        pinned.actor.biases.back()[0] = 50.0;
        std::mt19937_64 r3(9);
        CHECK(select_action(pinned, state, false, r3) == 5000.0);
        pinned.actor.biases.back()[0] = -50.0;
        CHECK(select_action(pinned, state, false, r3) == 0.0);

        // Exploration noise far larger than the range still lands inside it.
        AgentState noisy = agent;
        noisy.config.explorationStd = 100.0;
        std::mt19937_64 r4(123);
        for (int k = 0; k < 200; ++k) {
            const double a = select_action(noisy, state, true, r4);
            CHECK(a >= 0.0);
            CHECK(a <= 5000.0);
        }

        std::mt19937_64 r5(77), r6(77);
        for (int k = 0; k < 20; ++k)
            CHECK(select_action(agent, state, true, r5) ==
                  select_action(agent, state, true, r6));
    }

    TEST_CASE("state dimension mismatches are rejected") {
        std::mt19937_64 rng(6);
        AgentState agent = make_agent(desk_td3_config(4, 0.0, 1.0), rng);
        std::mt19937_64 actRng(1);
        CHECK_THROWS_AS(select_action(agent, {1.0, 2.0}, false, actRng), std::invalid_argument);
    }

    TEST_CASE("training requires a sufficiently full buffer") {
        std::mt19937_64 rng(8);
        AgentState agent = make_agent(desk_td3_config(2, 0.0, 1.0), rng);
        ReplayBuffer buf(16);
        Transition t;
        t.state = {0.1, 0.2};
        t.nextState = {0.3, 0.4};
        buf.push(t);
        std::mt19937_64 upd(1);
        CHECK_THROWS_AS(td3_update(agent, buf, 2, upd), std::invalid_argument);
        CHECK_THROWS_AS(td3_update(agent, buf, 0, upd), std::invalid_argument);
    }

    TEST_CASE("critic regresses onto the reward of a fixed terminal batch") {
        Td3Config cfg = desk_td3_config(2, 0.0, 1.0);
        cfg.gamma = 0.0;
        cfg.learningRate = 1e-2;
        std::mt19937_64 rng(13);
        AgentState agent = make_agent(cfg, rng);

        Transition t;
        t.state = {0.3, -0.7};
        t.action = 0.4;
        t.reward = 5.0;
        t.terminal = true;
        ReplayBuffer buf(4);
        buf.push(t);

        const double before = critic_loss(agent, {t});
        std::mt19937_64 upd(99);
        for (int k = 0; k < 100; ++k) td3_update(agent, buf, 1, upd);
        const double after = critic_loss(agent, {t});
        CHECK(after < before);
        CHECK(after < 0.25 * before);
        // The action range is [0, 1], so the critic sees the action verbatim.
        CHECK(critic_value(agent, t.state, 0.4) ==
              forward(agent.critic1, {0.3, -0.7, 0.4})[0]);
    }

    TEST_CASE("identical twins trained with shared targets stay identical") {
        Td3Config cfg = desk_td3_config(2, 0.0, 1.0);
        cfg.targetSmoothingStd = 0.0;
        std::mt19937_64 rng(21);
        AgentState agent = make_agent(cfg, rng);
        agent.critic2 = agent.critic1;
        agent.targetCritic2 = agent.targetCritic1;
        agent.critic2Opt = agent.critic1Opt;

        ReplayBuffer buf(8);
        std::mt19937_64 data(3);
        std::normal_distribution<double> unit(0.0, 1.0);
        for (int k = 0; k < 8; ++k) {
            Transition t;
            t.state = {unit(data), unit(data)};
            t.action = 0.5 + 0.1 * unit(data);
            t.reward = unit(data);
            t.nextState = {unit(data), unit(data)};
            t.terminal = k % 3 == 0;
            buf.push(t);
        }
        std::mt19937_64 upd(17);
        for (int k = 0; k < 10; ++k) td3_update(agent, buf, 4, upd);
        CHECK(mlp_equal(agent.critic1, agent.critic2));
        CHECK(mlp_equal(agent.targetCritic1, agent.targetCritic2));
    }

    TEST_CASE("targets copy the mains when the soft-update rate is one") {
        Td3Config cfg = desk_td3_config(2, 0.0, 1.0);
        cfg.tauSoft = 1.0;
        cfg.policyDelay = 1;
        std::mt19937_64 rng(31);
        AgentState agent = make_agent(cfg, rng);
        ReplayBuffer buf(4);
        Transition t;
        t.state = {0.5, 0.5};
        t.action = 0.2;
        t.reward = 1.0;
        t.nextState = {0.1, 0.9};
        buf.push(t);
        std::mt19937_64 upd(2);
        td3_update(agent, buf, 1, upd);
        CHECK(mlp_equal(agent.targetActor, agent.actor));
        CHECK(mlp_equal(agent.targetCritic1, agent.critic1));
        CHECK(mlp_equal(agent.targetCritic2, agent.critic2));
    }

    TEST_CASE("the actor only moves every policy-delay-th update") {
        std::mt19937_64 rng(43);
        AgentState agent = make_agent(desk_td3_config(2, 0.0, 1.0), rng);
        REQUIRE(agent.config.policyDelay == 2);
        ReplayBuffer buf(4);
        Transition t;
        t.state = {0.4, -0.2};
        t.action = 0.7;
        t.reward = -1.0;
        t.nextState = {0.0, 0.3};
        buf.push(t);
        const Mlp actor0 = agent.actor;
        std::mt19937_64 upd(5);
        td3_update(agent, buf, 1, upd);
        CHECK(mlp_equal(agent.actor, actor0)); // first call: critics only
        td3_update(agent, buf, 1, upd);
        CHECK_FALSE(mlp_equal(agent.actor, actor0)); // second call: actor steps
    }

    TEST_CASE("checkpoint serialization round-trips the agent exactly") {
        std::mt19937_64 rng(55);
        AgentState agent = make_agent(desk_td3_config(3, 0.0, 3000.0), rng);
        ReplayBuffer buf(8);
        std::mt19937_64 data(4);
        std::normal_distribution<double> unit(0.0, 1.0);
        for (int k = 0; k < 8; ++k) {
            Transition t;
            t.state = {unit(data), unit(data), unit(data)};
            t.action = 1500.0 + 100.0 * unit(data);
            t.reward = unit(data);
            t.nextState = {unit(data), unit(data), unit(data)};
            t.terminal = k == 7;
            buf.push(t);
        }
        std::mt19937_64 upd(6);
        for (int k = 0; k < 5; ++k) td3_update(agent, buf, 4, upd);

        const AgentState copy = agent_from_json(agent_to_json(agent));
        CHECK(mlp_equal(copy.actor, agent.actor));
        CHECK(mlp_equal(copy.critic1, agent.critic1));
        CHECK(mlp_equal(copy.critic2, agent.critic2));
        CHECK(mlp_equal(copy.targetActor, agent.targetActor));
        CHECK(mlp_equal(copy.targetCritic1, agent.targetCritic1));
        CHECK(mlp_equal(copy.targetCritic2, agent.targetCritic2));
        CHECK(copy.updateCount == agent.updateCount);
        CHECK(copy.actorOpt.stepCount == agent.actorOpt.stepCount);
        CHECK(copy.actorOpt.weightM == agent.actorOpt.weightM);
        CHECK(copy.critic1Opt.weightV == agent.critic1Opt.weightV);
        CHECK(copy.config.actionHigh == agent.config.actionHigh);

        const std::vector<double> state{0.1, 0.5, -0.3};
        std::mt19937_64 r1(9), r2(9);
        CHECK(select_action(copy, state, true, r1) == select_action(agent, state, true, r2));
    }
}
