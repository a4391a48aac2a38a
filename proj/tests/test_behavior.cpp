#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "riskrl/behavior.hpp"
#include "riskrl/population.hpp"

using namespace riskrl;

TEST(Boltzmann, TwoActionExample) {
    const std::vector<double> qs{0.2, -0.1};
    const auto p = boltzmann_probabilities(qs, 10.0);
    EXPECT_NEAR(p[0], 0.9525741268224331, 1e-15);
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
}

TEST(Boltzmann, ZeroBetaIsUniform) {
    const std::vector<double> qs{5.0, -3.0, 0.0, 17.0};
    for (double p : boltzmann_probabilities(qs, 0.0)) EXPECT_EQ(p, 0.25);
}

TEST(Boltzmann, EqualValuesAreUniform) {
    const std::vector<double> qs(4, 0.3);
    for (double beta : {0.5, 10.0, 1000.0})
        for (double p : boltzmann_probabilities(qs, beta)) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(Boltzmann, LargeExponentsStayFinite) {
    const std::vector<double> qs{17.0, -2.0, 0.0, 16.9};
    for (double beta : {10.0, 100.0, 1e4}) {
        const auto p = boltzmann_probabilities(qs, beta);
        double total = 0.0;
        for (double x : p) {
            EXPECT_TRUE(std::isfinite(x));
            total += x;
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
        EXPECT_GT(p[0], p[3]);
    }
}

TEST(Boltzmann, RejectsBadInput) {
    const std::vector<double> none;
    EXPECT_THROW(boltzmann_probabilities(none, 1.0), std::invalid_argument);
    const std::vector<double> qs{0.0};
    EXPECT_THROW(boltzmann_probabilities(qs, -1.0), std::invalid_argument);
}

TEST(Boltzmann, SampleFrequenciesMatch) {
    const std::array<double, kNumActions> qs{0.2, -0.1, 0.05, 0.0};
    const double beta = 10.0;
    const auto p = boltzmann_probabilities(std::span<const double>(qs), beta);
    RandomStream rng(31);
    const long n = 100000;
    std::array<long, kNumActions> counts{};
    for (long i = 0; i < n; ++i) ++counts[action_index(boltzmann_select(qs, beta, rng))];
    for (int a = 0; a < kNumActions; ++a) {
        const double sigma = std::sqrt(p[a] * (1.0 - p[a]) / n);
        EXPECT_NEAR(static_cast<double>(counts[a]) / n, p[a], 3.0 * sigma) << a;
    }
}

TEST(AgentStep, FirstWinningGambleIsPureJoy) {
    const auto t = build_task("gambling");
    const int before_b = t.cell_index({3, 0});
    AgentParams p;
    p.bias = BiasMode::OutcomeOptimistic;
    p.beta = 0.0;
    p.init_offset = 0.0;
    int found = 0;
    for (std::uint64_t seed = 0; seed < 5000 && found < 3; ++seed) {
        Agent agent(t, p, RandomStream(seed));
        agent.world.agent_pos = before_b;
        const StepLog log = agent_step(agent, t);
        if (!log.consumed || t.payoffs[log.consumed->payoff].spec.outcomes[log.consumed->outcome].label != "B2")
            continue;
        ++found;
        EXPECT_EQ(log.reward, 0.8);
        EXPECT_EQ(log.delta, 0.8);
        EXPECT_EQ(log.joy, 0.8);
        EXPECT_EQ(log.distress, 0.0);
        EXPECT_EQ(log.hope, 0.8);
        EXPECT_EQ(log.fear, 0.0);
    }
    EXPECT_EQ(found, 3);
}

TEST(AgentStep, ConvergedDeterministicTaskIsSilent) {
    const auto t = build_task("trade_off");
    for (BiasMode b : {BiasMode::ActionOptimistic, BiasMode::OutcomeOptimistic}) {
        SCOPED_TRACE(bias_name(b));
        AgentParams p;
        p.bias = b;
        Agent agent(t, p, RandomStream(37));
        for (int i = 0; i < 20000; ++i) agent_step(agent, t);
        for (int i = 0; i < 2000; ++i) {
            const StepLog log = agent_step(agent, t);
            ASSERT_EQ(log.delta, 0.0) << "step " << log.step_index;
            ASSERT_EQ(log.joy, 0.0);
            ASSERT_EQ(log.distress, 0.0);
        }
    }
}

TEST(AgentStep, ForcedActionsIgnoreTheRequest) {
    const auto t = build_task("lack_of_control");
    AgentParams p;
    p.beta = 50.0;
    Agent agent(t, p, RandomStream(41));
    std::array<long, kNumActions> counts{};
    const long n = 20000;
    for (long i = 0; i < n; ++i) ++counts[action_index(agent_step(agent, t).action)];
    double chi2 = 0.0;
    for (long c : counts) chi2 += std::pow(c - n / 4.0, 2) / (n / 4.0);
    EXPECT_LT(chi2, 11.345);  // chi-square, 3 dof, p = 0.01
}

TEST(AgentStep, LogInvariantsHoldEverywhere) {
    for (const auto& id : builtin_task_ids()) {
        const auto t = build_task(id);
        for (BiasMode b : kAllBiasModes) {
            for (FearMode fm : {FearMode::Signed, FearMode::Raw}) {
                SCOPED_TRACE(id + " " + std::string(bias_name(b)));
                AgentParams p;
                p.bias = b;
                p.init_offset = 0.05;
                AgentOptions opts;
                opts.fear = fm;
                Agent agent(t, p, RandomStream(43), opts);
                for (int i = 0; i < 3000; ++i) {
                    const StepLog log = agent_step(agent, t);
                    ASSERT_GE(log.joy, 0.0);
                    ASSERT_GE(log.distress, 0.0);
                    ASSERT_EQ(log.joy * log.distress, 0.0);
                    ASSERT_EQ(log.joy - log.distress, log.delta);
                    ASSERT_GE(log.fear, 0.0);
                    ASSERT_GE(log.hope, 0.0);
                    ASSERT_TRUE(std::isfinite(log.delta));
                    if (fm == FearMode::Signed) {
                        ASSERT_EQ(log.fear, -agent.values.v_minus(log.state));
                    } else {
                        ASSERT_EQ(log.fear, -std::min(agent.values.v(log.state), 0.0));
                    }
                    ASSERT_EQ(log.step_index, i);
                    ASSERT_FALSE(t.is_terminal(agent.world.agent_pos));
                }
            }
        }
    }
}

TEST(AgentStep, RejectsMismatchedInitialValues) {
    const auto t = build_task("trade_off");
    EXPECT_THROW(Agent(t, AgentParams{}, RandomStream(1), {}, std::vector<double>(3, 0.0)), std::invalid_argument);
}

// Reward per step over the first 100 steps is below that of the following 1000.
TEST(AgentStep, LearningImprovesReward) {
    const auto t = build_task("trade_off");
    for (BiasMode b : kAllBiasModes) {
        SCOPED_TRACE(bias_name(b));
        PopulationConfig cfg;
        cfg.task = t;
        cfg.bias = b;
        std::vector<double> diff;
        for (long i = 0; i < 200; ++i) {
            const AgentParams p = sample_agent(cfg, i, 47);
            const auto rec = run_trial(p, t, 1100, RandomStream(47, i, StreamPurpose::Trial));
            double early = 0.0, late = 0.0;
            for (int k = 0; k < 100; ++k) early += rec.steps[k].reward;
            for (int k = 100; k < 1100; ++k) late += rec.steps[k].reward;
            diff.push_back(late / 1000.0 - early / 100.0);
        }
        const double n = static_cast<double>(diff.size());
        const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / n;
        double ss = 0.0;
        for (double d : diff) ss += (d - mean) * (d - mean);
        const double se = std::sqrt(ss / (n - 1.0) / n);
        ASSERT_GT(se, 0.0);
        const boost::math::students_t dist(n - 1.0);
        const double p_value = boost::math::cdf(boost::math::complement(dist, mean / se));
        EXPECT_LT(p_value, 0.01) << "mean improvement " << mean;
    }
}
