#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "riskrl/config.hpp"
#include "riskrl/population.hpp"

using namespace riskrl;

namespace {

PopulationConfig small(const std::string& task, BiasMode bias, long agents, long horizon, std::uint64_t seed) {
    PopulationConfig cfg;
    cfg.task = build_task(task);
    cfg.bias = bias;
    cfg.n_agents = agents;
    cfg.horizon = horizon;
    cfg.master_seed = seed;
    return cfg;
}

}  // namespace

TEST(SampleAgent, DegenerateGaussians) {
    PopulationConfig cfg = small("trade_off", BiasMode::Realistic, 1, 1, 0);
    cfg.gamma_std = cfg.beta_std = cfg.init_value_std = 0.0;
    for (long i = 0; i < 50; ++i) {
        const auto p = sample_agent(cfg, i, 99);
        EXPECT_EQ(p.gamma, 0.9);
        EXPECT_EQ(p.beta, 10.0);
        EXPECT_EQ(p.init_offset, 0.0);
    }
}

TEST(SampleAgent, GammaMean) {
    PopulationConfig cfg = small("trade_off", BiasMode::Realistic, 1, 1, 0);
    double total = 0.0;
    const long n = 5000;
    for (long i = 0; i < n; ++i) {
        const auto p = sample_agent(cfg, i, 12345);
        ASSERT_GE(p.gamma, kGammaMin);
        ASSERT_LE(p.gamma, kGammaMax);
        ASSERT_GE(p.beta, 0.0);
        total += p.gamma;
    }
    EXPECT_NEAR(total / n, 0.9, 0.001);
}

TEST(SampleAgent, GammaIsClamped) {
    PopulationConfig cfg = small("trade_off", BiasMode::Realistic, 1, 1, 0);
    cfg.gamma_std = 5.0;
    for (long i = 0; i < 500; ++i) {
        const auto p = sample_agent(cfg, i, 5);
        ASSERT_GE(p.gamma, kGammaMin);
        ASSERT_LE(p.gamma, kGammaMax);
    }
}

TEST(SampleAgent, LackOfControlHasZeroBeta) {
    PopulationConfig cfg = small("lack_of_control", BiasMode::Realistic, 1, 1, 0);
    for (long i = 0; i < 100; ++i) EXPECT_EQ(sample_agent(cfg, i, 7).beta, 0.0);
}

TEST(SampleAgent, PerStateOffsets) {
    PopulationConfig cfg = small("gambling", BiasMode::Realistic, 1, 1, 0);
    const auto a = sample_state_offsets(cfg, 3, 11);
    EXPECT_EQ(a.size(), static_cast<std::size_t>(cfg.task.num_nodes()));
    EXPECT_EQ(a, sample_state_offsets(cfg, 3, 11));
    EXPECT_NE(a, sample_state_offsets(cfg, 4, 11));
}

TEST(RunTrial, ZeroHorizon) {
    const auto t = build_task("trade_off");
    const auto rec = run_trial(AgentParams{}, t, 0, RandomStream(1));
    EXPECT_TRUE(rec.steps.empty());
    EXPECT_EQ(rec.summary.total_reward, 0.0);
    for (long c : rec.summary.picks) EXPECT_EQ(c, 0);
}

TEST(RunTrial, ExactStepCountAndSummary) {
    const auto t = build_task("gambling");
    const auto rec = run_trial(AgentParams{}, t, 777, RandomStream(2));
    ASSERT_EQ(rec.steps.size(), 777u);
    double total = 0.0;
    long picks = 0;
    for (const auto& s : rec.steps) {
        total += s.reward;
        if (s.consumed) ++picks;
    }
    EXPECT_EQ(total, rec.summary.total_reward);
    EXPECT_EQ(picks, std::accumulate(rec.summary.picks.begin(), rec.summary.picks.end(), 0L));
}

TEST(RunTrial, Deterministic) {
    const auto t = build_task("risky_world");
    AgentParams p;
    p.bias = BiasMode::ExpWeighted;
    const auto a = run_trial(p, t, 2000, RandomStream(3, 0, StreamPurpose::Trial));
    const auto b = run_trial(p, t, 2000, RandomStream(3, 0, StreamPurpose::Trial));
    ASSERT_EQ(a.steps.size(), b.steps.size());
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        ASSERT_EQ(a.steps[i].reward, b.steps[i].reward);
        ASSERT_EQ(a.steps[i].delta, b.steps[i].delta);
        ASSERT_EQ(a.steps[i].fear, b.steps[i].fear);
        ASSERT_EQ(a.steps[i].state, b.steps[i].state);
    }
    EXPECT_EQ(a.summary.picks, b.summary.picks);
}

TEST(RunCondition, TradeOffPrefersA) {
    const auto agg = run_condition(small("trade_off", BiasMode::Realistic, 200, 5000, 2024), 0);
    ASSERT_EQ(agg.n_agents(), 200);
    long prefer_a = 0;
    for (const auto& a : agg.agents())
        if (a.picks[0] > a.picks[1]) ++prefer_a;
    EXPECT_GE(prefer_a, 190);
}

TEST(RunCondition, IndependentOfWorkerCount) {
    auto cfg = small("gambling", BiasMode::OutcomeOptimistic, 100, 400, 77);
    cfg.windows = {{0, 100}, {300, 400}};
    const auto one = run_condition(cfg, 1);
    const auto three = run_condition(cfg, 3);
    const auto many = run_condition(cfg, 8);
    EXPECT_TRUE(one == three);
    EXPECT_TRUE(one == many);
}

TEST(RunCondition, SeriesLengthAndAggregationConsistency) {
    const auto agg = run_condition(small("risky_world", BiasMode::ActionOptimistic, 70, 600, 5), 2);
    const auto m = agg.mean_series();
    ASSERT_EQ(m.reward.size(), 600u);
    ASSERT_EQ(m.joy.size(), 600u);
    ASSERT_EQ(m.fear.size(), 600u);
    const double series_mean = std::accumulate(m.reward.begin(), m.reward.end(), 0.0) / 600.0;
    double totals = 0.0;
    for (const auto& a : agg.agents()) totals += a.total_reward;
    EXPECT_NEAR(series_mean, totals / (70.0 * 600.0), 1e-9);
}

TEST(RunCondition, WindowMeansMatchSeries) {
    auto cfg = small("gambling", BiasMode::Realistic, 40, 300, 8);
    cfg.windows = {{100, 300}};
    const auto agg = run_condition(cfg, 2);
    double from_windows = 0.0;
    long picks = 0;
    for (const auto& a : agg.agents()) {
        from_windows += a.windows[0].reward;
        picks += a.windows[0].picks[0] + a.windows[0].picks[1];
    }
    const auto& sum = agg.sum_reward();
    const double from_series = std::accumulate(sum.begin() + 100, sum.end(), 0.0) / 200.0;
    EXPECT_NEAR(from_windows, from_series, 1e-9);
    EXPECT_GT(picks, 0);
}

TEST(RunCondition, HistogramCoversAllAgents) {
    const auto agg = run_condition(small("gambling", BiasMode::OutcomeOptimistic, 64, 1000, 9), 2);
    for (int option : {0, 1, 2})
        for (long width : {1L, 7L, 50L}) {
            const auto h = agg.histogram(option, width);
            EXPECT_EQ(std::accumulate(h.begin(), h.end(), 0L), 64);
        }
    EXPECT_THROW(agg.histogram(3, 1), std::out_of_range);
    EXPECT_THROW(agg.histogram(0, 0), std::invalid_argument);
}

TEST(RunCondition, LackOfControlChoicesDoNotDependOnBias) {
    std::vector<std::vector<AgentRecord>> runs;
    for (BiasMode b : {BiasMode::Realistic, BiasMode::ActionOptimistic, BiasMode::OutcomeOptimistic})
        runs.push_back(run_condition(small("lack_of_control", b, 50, 1000, 13), 2).agents());
    for (std::size_t i = 0; i < runs[0].size(); ++i) {
        EXPECT_EQ(runs[0][i].picks, runs[1][i].picks);
        EXPECT_EQ(runs[0][i].picks, runs[2][i].picks);
    }
}

TEST(RunCondition, RejectsInvalidConfig) {
    auto cfg = small("trade_off", BiasMode::Realistic, 0, 10, 1);
    EXPECT_THROW(run_condition(cfg), std::invalid_argument);
    cfg.n_agents = 1;
    cfg.windows = {{5, 20}};
    EXPECT_THROW(run_condition(cfg), std::invalid_argument);
}

TEST(Merge, IdentityAndCommutativity) {
    const auto cfg = small("gambling", BiasMode::ExpWeighted, 1, 200, 17);
    ConditionAggregate a(200), b(200);
    run_agent_into(cfg, 0, a);
    run_agent_into(cfg, 5, a);
    run_agent_into(cfg, 3, b);
    EXPECT_TRUE(merge(ConditionAggregate{}, a) == a);
    EXPECT_TRUE(merge(a, ConditionAggregate{}) == a);
    const auto ab = merge(a, b);
    const auto ba = merge(b, a);
    EXPECT_TRUE(ab == ba);
    ASSERT_EQ(ab.n_agents(), 3);
    EXPECT_EQ(ab.agents()[0].agent_id, 0);
    EXPECT_EQ(ab.agents()[1].agent_id, 3);
    EXPECT_EQ(ab.agents()[2].agent_id, 5);
    EXPECT_THROW(merge(a, ConditionAggregate(100)), std::invalid_argument);
}

TEST(Merge, Associative) {
    const auto cfg = small("trade_off", BiasMode::Realistic, 1, 100, 19);
    ConditionAggregate a(100), b(100), c(100);
    run_agent_into(cfg, 1, a);
    run_agent_into(cfg, 2, b);
    run_agent_into(cfg, 3, c);
    const auto left = merge(merge(a, b), c);
    const auto right = merge(a, merge(b, c));
    EXPECT_EQ(left.agents(), right.agents());
    for (long t = 0; t < 100; ++t) EXPECT_NEAR(left.sum_reward()[t], right.sum_reward()[t], 1e-15);
}

TEST(Presets, Fig2HasTwelveConditions) {
    const auto cfg = parse_experiment(*presets::find("fig2"));
    EXPECT_EQ(cfg.conditions.size(), 12u);
    for (const auto& c : cfg.conditions) {
        EXPECT_EQ(c.population.n_agents, 5000);
        EXPECT_EQ(c.population.horizon, 5000);
    }
}
