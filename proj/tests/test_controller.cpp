#include <gtest/gtest.h>

#include <sstream>

#include "sonfis/controller.hpp"

using namespace sonfis;

namespace {

FeedbackState state(double budget, double error, double alpha, double beta, double gamma) {
    FeedbackState s;
    s.budget = budget;
    s.error = error;
    s.alpha = alpha;
    s.beta = beta;
    s.gamma = gamma;
    return s;
}

struct Split {
    DataTable train, test;
};

const Split& data() {
    static const Split s = [] {
        const auto t = gen_synthetic(693, 3, 0.05, 1);
        auto [a, b] = split(t, SplitSpec{});
        return Split{a, b};
    }();
    return s;
}

std::string trace_csv(const RunTrace& t) {
    std::ostringstream out;
    write_trace(out, t);
    return out.str();
}

}  // namespace

TEST(Recurrence, WorkedValues) {
    EXPECT_DOUBLE_EQ(raw_next_budget(state(20, 10, 0.9, 0.001, 0.5)), 18.51);
    EXPECT_EQ(next_neuron_count(state(20, 10, 0.9, 0.001, 0.5)), 19u);
    EXPECT_EQ(next_neuron_count(state(2, 0, 0.5, 0.0, 0.0)), 2u);
    EXPECT_EQ(next_neuron_count(state(10, 0, 1.0, 0.0, 0.5)), 11u);  // 10.5 rounds half up
}

TEST(Recurrence, CapClampsToUpperLimit) {
    EXPECT_EQ(next_neuron_count(state(150, 0, 1.0, 0.0, 250.0)), 150u);
    EXPECT_DOUBLE_EQ(next_budget(state(150, 0, 1.0, 0.0, 250.0)), 150.0);
    EXPECT_EQ(next_neuron_count(state(100, 5, 1.5, 1.0, 0.0)), 150u);
}

TEST(Recurrence, RejectsNonFiniteInputs) {
    EXPECT_THROW(raw_next_budget(state(10, NAN, 0.9, 0.001, 0.5)), std::invalid_argument);
    EXPECT_THROW(raw_next_budget(state(10, 1, INFINITY, 0.001, 0.5)), std::invalid_argument);
}

TEST(Recurrence, ConvergesToFixedPointBand) {
    for (int n0 = 2; n0 <= 150; ++n0) {
        auto s = state(n0, 10.0, 0.9, 0.001, 0.5);
        for (int t = 0; t < 100; ++t) s.budget = next_budget(s);
        EXPECT_NEAR(s.budget, 5.1, 0.02) << n0;
        EXPECT_EQ(clamp_count(s.budget, 2, 150), 5u);
    }
}

TEST(Recurrence, ClampCountBounds) {
    EXPECT_EQ(clamp_count(-3.0, 2, 150), 2u);
    EXPECT_EQ(clamp_count(1e9, 2, 150), 150u);
    EXPECT_EQ(clamp_count(4.5, 2, 150), 5u);
    EXPECT_EQ(clamp_count(4.49, 2, 150), 4u);
}

TEST(FactorGrid, Examples) {
    EXPECT_EQ(factor_grid(12), (GridShape{3, 4}));
    EXPECT_EQ(factor_grid(16), (GridShape{4, 4}));
    EXPECT_EQ(factor_grid(13), (GridShape{3, 4}));
    EXPECT_EQ(factor_grid(2), (GridShape{1, 2}));
    EXPECT_EQ(factor_grid(3), (GridShape{1, 3}));
    EXPECT_EQ(factor_grid(150), (GridShape{10, 15}));
}

TEST(FactorGrid, AspectBoundAndNearestBudget) {
    for (std::size_t n = 2; n <= 150; ++n) {
        const auto g = factor_grid(n);
        EXPECT_LE(g.n1, g.n2);
        EXPECT_LE(g.n2, 3 * g.n1) << n;
        EXPECT_GE(g.neurons(), 2u);
        EXPECT_LE(g.neurons(), 150u);
        // no admissible grid lies strictly closer to n
        const std::size_t gap = g.neurons() > n ? g.neurons() - n : n - g.neurons();
        for (std::size_t m = 2; m <= 150; ++m) {
            const std::size_t d = m > n ? m - n : n - m;
            if (d >= gap) continue;
            const auto sq = squarest_factors(m);
            EXPECT_GT(sq.n2, 3 * sq.n1) << "budget " << n << " candidate " << m;
        }
    }
}

TEST(RunConfig, Validation) {
    auto c = RunConfig::sonfis_defaults();
    EXPECT_NO_THROW(c.validate());
    c.steps = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = RunConfig::sonfis_defaults();
    c.n0 = 151;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = RunConfig::sonfis_defaults();
    c.n_min = 1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    const auto s = RunConfig::sorst_defaults();
    EXPECT_EQ(s.steps, 9u);
    EXPECT_DOUBLE_EQ(s.alpha, 0.8);
    EXPECT_DOUBLE_EQ(s.gamma, 1.0);
}

TEST(Sonfis, FrozenBudgetKeepsGrid) {
    auto cfg = RunConfig::sonfis_defaults();
    cfg.steps = 6;
    cfg.alpha = 1.0;
    cfg.beta = 0.0;
    cfg.gamma = 0.0;
    cfg.n0 = 9;
    const auto trace = run_sonfis(cfg, data().train, data().test);
    ASSERT_EQ(trace.steps.size(), 6u);
    for (const auto& s : trace.steps) {
        EXPECT_EQ(s.budget, 9u);
        EXPECT_EQ(s.n1, 3u);
        EXPECT_EQ(s.n2, 3u);
        EXPECT_TRUE(std::isfinite(s.error));
        EXPECT_GE(s.error, 0.0);
    }
    ASSERT_TRUE(trace.final_model.has_value());
    EXPECT_EQ(trace.final_model->n_rules, 2u);
}

TEST(Sonfis, TraceFollowsRecurrence) {
    auto cfg = RunConfig::sonfis_defaults();
    cfg.steps = 8;
    const auto trace = run_sonfis(cfg, data().train, data().test);
    for (std::size_t t = 0; t + 1 < trace.steps.size(); ++t) {
        const auto& s = trace.steps[t];
        const double next = std::clamp(cfg.alpha * s.budget_real + cfg.beta * s.error + cfg.gamma, 2.0, 150.0);
        EXPECT_DOUBLE_EQ(trace.steps[t + 1].budget_real, next);
        EXPECT_EQ(trace.steps[t + 1].budget, clamp_count(next, 2, 150));
        EXPECT_EQ(s.neurons, s.n1 * s.n2);
        const bool adjusted = std::find(s.flags.begin(), s.flags.end(), "budget_adjusted") != s.flags.end();
        EXPECT_EQ(adjusted, s.neurons != s.budget);
    }
}

TEST(Sonfis, DeterministicTrace) {
    auto cfg = RunConfig::sonfis_defaults();
    cfg.steps = 5;
    const auto a = trace_csv(run_sonfis(cfg, data().train, data().test));
    EXPECT_EQ(a, trace_csv(run_sonfis(cfg, data().train, data().test)));
    cfg.seed = 2;
    EXPECT_NE(a, trace_csv(run_sonfis(cfg, data().train, data().test)));
}

TEST(Sonfis, ReducedRulesOnTinyGrid) {
    auto cfg = RunConfig::sonfis_defaults();
    cfg.steps = 2;
    cfg.n_rules = 5;
    cfg.alpha = 0.0;
    cfg.gamma = 2.0;
    cfg.n0 = 2;
    const auto trace = run_sonfis(cfg, data().train, data().test);
    for (const auto& s : trace.steps) {
        EXPECT_EQ(s.rules, 2u);
        EXPECT_NE(std::find(s.flags.begin(), s.flags.end(), "rules_reduced"), s.flags.end());
        EXPECT_NE(std::find(s.flags.begin(), s.flags.end(), "least_norm"), s.flags.end());
    }
}

TEST(Sorst, ErrorWithinLabelRange) {
    const auto cfg = RunConfig::sorst_defaults();
    const auto trace = run_sorst(cfg, data().train, data().test);
    ASSERT_EQ(trace.steps.size(), 9u);
    for (const auto& s : trace.steps) {
        EXPECT_GE(s.error, 0.0);
        EXPECT_LE(s.error, 4.0);
        EXPECT_GE(s.rules, 1u);
    }
    ASSERT_TRUE(trace.final_rules.has_value());
    EXPECT_EQ(trace.final_rules->decision_classes, 3u);
}

TEST(Sorst, ModeMismatchRejected) {
    EXPECT_THROW(run_sorst(RunConfig::sonfis_defaults(), data().train, data().test), std::invalid_argument);
    EXPECT_THROW(run_sonfis(RunConfig::sorst_defaults(), data().train, data().test), std::invalid_argument);
}

TEST(Trace, CsvLayout) {
    RunTrace t;
    StepRecord r;
    r.t = 0;
    r.budget = 13;
    r.neurons = 12;
    r.n1 = 3;
    r.n2 = 4;
    r.error = 0.25;
    r.flags = {"budget_adjusted", "clamped"};
    t.steps.push_back(r);
    EXPECT_EQ(trace_csv(t), "t,N_budget,N_actual,n1,n2,E,dead_neurons,flags\n0,13,12,3,4,0.25,0,budget_adjusted|clamped\n");
}
