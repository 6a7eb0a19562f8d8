#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "generators.hpp"
#include "oracles.hpp"
#include "sonfis/rst.hpp"

using namespace sonfis;

namespace {

std::vector<std::vector<std::size_t>> sorted_blocks(Partition p) {
    for (auto& b : p) std::sort(b.begin(), b.end());
    std::sort(p.begin(), p.end());
    return p;
}

InformationSystem small_system() {
    return InformationSystem::from_symbols({{0, 0}, {0, 1}, {1, 0}}, {0, 1, 1}, 3, 2);
}

}  // namespace

TEST(Indiscernibility, MatchesPairwiseDefinition) {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = gen::information_system(rng);
        for (std::uint64_t b = 0; b < 8; ++b) {
            const auto attrs = gen::subset_list(b);
            EXPECT_EQ(sorted_blocks(indiscernibility(r.system, b)), sorted_blocks(oracle::partition(r.objects, attrs)));
        }
    }
}

TEST(Indiscernibility, EmptyAttributeSetIsOneBlock) {
    const auto s = small_system();
    EXPECT_EQ(indiscernibility(s, AttrSet{0}).size(), 1u);
    const std::vector<std::size_t> bad{5};
    EXPECT_THROW(indiscernibility(s, std::span<const std::size_t>(bad)), std::out_of_range);
}

TEST(Approximations, MatchBruteForce) {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = gen::information_system(rng);
        const std::size_t n = r.objects.size();
        std::vector<bool> in_x(n);
        std::vector<std::size_t> target;
        for (std::size_t i = 0; i < n; ++i)
            if ((in_x[i] = rng.uniform() < 0.5)) target.push_back(i);
        for (std::uint64_t b = 0; b < 8; ++b) {
            const auto attrs = gen::subset_list(b);
            const auto got = lower_upper(r.system, attrs, target);
            const auto [lower, upper] = oracle::approximations(r.objects, attrs, in_x);
            EXPECT_EQ(got.lower, lower);
            EXPECT_EQ(got.upper, upper);
        }
    }
}

TEST(Approximations, MonotoneInAttributes) {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = gen::information_system(rng, 8, 4);
        std::vector<std::size_t> target;
        for (std::size_t i = 0; i < r.objects.size(); ++i)
            if (rng.uniform() < 0.5) target.push_back(i);
        for (std::uint64_t b = 0; b < 16; ++b)
            for (std::uint64_t b2 = b; b2 < 16; b2 = (b2 + 1) | b) {
                const auto small = lower_upper(r.system, gen::subset_list(b), target);
                const auto big = lower_upper(r.system, gen::subset_list(b2), target);
                EXPECT_TRUE(std::includes(big.lower.begin(), big.lower.end(), small.lower.begin(), small.lower.end()));
                EXPECT_TRUE(std::includes(small.upper.begin(), small.upper.end(), big.upper.begin(), big.upper.end()));
                EXPECT_TRUE(std::includes(target.begin(), target.end(), big.lower.begin(), big.lower.end()));
                EXPECT_TRUE(std::includes(big.upper.begin(), big.upper.end(), target.begin(), target.end()));
            }
    }
}

TEST(DiscernibilityMatrix, BothModesMatchBruteForce) {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = gen::information_system(rng);
        for (bool rel : {false, true}) {
            const auto m = discernibility_matrix(r.system, rel);
            for (std::size_t i = 0; i < r.objects.size(); ++i)
                for (std::size_t j = 0; j < r.objects.size(); ++j) {
                    const bool skip = i == j || (rel && r.decisions[i] == r.decisions[j]);
                    const std::uint64_t expected = skip ? 0 : oracle::mask_of(oracle::differing(r.objects, i, j));
                    EXPECT_EQ(m.at(i, j), expected);
                }
        }
    }
}

TEST(Cnf, AbsorptionDropsSupersetsAndDuplicates) {
    EXPECT_EQ(detail::absorb({0b011, 0b001, 0b111, 0b001, 0b110}), (std::vector<AttrSet>{0b001, 0b110}));
    DiscernibilityMatrix m(3);
    m.set(1, 0, 0b011);
    m.set(2, 0, 0b001);
    m.set(2, 1, 0b011);
    const auto f = discernibility_function(m, 2);
    EXPECT_EQ(f.clauses, (std::vector<AttrSet>{0b001}));
}

TEST(Cnf, PrimeImplicantsMatchHittingSets) {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 1 + rng.index(8);
        const auto clauses = gen::clauses(rng, m, rng.index(7));
        const auto got = prime_implicants(Cnf{m, clauses});
        EXPECT_EQ(got, oracle::minimal_hitting_sets(clauses, m));
    }
}

TEST(Cnf, ImplicantsReproduceTruthTable) {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 2 + rng.index(5);
        const Cnf f{m, gen::clauses(rng, m, 1 + rng.index(5))};
        const auto dnf = prime_implicants(f);
        for (AttrSet s = 0; s < (AttrSet{1} << m); ++s) {
            const bool dnf_true = std::any_of(dnf.begin(), dnf.end(), [&](AttrSet t) { return (t & s) == t; });
            EXPECT_EQ(f.evaluate(s), dnf_true);
        }
    }
}

TEST(Cnf, EmptyCnfHasEmptyImplicant) {
    EXPECT_EQ(prime_implicants(Cnf{3, {}}), (std::vector<AttrSet>{0}));
}

TEST(Cnf, ExactLimitAndGreedyFallback) {
    Rng rng(7);
    const auto clauses = gen::clauses(rng, 30, 12);
    const Cnf f{30, clauses};
    EXPECT_THROW(prime_implicants(f), std::invalid_argument);
    const AttrSet g = greedy_implicant(f);
    EXPECT_TRUE(f.evaluate(g));
    for (auto a : attr_list(g)) EXPECT_FALSE(f.evaluate(g & ~attr_bit(a)));
    EXPECT_THROW(greedy_implicant(Cnf{3, {0}}), std::invalid_argument);
}

TEST(Rules, SmallTableExample) {
    const auto rs = induce_rules(small_system());
    ASSERT_EQ(rs.rules.size(), 3u);
    std::ostringstream text;
    write_rules_text(text, rs);
    EXPECT_EQ(text.str(),
              "a1=low AND a2=low => d=low (support=1)\n"
              "a2=middle => d=high (support=1)\n"
              "a1=middle => d=high (support=1)\n");
    std::ostringstream csv;
    write_rules_csv(csv, rs);
    EXPECT_EQ(csv.str(), "a1,a2,d,support\n0,0,0,1\n,1,1,1\n1,,1,1\n");
}

TEST(Rules, SupportMergesIdenticalRules) {
    const auto s = InformationSystem::from_symbols({{0, 0}, {0, 1}, {1, 1}}, {0, 0, 1});
    const auto rs = induce_rules(s);
    // objects 0 and 1 both yield a1=0 => 0
    ASSERT_EQ(rs.rules.size(), 3u);
    EXPECT_EQ(rs.rules[0].support, 2u);
    EXPECT_EQ(rs.rules[0].decision, 0);
    EXPECT_EQ(rs.rules[0].descriptors, (std::vector<Descriptor>{{0, 0}}));
    EXPECT_EQ(rs.rules[1].support, 1u);
    EXPECT_EQ(rs.rules[2].decision, 1);
}

TEST(Rules, MatchObjectLocalHittingSets) {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = gen::information_system(rng);
        std::map<std::pair<std::vector<Descriptor>, int>, std::size_t> expected;
        for (std::size_t i = 0; i < r.objects.size(); ++i) {
            std::vector<std::uint64_t> clauses;
            for (std::size_t j = 0; j < r.objects.size(); ++j) {
                if (r.decisions[i] == r.decisions[j]) continue;
                const auto c = oracle::mask_of(oracle::differing(r.objects, i, j));
                if (c) clauses.push_back(c);
            }
            for (auto h : oracle::minimal_hitting_sets(clauses, 3)) {
                std::vector<Descriptor> d;
                for (auto a : gen::subset_list(h)) d.push_back({a, r.objects[i][a]});
                ++expected[{d, r.decisions[i]}];
            }
        }
        std::map<std::pair<std::vector<Descriptor>, int>, std::size_t> got;
        for (const auto& rule : induce_rules(r.system).rules) got[{rule.descriptors, rule.decision}] += rule.support;
        EXPECT_EQ(got, expected);
    }
}

TEST(Rules, ConsistentTrainingObjectsClassifyCorrectly) {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = gen::information_system(rng);
        const auto rs = induce_rules(r.system);
        for (std::size_t i = 0; i < r.objects.size(); ++i) {
            bool consistent = true;
            for (std::size_t j = 0; j < r.objects.size(); ++j)
                if (r.objects[i] == r.objects[j] && r.decisions[i] != r.decisions[j]) consistent = false;
            if (consistent) EXPECT_EQ(classify(rs, r.system.object(i)), r.decisions[i]);
        }
    }
}

TEST(Classify, ConflictsResolveToHighestDecision) {
    RuleSet rs;
    rs.n_attributes = 2;
    rs.rules = {Rule{{{0, 1}}, 0, 1}, Rule{{{1, 1}}, 2, 1}, Rule{{{0, 0}}, 1, 1}};
    const std::vector<int> obj{1, 1};
    EXPECT_EQ(classify(rs, obj), 2);
}

TEST(Classify, NearestRuleFallback) {
    const auto rs = induce_rules(small_system());
    const std::vector<int> unseen{2, 2};
    EXPECT_EQ(classify(rs, unseen), 1);
    const std::vector<int> exact{0, 0};
    EXPECT_EQ(classify(rs, exact), 0);
    EXPECT_THROW(classify(RuleSet{}, exact), std::invalid_argument);
}

TEST(Mse, LabelDifference) {
    EXPECT_DOUBLE_EQ(mse(std::vector<int>{2}, std::vector<int>{0}), 4.0);
    EXPECT_DOUBLE_EQ(mse(std::vector<int>{0, 1, 2}, std::vector<int>{0, 1, 2}), 0.0);
    EXPECT_THROW(mse(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
}

TEST(Mse, BoundedBySquaredClassSpan) {
    Rng rng(10);
    for (int trial = 0; trial < 50; ++trial) {
        const auto train = gen::information_system(rng);
        const auto test = gen::information_system(rng);
        const double e = mse(induce_rules(train.system), test.system);
        EXPECT_GE(e, 0.0);
        EXPECT_LE(e, 4.0);
    }
}

TEST(InformationSystem, FromDiscretizedTable) {
    const DataTable t({"x", "y", "lugeon"}, {{0.1, 0.9, 0.5}, {0.7, 0.2, 0.1}});
    const std::vector<Discretizer1D> ds{Discretizer1D(0, {0.5}), Discretizer1D(1, {0.3, 0.6}), Discretizer1D(2, {0.3})};
    const auto s = build_information_system(t, ds);
    EXPECT_EQ(s.values, (std::vector<int>{0, 2, 1, 0}));
    EXPECT_EQ(s.decisions, (std::vector<int>{1, 0}));
    EXPECT_EQ(s.symbol_counts, (std::vector<std::size_t>{2, 3}));
    EXPECT_EQ(s.decision_name, "lugeon");
    EXPECT_THROW(build_information_system(t, {ds[0]}), std::invalid_argument);
}
