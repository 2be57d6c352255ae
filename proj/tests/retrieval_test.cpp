// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/llm/hashed_embedder.hpp"
#include "labyrinth/retrieval/rules.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

namespace labyrinth::retrieval {
namespace {

TEST(Cosine, Basics) {
    EXPECT_DOUBLE_EQ(cosine({3, 4}, {3, 4}), 1.0);
    EXPECT_DOUBLE_EQ(cosine({1, 0}, {0, 5}), 0.0);
    EXPECT_NEAR(cosine({1, 0}, {1, 1}), 0.70711, 1e-5);
    EXPECT_NEAR(cosine({1, 0}, {1, 1}), 1.0 / std::sqrt(2.0), 1e-9);
    EXPECT_DOUBLE_EQ(cosine({1, 2}, {-1, -2}), -1.0);
    EXPECT_THROW(cosine({0, 0}, {1, 1}), Error);
    EXPECT_THROW(cosine({1, 0}, {1, 0, 0}), Error);
}

TEST(TopK, HandBuiltScores) {
    const auto r = top_k({0.9, 0.2, 0.8}, 2);
    EXPECT_EQ(r.ids(), (std::vector<std::size_t>{0, 2}));
    EXPECT_FALSE(r.clipped);
    EXPECT_EQ(r.ranked[1].score, 0.8);
}

TEST(TopK, TiesByAscendingId) {
    EXPECT_EQ(top_k({0.5, 0.7, 0.5, 0.7}, 4).ids(), (std::vector<std::size_t>{1, 3, 0, 2}));
}

TEST(TopK, KLargerThanStoreReturnsAllFlagged) {
    const auto r = top_k({0.1, 0.3}, 5);
    EXPECT_EQ(r.ids(), (std::vector<std::size_t>{1, 0}));
    EXPECT_TRUE(r.clipped);
    EXPECT_THROW(top_k({0.1}, 0), Error);
}

TEST(MaxPool, SingleQueryEqualsColumn) {
    const std::vector<Vector> rules = {{1, 0}, {1, 1}, {0, 1}};
    const std::vector<Vector> query = {{2, 1}};
    const auto pooled = max_pooled_scores(rules, query);
    for (std::size_t i = 0; i < rules.size(); ++i) EXPECT_EQ(pooled[i], cosine(rules[i], query[0]));
    EXPECT_THROW(max_pooled_scores(rules, {}), Error);
}

TEST(MaxPool, TakesBestQuery) {
    const RuleStore store({"a", "b", "c"}, {{1, 0}, {0, 1}, {1, 1}});
    const auto r = top_k_rules(store, std::vector<Vector>{{1, 0}, {0, 1}}, 3);
    EXPECT_EQ(r.ids(), (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_DOUBLE_EQ(r.ranked[0].score, 1.0);
    EXPECT_DOUBLE_EQ(r.ranked[1].score, 1.0);
    EXPECT_EQ(store.texts(r), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(RuleStore, RejectsZeroVectorsAndCountMismatch) {
    EXPECT_THROW(RuleStore({"a"}, std::vector<Vector>{{0, 0}}), Error);
    EXPECT_THROW(RuleStore({"a", "b"}, std::vector<Vector>{{1, 0}}), Error);
}

TEST(RuleStore, LoadsBundledSummary) {
    llm::HashedEmbedder embedder;
    const auto store = RuleStore::load(testing::data_dir() + "/rules/rule_summary.txt", embedder);
    EXPECT_GE(store.size(), 40u);
    EXPECT_LE(store.size(), 60u);
    const auto r = top_k_rules(store, {"I roll two dice because my trait helps, do I keep the higher die?"}, 5,
                               embedder);
    ASSERT_EQ(r.ranked.size(), 5u);
    const auto texts = store.texts(r);
    EXPECT_TRUE(std::any_of(texts.begin(), texts.end(),
                            [](const std::string& t) { return t.find("keeps the higher") != std::string::npos; }));
    EXPECT_THROW(RuleStore::load("/nonexistent/rules.txt", embedder), Error);
}

// Random stores with exact ties: duplicate rules and power-of-two rescaled
// copies score identically to their originals.
struct Instance {
    std::vector<Vector> rules;
    std::vector<Vector> queries;
    std::size_t k = 1;
};

Instance random_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> r_dist(1, 50), q_dist(1, 5), k_dist(1, 10), dim_dist(2, 12), coin(0, 3);
    std::uniform_int_distribution<int> entry(-3, 3);
    Instance inst;
    const int dim = dim_dist(rng);
    auto random_vector = [&] {
        Vector v(dim);
        do {
            for (auto& x : v) x = entry(rng);
        } while (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }));
        return v;
    };
    const int r = r_dist(rng);
    for (int i = 0; i < r; ++i) {
        if (!inst.rules.empty() && coin(rng) == 0) {
            Vector copy = inst.rules[std::uniform_int_distribution<std::size_t>(0, inst.rules.size() - 1)(rng)];
            if (coin(rng) < 2) {
                for (auto& x : copy) x *= 2.0;
            }
            inst.rules.push_back(copy);
        } else {
            inst.rules.push_back(random_vector());
        }
    }
    const int q = q_dist(rng);
    for (int i = 0; i < q; ++i) inst.queries.push_back(random_vector());
    inst.k = static_cast<std::size_t>(k_dist(rng));
    return inst;
}

TEST(RetrievalProperties, MatchesBruteForceOracle) {
    std::mt19937_64 rng(404);
    int ties_seen = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const Instance inst = random_instance(rng);
        const RuleStore store(std::vector<std::string>(inst.rules.size(), "rule"), inst.rules);
        const auto got = top_k_rules(store, inst.queries, inst.k);
        const auto expected = oracle::brute_force_top_k(inst.rules, inst.queries, inst.k);
        ASSERT_EQ(got.ranked.size(), expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            EXPECT_EQ(got.ranked[i].id, expected[i].first) << "trial " << trial << " rank " << i;
            EXPECT_EQ(got.ranked[i].score, expected[i].second);
            if (i > 0 && got.ranked[i].score == got.ranked[i - 1].score) ++ties_seen;
        }
        EXPECT_EQ(got.clipped, inst.k > inst.rules.size());
    }
    EXPECT_GT(ties_seen, 50);
}

TEST(RetrievalProperties, DuplicateQueryIsIdempotent) {
    std::mt19937_64 rng(405);
    for (int trial = 0; trial < 200; ++trial) {
        Instance inst = random_instance(rng);
        const RuleStore store(std::vector<std::string>(inst.rules.size(), "rule"), inst.rules);
        const auto base = top_k_rules(store, inst.queries, inst.k);
        inst.queries.push_back(inst.queries.front());
        EXPECT_EQ(top_k_rules(store, inst.queries, inst.k).ranked, base.ranked);
    }
}

TEST(RetrievalProperties, AddingQueryNeverLowersPooledScore) {
    std::mt19937_64 rng(406);
    for (int trial = 0; trial < 200; ++trial) {
        Instance inst = random_instance(rng);
        const auto before = max_pooled_scores(inst.rules, inst.queries);
        Vector extra = inst.rules[static_cast<std::size_t>(trial) % inst.rules.size()];
        extra[0] += 1.0;
        if (std::all_of(extra.begin(), extra.end(), [](double x) { return x == 0.0; })) extra[1] = 1.0;
        inst.queries.push_back(extra);
        const auto after = max_pooled_scores(inst.rules, inst.queries);
        for (std::size_t i = 0; i < before.size(); ++i) EXPECT_GE(after[i], before[i]);
    }
}

}  // namespace
}  // namespace labyrinth::retrieval
