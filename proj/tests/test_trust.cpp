#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "feedback_lab/trust.hpp"

using namespace feedback_lab;

TEST_CASE("update_trust counts totals and agreements per agent") {
    TrustTable table(2);
    const std::vector<LabelId> labels = {0, 1};
    const std::vector<FeedbackRecord> feedback = {{0, 0}, {0, 2}};
    update_trust(table, labels, feedback);
    REQUIRE(table.agents[0].agreements == 1);
    REQUIRE(table.agents[0].total == 2);
    REQUIRE(table.agents[1].agreements == 0);
    REQUIRE(table.agents[1].total == 0);

    SECTION("empty updates are no-ops") {
        TrustTable before = table;
        update_trust(table, std::vector<LabelId>{}, std::vector<FeedbackRecord>{});
        REQUIRE(table.agents[0].agreements == before.agents[0].agreements);
        REQUIRE(table.agents[0].total == before.agents[0].total);
    }
    SECTION("length mismatch is a data error") {
        const std::vector<LabelId> one = {0};
        REQUIRE_THROWS_AS(update_trust(table, one, feedback), DataError);
    }
    SECTION("agent index out of range is a data error") {
        const std::vector<LabelId> one = {0};
        const std::vector<FeedbackRecord> bad = {{7, 0}};
        REQUIRE_THROWS_AS(update_trust(table, one, bad), DataError);
    }
}

TEST_CASE("a perfect classifier with reliable feedback agrees every time") {
    TrustTable table(1);
    const std::vector<LabelId> labels = {2, 0, 1, 2};
    std::vector<FeedbackRecord> feedback;
    for (const LabelId l : labels) feedback.push_back({0, l});
    update_trust(table, labels, feedback);
    REQUIRE(table.agents[0].agreements == table.agents[0].total);
}

TEST_CASE("update_trust is additive across calls") {
    const std::vector<LabelId> labels = {0, 1, 1, 0, 2};
    const std::vector<FeedbackRecord> feedback = {{0, 0}, {1, 0}, {0, 1}, {1, 0}, {0, 2}};

    TrustTable once(2);
    update_trust(once, labels, feedback);

    TrustTable twice(2);
    update_trust(twice, std::vector<LabelId>(labels.begin(), labels.begin() + 2),
                 std::vector<FeedbackRecord>(feedback.begin(), feedback.begin() + 2));
    update_trust(twice, std::vector<LabelId>(labels.begin() + 2, labels.end()),
                 std::vector<FeedbackRecord>(feedback.begin() + 2, feedback.end()));

    for (std::size_t a = 0; a < 2; ++a) {
        REQUIRE(once.agents[a].agreements == twice.agents[a].agreements);
        REQUIRE(once.agents[a].total == twice.agents[a].total);
        REQUIRE(once.agents[a].agreements <= once.agents[a].total);
    }
}

TEST_CASE("trust scores are agreement fractions with an optimistic default") {
    TrustTable table(3);
    table.agents[0] = {3, 4};
    table.agents[2] = {0, 7};
    REQUIRE(trust_score(table, 0) == 0.75);
    REQUIRE(trust_score(table, 1) == 1.0);  // never sampled
    REQUIRE(trust_score(table, 2) == 0.0);
    REQUIRE_THROWS_AS(trust_score(table, 5), DataError);
}

TEST_CASE("mean pruning accepts agents strictly above the pool mean") {
    TrustTable table(3);
    // scores 1.0 (default), 0.2, 0.9 -> mean 0.7
    table.agents[1] = {1, 5};
    table.agents[2] = {9, 10};
    const TrustCondition cond = TrustCondition::mean_prune();
    REQUIRE(condition_accepts(cond, table, 0, 3));
    REQUIRE(!condition_accepts(cond, table, 1, 3));
    REQUIRE(condition_accepts(cond, table, 2, 3));

    SECTION("all-equal scores accept no one") {
        TrustTable equal(4);
        for (auto& a : equal.agents) a = {2, 4};
        for (std::uint32_t i = 0; i < 4; ++i)
            REQUIRE(!condition_accepts(cond, equal, i, 4));
    }
}

TEST_CASE("threshold pruning is a strict cut at c") {
    TrustTable table(2);
    table.agents[0] = {1, 4};    // 0.25
    table.agents[1] = {31, 100};  // 0.31
    const TrustCondition cond = TrustCondition::threshold_prune(0.3);
    REQUIRE(!condition_accepts(cond, table, 0, 2));
    REQUIRE(condition_accepts(cond, table, 1, 2));
    REQUIRE_THROWS_AS(TrustCondition::threshold_prune(1.5), ConfigError);
    REQUIRE_THROWS_AS(TrustCondition::threshold_prune(-0.1), ConfigError);
}

TEST_CASE("trust_all and oracle_reliable ignore the scores") {
    TrustTable table(3);
    table.agents[0] = {0, 10};  // score 0 everywhere
    table.agents[1] = {0, 10};
    table.agents[2] = {10, 10};

    const TrustCondition all = TrustCondition::trust_all();
    for (std::uint32_t i = 0; i < 3; ++i) REQUIRE(condition_accepts(all, table, i, 3));

    const TrustCondition oracle = TrustCondition::oracle_reliable({0, 1});
    REQUIRE(condition_accepts(oracle, table, 0, 3));
    REQUIRE(condition_accepts(oracle, table, 1, 3));
    REQUIRE(!condition_accepts(oracle, table, 2, 3));
}
