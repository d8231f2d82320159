#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "feedback_lab/scheme.hpp"
#include "feedback_lab/trials.hpp"

using namespace feedback_lab;

namespace {

struct Fixture {
    Dataset dataset = synthesize_corpus(3, 40, 30, 10, 0.9, 17);
    ChunkPlan plan = shuffle_partition(dataset, 4, 23);

    ChunkView chunk(std::size_t c) const {
        ChunkView view;
        for (const auto i : plan.chunks[c]) view.push_back(&dataset.vectors[i]);
        return view;
    }
    std::vector<LabelId> truths(std::size_t c) const {
        std::vector<LabelId> out;
        for (const auto i : plan.chunks[c]) out.push_back(dataset.truth[i]);
        return out;
    }
    MultinomialNB pretrained() const {
        MultinomialNB model(dataset.label_space, 30, 1.0);
        const ChunkView docs = chunk(0);
        const std::vector<LabelId> labels = truths(0);
        model.partial_fit(std::span<const FeatureVector* const>(docs),
                          std::span<const LabelId>(labels));
        return model;
    }
};

std::vector<FeedbackRecord> reliable_feedback(const std::vector<LabelId>& truths,
                                              std::uint32_t agent) {
    std::vector<FeedbackRecord> feedback;
    for (const LabelId t : truths) feedback.push_back({agent, t});
    return feedback;
}

}  // namespace

TEST_CASE("make_scheme wires names, conditions, and burn-in") {
    const Fixture fix;
    const AgentPool pool = AgentPool::make({Agent::make_reliable(), Agent::make_noisy()}, 3);

    const SchemeState trusting = make_scheme(SchemeKind::trusting, 0.3, 0, fix.pretrained(), pool);
    REQUIRE(trusting.config.name == "TrustingNB");
    REQUIRE(trusting.config.condition.kind == TrustCondition::Kind::trust_all);

    const SchemeState discerning =
        make_scheme(SchemeKind::discerning, 0.3, 0, fix.pretrained(), pool);
    REQUIRE(discerning.config.name == "DiscerningNB");
    REQUIRE(discerning.config.condition.reliable_set == pool.reliable_set);

    const SchemeState threshold =
        make_scheme(SchemeKind::threshold_prune, 0.3, 3, fix.pretrained(), pool);
    REQUIRE(threshold.config.name == "ThresholdPruneNB");
    REQUIRE(threshold.config.condition.threshold == 0.3);
    REQUIRE(threshold.config.burn_in == 3);

    const SchemeState mean = make_scheme(SchemeKind::mean_prune, 0.3, 0, fix.pretrained(), pool);
    REQUIRE(mean.config.name == "MeanPruneNB");
    REQUIRE(mean.config.burn_in == 0);
}

TEST_CASE("a trust_all scheme accepts every datapoint at every stage") {
    const Fixture fix;
    const AgentPool pool = AgentPool::make({Agent::make_reliable(), Agent::make_noisy()}, 3);
    SchemeState state = make_scheme(SchemeKind::trusting, 0.3, 0, fix.pretrained(), pool);
    SplitMix64 rng(3);
    for (std::size_t c = 1; c < 4; ++c) {
        const ChunkView chunk = fix.chunk(c);
        const auto truths = fix.truths(c);
        const auto feedback = collect_feedback(pool, truths, rng);
        const StageOutcome outcome = run_stage(state, chunk, feedback);
        REQUIRE(outcome.accepted.size() == chunk.size());
        REQUIRE(outcome.feedback_count == chunk.size());
    }
}

TEST_CASE("burn-in disables filtering for exactly the first stages") {
    const Fixture fix;
    const AgentPool pool = AgentPool::make({Agent::make_reliable()}, 3);
    // threshold 1.0 rejects everyone once filtering starts (score is never > 1)
    SchemeState state = make_scheme(SchemeKind::threshold_prune, 1.0, 3, fix.pretrained(), pool);

    const ChunkView chunk = fix.chunk(1);
    const auto truths = fix.truths(1);
    const auto feedback = reliable_feedback(truths, 0);
    for (int stage = 0; stage < 3; ++stage) {
        const StageOutcome outcome = run_stage(state, chunk, feedback);
        REQUIRE(outcome.accepted.size() == chunk.size());
    }
    const StageOutcome filtered = run_stage(state, chunk, feedback);
    REQUIRE(filtered.accepted.empty());
    REQUIRE(state.stage_counter == 4);
}

TEST_CASE("an oracle scheme accepts exactly the reliably-sourced datapoints") {
    const Fixture fix;
    std::vector<Agent> members;
    for (int i = 0; i < 4; ++i) members.push_back(Agent::make_reliable());
    members.push_back(Agent::make_confused({1, 2, 0}, 3));
    const AgentPool pool = AgentPool::make(std::move(members), 3);

    SchemeState state = make_scheme(SchemeKind::discerning, 0.3, 0, fix.pretrained(), pool);
    const ChunkView chunk = fix.chunk(1);
    const auto truths = fix.truths(1);
    SplitMix64 rng(11);
    const auto feedback = collect_feedback(pool, truths, rng);
    const StageOutcome outcome = run_stage(state, chunk, feedback);

    std::vector<std::uint32_t> expected;
    for (std::uint32_t u = 0; u < feedback.size(); ++u)
        if (feedback[u].agent_index < 4) expected.push_back(u);
    REQUIRE(outcome.accepted == expected);
}

TEST_CASE("stage predictions are independent of the stage's feedback") {
    const Fixture fix;
    const AgentPool pool = AgentPool::make({Agent::make_reliable(), Agent::make_noisy()}, 3);
    const SchemeState base = make_scheme(SchemeKind::mean_prune, 0.3, 0, fix.pretrained(), pool);

    const ChunkView chunk = fix.chunk(1);
    const auto truths = fix.truths(1);
    std::vector<FeedbackRecord> noisy_feedback;
    for (std::size_t u = 0; u < truths.size(); ++u)
        noisy_feedback.push_back({1, static_cast<LabelId>(u % 3)});

    SchemeState with_truth = base;
    SchemeState with_noise = base;
    const StageOutcome a = run_stage(with_truth, chunk, reliable_feedback(truths, 0));
    const StageOutcome b = run_stage(with_noise, chunk, noisy_feedback);
    REQUIRE(a.predictions == b.predictions);
}

TEST_CASE("with a reliable-only pool, trusting and discerning stay identical") {
    const Fixture fix;
    std::vector<Agent> members(3, Agent::make_reliable());
    const AgentPool pool = AgentPool::make(std::move(members), 3);

    SchemeState trusting = make_scheme(SchemeKind::trusting, 0.3, 0, fix.pretrained(), pool);
    SchemeState discerning = make_scheme(SchemeKind::discerning, 0.3, 0, fix.pretrained(), pool);
    SplitMix64 rng(29);
    for (std::size_t c = 1; c < 4; ++c) {
        const ChunkView chunk = fix.chunk(c);
        const auto truths = fix.truths(c);
        const auto feedback = collect_feedback(pool, truths, rng);
        const StageOutcome a = run_stage(trusting, chunk, feedback);
        const StageOutcome b = run_stage(discerning, chunk, feedback);
        REQUIRE(a.accepted == b.accepted);
        REQUIRE(a.predictions == b.predictions);
    }
}

TEST_CASE("run_stage is deterministic and validates alignment") {
    const Fixture fix;
    const AgentPool pool = AgentPool::make({Agent::make_reliable(), Agent::make_noisy()}, 3);
    const SchemeState base =
        make_scheme(SchemeKind::threshold_prune, 0.3, 1, fix.pretrained(), pool);

    const ChunkView chunk = fix.chunk(1);
    const auto truths = fix.truths(1);
    const auto feedback = reliable_feedback(truths, 0);

    SchemeState a = base;
    SchemeState b = base;
    const StageOutcome oa = run_stage(a, chunk, feedback);
    const StageOutcome ob = run_stage(b, chunk, feedback);
    REQUIRE(oa.predictions == ob.predictions);
    REQUIRE(oa.accepted == ob.accepted);

    SchemeState c = base;
    const std::vector<FeedbackRecord> short_feedback(feedback.begin(), feedback.end() - 1);
    REQUIRE_THROWS_AS(run_stage(c, chunk, short_feedback), DataError);
}
