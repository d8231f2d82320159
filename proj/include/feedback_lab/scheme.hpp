#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "feedback_lab/agents.hpp"
#include "feedback_lab/classifier.hpp"
#include "feedback_lab/trust.hpp"

namespace feedback_lab {

enum class SchemeKind { trusting, discerning, threshold_prune, mean_prune };

inline const char* scheme_name(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::trusting: return "TrustingNB";
        case SchemeKind::discerning: return "DiscerningNB";
        case SchemeKind::threshold_prune: return "ThresholdPruneNB";
        case SchemeKind::mean_prune: return "MeanPruneNB";
    }
    return "?";
}

struct SchemeConfig {
    std::string name;
    TrustCondition condition;
    std::uint32_t burn_in = 0;  // initial feedback stages with filtering disabled
};

struct SchemeState {
    SchemeConfig config;
    MultinomialNB model;
    TrustTable trust;
    std::size_t pool_size = 0;
    std::uint32_t stage_counter = 0;
};

struct StageOutcome {
    std::vector<LabelId> predictions;
    std::vector<std::uint32_t> accepted;  // datapoint indices retained for training
    std::size_t feedback_count = 0;
};

inline SchemeState make_scheme(SchemeKind kind, double threshold, std::uint32_t burn_in,
                               MultinomialNB model, const AgentPool& pool) {
    if (pool.size() == 0) throw ConfigError("scheme needs a nonempty agent pool");
    TrustCondition condition;
    switch (kind) {
        case SchemeKind::trusting:
            condition = TrustCondition::trust_all();
            break;
        case SchemeKind::discerning:
            condition = TrustCondition::oracle_reliable(pool.reliable_set);
            break;
        case SchemeKind::threshold_prune:
            condition = TrustCondition::threshold_prune(threshold);
            break;
        case SchemeKind::mean_prune:
            condition = TrustCondition::mean_prune();
            break;
    }
    return SchemeState{SchemeConfig{scheme_name(kind), std::move(condition), burn_in},
                       std::move(model), TrustTable(pool.size()), pool.size(), 0};
}

using ChunkView = std::vector<const FeatureVector*>;

// One feedback-retrain stage. In order: predict the chunk, update the trust
// table with all feedback, select the accepted datapoints (everything during
// burn-in, otherwise those whose agent the condition accepts), continue
// training on them with their feedback labels. Predictions are computed
// before any retraining, so they are independent of this stage's feedback.
inline StageOutcome run_stage(SchemeState& state, const ChunkView& chunk,
                              std::span<const FeedbackRecord> feedback) {
    if (chunk.size() != feedback.size())
        throw DataError("run_stage: chunk and feedback differ in length");

    StageOutcome outcome;
    outcome.feedback_count = feedback.size();
    outcome.predictions.reserve(chunk.size());
    for (const FeatureVector* x : chunk)
        outcome.predictions.push_back(state.model.predict(*x));

    update_trust(state.trust, outcome.predictions, feedback);

    const bool burn_in_active = state.stage_counter < state.config.burn_in;
    for (std::uint32_t u = 0; u < feedback.size(); ++u) {
        if (burn_in_active ||
            condition_accepts(state.config.condition, state.trust,
                              feedback[u].agent_index, state.pool_size))
            outcome.accepted.push_back(u);
    }

    if (!outcome.accepted.empty()) {
        ChunkView train_docs;
        std::vector<LabelId> train_labels;
        train_docs.reserve(outcome.accepted.size());
        train_labels.reserve(outcome.accepted.size());
        for (const std::uint32_t u : outcome.accepted) {
            train_docs.push_back(chunk[u]);
            train_labels.push_back(feedback[u].feedback_label);
        }
        state.model.partial_fit(std::span<const FeatureVector* const>(train_docs),
                                std::span<const LabelId>(train_labels));
    }

    state.stage_counter += 1;
    return outcome;
}

}  // namespace feedback_lab
