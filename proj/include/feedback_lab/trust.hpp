#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "feedback_lab/agents.hpp"
#include "feedback_lab/error.hpp"

namespace feedback_lab {

// Per-agent agreement counters. An agent's trust score is the fraction of
// its feedback labels that matched the classifier's own labels.
struct TrustTable {
    struct Counts {
        std::uint64_t agreements = 0;
        std::uint64_t total = 0;
    };
    std::vector<Counts> agents;

    explicit TrustTable(std::size_t n_agents) : agents(n_agents) {}
    std::size_t size() const { return agents.size(); }
};

// Every feedback record bumps its agent's total; agreement with the
// classifier's label bumps the agreement counter too.
inline void update_trust(TrustTable& table, std::span<const LabelId> classifier_labels,
                         std::span<const FeedbackRecord> feedback) {
    if (classifier_labels.size() != feedback.size())
        throw DataError("update_trust: labels and feedback differ in length");
    for (std::size_t u = 0; u < feedback.size(); ++u) {
        const std::uint32_t j = feedback[u].agent_index;
        if (j >= table.size())
            throw DataError("update_trust: agent index " + std::to_string(j) +
                            " out of range");
        table.agents[j].total += 1;
        if (classifier_labels[u] == feedback[u].feedback_label)
            table.agents[j].agreements += 1;
    }
}

// agreements/total; agents that never provided feedback score 1.0 so they
// are not filtered before they have been observed.
inline double trust_score(const TrustTable& table, std::uint32_t agent) {
    if (agent >= table.size())
        throw DataError("trust_score: agent index out of range");
    const auto& c = table.agents[agent];
    if (c.total == 0) return 1.0;
    return static_cast<double>(c.agreements) / static_cast<double>(c.total);
}

struct TrustCondition {
    enum class Kind { trust_all, oracle_reliable, mean_prune, threshold_prune };

    Kind kind = Kind::trust_all;
    double threshold = 0.0;                    // threshold_prune only
    std::vector<std::uint32_t> reliable_set;   // oracle_reliable only

    static TrustCondition trust_all() { return {Kind::trust_all, 0.0, {}}; }
    static TrustCondition mean_prune() { return {Kind::mean_prune, 0.0, {}}; }

    static TrustCondition threshold_prune(double c) {
        if (!(c >= 0.0 && c <= 1.0))
            throw ConfigError("trust threshold must be in [0, 1]");
        return {Kind::threshold_prune, c, {}};
    }

    static TrustCondition oracle_reliable(std::vector<std::uint32_t> reliable_set) {
        return {Kind::oracle_reliable, 0.0, std::move(reliable_set)};
    }
};

// Acceptance rules, all strict where a comparison is involved:
//   mean_prune:      score(i) > mean over all pool members' scores
//   threshold_prune: score(i) > c
//   trust_all:       always
//   oracle_reliable: i is a known reliable agent
inline bool condition_accepts(const TrustCondition& cond, const TrustTable& table,
                              std::uint32_t agent, std::size_t pool_size) {
    switch (cond.kind) {
        case TrustCondition::Kind::trust_all:
            return true;
        case TrustCondition::Kind::oracle_reliable:
            for (const std::uint32_t r : cond.reliable_set)
                if (r == agent) return true;
            return false;
        case TrustCondition::Kind::mean_prune: {
            double sum = 0.0;
            for (std::size_t j = 0; j < pool_size; ++j)
                sum += trust_score(table, static_cast<std::uint32_t>(j));
            return trust_score(table, agent) > sum / static_cast<double>(pool_size);
        }
        case TrustCondition::Kind::threshold_prune:
            return trust_score(table, agent) > cond.threshold;
    }
    throw ConfigError("unknown trust condition");
}

}  // namespace feedback_lab
