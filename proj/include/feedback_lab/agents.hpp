#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "feedback_lab/corpus.hpp"
#include "feedback_lab/error.hpp"
#include "feedback_lab/rng.hpp"

namespace feedback_lab {

enum class AgentType { reliable, noisy, confused };

// A feedback agent is a function on the label space: reliable agents are the
// identity, noisy agents draw uniformly from the whole label space, confused
// agents apply a fixed non-identity mapping.
struct Agent {
    AgentType type = AgentType::reliable;
    std::vector<LabelId> confusion;  // total mapping; used only when confused

    static Agent make_reliable() { return {AgentType::reliable, {}}; }
    static Agent make_noisy() { return {AgentType::noisy, {}}; }

    static Agent make_confused(std::vector<LabelId> mapping, std::size_t n_labels) {
        if (mapping.size() != n_labels)
            throw ConfigError("confused mapping must cover every label");
        bool moved = false;
        for (std::size_t l = 0; l < mapping.size(); ++l) {
            if (mapping[l] >= n_labels)
                throw ConfigError("confused mapping target out of range");
            if (mapping[l] != l) moved = true;
        }
        if (!moved) throw ConfigError("confused mapping must not be the identity");
        return {AgentType::confused, std::move(mapping)};
    }
};

struct AgentPool {
    std::vector<Agent> agents;
    std::vector<std::uint32_t> reliable_set;
    std::size_t n_labels = 0;

    std::size_t size() const { return agents.size(); }

    static AgentPool make(std::vector<Agent> members, std::size_t n_labels) {
        if (members.empty()) throw ConfigError("agent pool must contain at least one agent");
        if (n_labels == 0) throw ConfigError("agent pool needs a nonempty label space");
        AgentPool pool;
        pool.n_labels = n_labels;
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (members[i].type == AgentType::confused &&
                members[i].confusion.size() != n_labels)
                throw ConfigError("confused mapping does not match the label space");
            if (members[i].type == AgentType::reliable)
                pool.reliable_set.push_back(static_cast<std::uint32_t>(i));
        }
        pool.agents = std::move(members);
        return pool;
    }
};

struct FeedbackRecord {
    std::uint32_t agent_index;
    LabelId feedback_label;
};

// Agents respond to the ground-truth label of the datapoint they are shown.
inline LabelId agent_respond(const Agent& agent, LabelId true_label, std::size_t n_labels,
                             SplitMix64& rng) {
    switch (agent.type) {
        case AgentType::reliable:
            return true_label;
        case AgentType::noisy:
            return static_cast<LabelId>(rng.bounded(n_labels));
        case AgentType::confused:
            return agent.confusion.at(true_label);
    }
    throw ConfigError("unknown agent type");
}

// One feedback record per datapoint: the responding agent is drawn uniformly
// and independently for each datapoint.
inline std::vector<FeedbackRecord> collect_feedback(const AgentPool& pool,
                                                    std::span<const LabelId> truths,
                                                    SplitMix64& rng) {
    if (truths.empty()) throw DataError("collect_feedback: truths must be nonempty");
    std::vector<FeedbackRecord> records;
    records.reserve(truths.size());
    for (const LabelId truth : truths) {
        const auto j = static_cast<std::uint32_t>(rng.bounded(pool.size()));
        records.push_back({j, agent_respond(pool.agents[j], truth, pool.n_labels, rng)});
    }
    return records;
}

enum class CorpusPreset { newsgroups, reuters };

// The two fixed confused-agent mappings used in the experiments:
//   newsgroups: sci.med -> comp.graphics, sci.space -> talk.politics.mideast,
//               comp.graphics and talk.politics.mideast stay put.
//   reuters:    earn, acq, money-fx, trade, interest -> money-fx,
//               every other label -> crude.
inline Agent make_paper_confused_agent(CorpusPreset preset, const LabelSpace& labels) {
    const std::size_t k = labels.size();
    std::vector<LabelId> mapping(k);
    if (preset == CorpusPreset::newsgroups) {
        for (std::size_t l = 0; l < k; ++l) mapping[l] = static_cast<LabelId>(l);
        mapping.at(labels.id_of("sci.med")) = labels.id_of("comp.graphics");
        mapping.at(labels.id_of("sci.space")) = labels.id_of("talk.politics.mideast");
    } else {
        const LabelId money_fx = labels.id_of("money-fx");
        const LabelId crude = labels.id_of("crude");
        for (std::size_t l = 0; l < k; ++l) mapping[l] = crude;
        for (const char* name : {"earn", "acq", "money-fx", "trade", "interest"})
            mapping.at(labels.id_of(name)) = money_fx;
    }
    return Agent::make_confused(std::move(mapping), k);
}

// Custom confused mapping from a text file of `from_label -> to_label` lines.
// Unmentioned labels map to themselves.
inline Agent load_confused_mapping(const std::filesystem::path& path,
                                   const LabelSpace& labels) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open confused mapping file: " + path.string());
    std::vector<LabelId> mapping(labels.size());
    for (std::size_t l = 0; l < mapping.size(); ++l) mapping[l] = static_cast<LabelId>(l);

    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto arrow = stripped.find("->");
        if (arrow == std::string::npos)
            throw IngestError("missing '->' at " + path.string() + ":" +
                              std::to_string(line_no));
        const std::string from = trim(stripped.substr(0, arrow));
        const std::string to = trim(stripped.substr(arrow + 2));
        mapping.at(labels.id_of(from)) = labels.id_of(to);
    }
    return Agent::make_confused(std::move(mapping), labels.size());
}

// Pool specification string: comma-separated entries of the form
// `reliable:N`, `noisy:N`, or `confused:<newsgroups|reuters|mapping-file>`.
inline AgentPool pool_from_spec(const std::string& spec, const LabelSpace& labels) {
    if (spec.empty()) throw ConfigError("empty pool specification");
    std::vector<Agent> members;
    std::istringstream parts(spec);
    std::string entry;
    while (std::getline(parts, entry, ',')) {
        const auto colon = entry.find(':');
        if (colon == std::string::npos)
            throw ConfigError("pool entry '" + entry + "' is not kind:arg");
        const std::string kind = entry.substr(0, colon);
        const std::string arg = entry.substr(colon + 1);
        if (kind == "reliable" || kind == "noisy") {
            std::size_t pos = 0;
            unsigned long n = 0;
            try {
                n = std::stoul(arg, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != arg.size() || n == 0)
                throw ConfigError("pool entry '" + entry + "' needs a positive count");
            for (unsigned long i = 0; i < n; ++i)
                members.push_back(kind == "reliable" ? Agent::make_reliable()
                                                     : Agent::make_noisy());
        } else if (kind == "confused") {
            if (arg == "newsgroups")
                members.push_back(make_paper_confused_agent(CorpusPreset::newsgroups, labels));
            else if (arg == "reuters")
                members.push_back(make_paper_confused_agent(CorpusPreset::reuters, labels));
            else
                members.push_back(load_confused_mapping(arg, labels));
        } else {
            throw ConfigError("unknown agent kind '" + kind + "'");
        }
    }
    return AgentPool::make(std::move(members), labels.size());
}

}  // namespace feedback_lab
