#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "feedback_lab/agents.hpp"

using namespace feedback_lab;
namespace fs = std::filesystem;

namespace {

const LabelSpace& four_labels() {
    static const LabelSpace labels({"a", "b", "c", "d"});
    return labels;
}

}  // namespace

TEST_CASE("reliable agents are the identity on the label space") {
    const Agent agent = Agent::make_reliable();
    SplitMix64 rng(1);
    for (LabelId l = 0; l < four_labels().size(); ++l)
        REQUIRE(agent_respond(agent, l, four_labels().size(), rng) == l);
}

TEST_CASE("confused agents are deterministic, total, and non-identity") {
    const Agent agent = Agent::make_confused({1, 1, 3, 3}, 4);
    SplitMix64 rng(1);
    for (int i = 0; i < 5; ++i) {
        REQUIRE(agent_respond(agent, 0, 4, rng) == 1);
        REQUIRE(agent_respond(agent, 2, 4, rng) == 3);
        REQUIRE(agent_respond(agent, 3, 4, rng) == 3);
    }
    bool moved = false;
    for (LabelId l = 0; l < 4; ++l) moved = moved || (agent.confusion[l] != l);
    REQUIRE(moved);

    REQUIRE_THROWS_AS(Agent::make_confused({0, 1, 2, 3}, 4), ConfigError);  // identity
    REQUIRE_THROWS_AS(Agent::make_confused({1, 0}, 4), ConfigError);        // not total
    REQUIRE_THROWS_AS(Agent::make_confused({1, 9, 0, 0}, 4), ConfigError);  // out of range
}

TEST_CASE("noisy responses are uniform over the whole label space") {
    const Agent agent = Agent::make_noisy();
    SplitMix64 rng(424242);
    std::vector<double> observed(4, 0.0);
    const int n = 10000;
    int hits_on_truth = 0;
    for (int i = 0; i < n; ++i) {
        const LabelId response = agent_respond(agent, 2, 4, rng);
        observed[response] += 1.0;
        if (response == 2) ++hits_on_truth;
    }
    // chi-square against uniform; 99.9% critical value for df=3 is 16.266
    const double expected = n / 4.0;
    double chi2 = 0.0;
    for (const double o : observed) chi2 += (o - expected) * (o - expected) / expected;
    REQUIRE(chi2 < 16.266);
    // the true label is a legal noisy response
    REQUIRE(hits_on_truth > 0);
}

TEST_CASE("collect_feedback pairs every datapoint with one agent response") {
    SECTION("a single reliable agent echoes every truth") {
        const AgentPool pool = AgentPool::make({Agent::make_reliable()}, 4);
        const std::vector<LabelId> truths = {0, 3, 1, 1, 2};
        SplitMix64 rng(5);
        const auto records = collect_feedback(pool, truths, rng);
        REQUIRE(records.size() == truths.size());
        for (std::size_t u = 0; u < truths.size(); ++u) {
            REQUIRE(records[u].agent_index == 0);
            REQUIRE(records[u].feedback_label == truths[u]);
        }
    }
    SECTION("agent selection is uniform") {
        std::vector<Agent> members;
        for (int i = 0; i < 5; ++i) members.push_back(Agent::make_reliable());
        const AgentPool pool = AgentPool::make(std::move(members), 4);
        const std::vector<LabelId> truths(50000, 1);
        SplitMix64 rng(99);
        const auto records = collect_feedback(pool, truths, rng);
        std::vector<double> counts(5, 0.0);
        for (const auto& r : records) {
            REQUIRE(r.agent_index < 5);
            counts[r.agent_index] += 1.0;
        }
        // 3 sigma around n/5 with sigma = sqrt(n * 1/5 * 4/5)
        const double sigma = std::sqrt(50000.0 * 0.2 * 0.8);
        for (const double c : counts) REQUIRE(std::abs(c - 10000.0) < 3.0 * sigma);
    }
    SECTION("deterministic for a fixed seed") {
        const AgentPool pool =
            AgentPool::make({Agent::make_reliable(), Agent::make_noisy()}, 4);
        const std::vector<LabelId> truths = {0, 1, 2, 3, 0, 1};
        SplitMix64 rng_a(7), rng_b(7);
        const auto a = collect_feedback(pool, truths, rng_a);
        const auto b = collect_feedback(pool, truths, rng_b);
        for (std::size_t u = 0; u < a.size(); ++u) {
            REQUIRE(a[u].agent_index == b[u].agent_index);
            REQUIRE(a[u].feedback_label == b[u].feedback_label);
        }
    }
    SECTION("empty truths is a data error") {
        const AgentPool pool = AgentPool::make({Agent::make_reliable()}, 4);
        SplitMix64 rng(1);
        REQUIRE_THROWS_AS(collect_feedback(pool, std::vector<LabelId>{}, rng), DataError);
    }
}

TEST_CASE("newsgroups confused preset maps the documented pairs") {
    const LabelSpace labels(newsgroups_label_names());
    const Agent agent = make_paper_confused_agent(CorpusPreset::newsgroups, labels);
    SplitMix64 rng(1);
    const auto respond = [&](const char* from) {
        return agent_respond(agent, labels.id_of(from), labels.size(), rng);
    };
    REQUIRE(respond("sci.med") == labels.id_of("comp.graphics"));
    REQUIRE(respond("comp.graphics") == labels.id_of("comp.graphics"));  // fixed point
    REQUIRE(respond("sci.space") == labels.id_of("talk.politics.mideast"));
    REQUIRE(respond("talk.politics.mideast") == labels.id_of("talk.politics.mideast"));
}

TEST_CASE("reuters confused preset funnels into money-fx and crude") {
    const LabelSpace labels(reuters_label_names());
    const Agent agent = make_paper_confused_agent(CorpusPreset::reuters, labels);
    SplitMix64 rng(1);
    const auto respond = [&](const char* from) {
        return agent_respond(agent, labels.id_of(from), labels.size(), rng);
    };
    for (const char* name : {"earn", "acq", "money-fx", "trade", "interest"})
        REQUIRE(respond(name) == labels.id_of("money-fx"));
    for (const char* name : {"grain", "crude", "sugar", "corn", "ship"})
        REQUIRE(respond(name) == labels.id_of("crude"));
}

TEST_CASE("confused presets require their labels to exist") {
    const LabelSpace wrong({"earn", "acq"});
    REQUIRE_THROWS_AS(make_paper_confused_agent(CorpusPreset::reuters, wrong), ConfigError);
    REQUIRE_THROWS_AS(make_paper_confused_agent(CorpusPreset::newsgroups, wrong), ConfigError);
}

TEST_CASE("confused mappings load from from->to files") {
    const fs::path dir =
        fs::temp_directory_path() / ("feedback_lab_map_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const LabelSpace labels({"earn", "acq", "grain"});

    {
        std::ofstream out(dir / "map.txt");
        out << "# swap the first two\n";
        out << "earn -> acq\n";
        out << "acq->earn\n";
    }
    const Agent agent = load_confused_mapping(dir / "map.txt", labels);
    REQUIRE(agent.confusion[labels.id_of("earn")] == labels.id_of("acq"));
    REQUIRE(agent.confusion[labels.id_of("acq")] == labels.id_of("earn"));
    REQUIRE(agent.confusion[labels.id_of("grain")] == labels.id_of("grain"));

    {
        std::ofstream out(dir / "bad.txt");
        out << "earn acq\n";
    }
    REQUIRE_THROWS_AS(load_confused_mapping(dir / "bad.txt", labels), IngestError);
    REQUIRE_THROWS_AS(load_confused_mapping(dir / "missing.txt", labels), IngestError);

    {
        std::ofstream out(dir / "identity.txt");
        out << "earn -> earn\n";
    }
    REQUIRE_THROWS_AS(load_confused_mapping(dir / "identity.txt", labels), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("pool specification strings build ordered pools") {
    const LabelSpace labels(reuters_label_names());

    const AgentPool pool = pool_from_spec("reliable:4,noisy:1", labels);
    REQUIRE(pool.size() == 5);
    REQUIRE(pool.reliable_set == std::vector<std::uint32_t>{0, 1, 2, 3});
    REQUIRE(pool.agents[4].type == AgentType::noisy);

    const AgentPool confused = pool_from_spec("reliable:4,confused:reuters", labels);
    REQUIRE(confused.size() == 5);
    REQUIRE(confused.agents[4].type == AgentType::confused);

    REQUIRE_THROWS_AS(pool_from_spec("", labels), ConfigError);
    REQUIRE_THROWS_AS(pool_from_spec("reliable", labels), ConfigError);
    REQUIRE_THROWS_AS(pool_from_spec("reliable:0", labels), ConfigError);
    REQUIRE_THROWS_AS(pool_from_spec("reliable:x", labels), ConfigError);
    REQUIRE_THROWS_AS(pool_from_spec("wizard:3", labels), ConfigError);
}
