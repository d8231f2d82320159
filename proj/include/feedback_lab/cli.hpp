#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "feedback_lab/agents.hpp"
#include "feedback_lab/corpus.hpp"
#include "feedback_lab/error.hpp"
#include "feedback_lab/plot.hpp"
#include "feedback_lab/trials.hpp"

namespace feedback_lab {

// Command-line misuse: unknown flags, missing or contradictory values,
// nonexistent input paths. Mapped to exit code 2; nothing is written.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct HelpRequested {
    std::string text;
};

struct RunSpec {
    std::string dataset;  // synthetic | newsgroups | reuters | cache
    std::string corpus_root;
    std::string manifest;
    std::string cache_path;

    // synthetic corpus parameters; 0 means "use the default for --labels"
    std::size_t classes = 0;
    std::size_t docs_per_class = 0;
    std::size_t vocab_size = 400;
    std::size_t doc_length = 12;
    double separation = 0.4;
    std::string labels = "generic";  // generic | newsgroups | reuters

    std::string pool = "reliable:4,noisy:1";
    std::string schemes_raw = "trusting,discerning,threshold";
    std::vector<SchemeSpec> schemes;  // resolved from schemes_raw

    std::uint32_t chunks = 10;
    std::uint32_t reps = 100;
    std::uint64_t seed = 1;
    double alpha = 1.0;
    double threshold = 0.3;
    std::uint32_t burn_in = 0;
    std::string out = "out";
    bool plot = false;
    unsigned jobs = 1;
    std::string write_cache;
    std::string preset;
};

namespace detail {

struct Preset {
    std::string pool;
    std::string schemes;
    double threshold;
    std::uint32_t burn_in;
    std::string labels_hint;
};

inline const std::map<std::string, Preset>& preset_table() {
    static const std::map<std::string, Preset> table = [] {
        std::map<std::string, Preset> t;
        const std::pair<const char*, const char*> noisy_pools[] = {
            {"4r1n", "reliable:4,noisy:1"},
            {"3r2n", "reliable:3,noisy:2"},
            {"2r3n", "reliable:2,noisy:3"},
            {"1r4n", "reliable:1,noisy:4"},
        };
        for (const auto& [tag, pool] : noisy_pools) {
            t["noisy-ng-" + std::string(tag)] =
                {pool, "trusting,discerning,threshold", 0.3, 3, "newsgroups"};
            t["noisy-reuters-" + std::string(tag)] =
                {pool, "trusting,discerning,threshold", 0.3, 3, "reuters"};
        }
        t["confused-ng"] =
            {"reliable:4,confused:newsgroups", "trusting,discerning,mean", 0.3, 0, "newsgroups"};
        t["confused-reuters"] =
            {"reliable:4,confused:reuters", "trusting,discerning,mean", 0.3, 0, "reuters"};
        return t;
    }();
    return table;
}

// key=value config file; '#' starts a comment. Values feed the same flags
// as the command line, which takes precedence.
inline std::vector<std::string> config_file_args(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path.string());
    std::vector<std::string> args;
    std::string line;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(line_no) +
                             " is not key=value: " + path.string());
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw UsageError("config line " + std::to_string(line_no) + " has an empty key");
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

inline std::vector<SchemeSpec> parse_schemes(const std::string& raw, double threshold,
                                             std::uint32_t burn_in) {
    std::vector<SchemeSpec> specs;
    std::istringstream parts(raw);
    std::string entry;
    while (std::getline(parts, entry, ',')) {
        if (entry.empty()) continue;
        SchemeSpec spec;
        spec.threshold = threshold;
        if (entry == "trusting") {
            spec.kind = SchemeKind::trusting;
        } else if (entry == "discerning") {
            spec.kind = SchemeKind::discerning;
        } else if (entry == "mean") {
            spec.kind = SchemeKind::mean_prune;
            spec.burn_in = burn_in;
        } else if (entry.rfind("threshold", 0) == 0) {
            spec.kind = SchemeKind::threshold_prune;
            spec.burn_in = burn_in;
            if (entry.size() > 9) {
                if (entry[9] != ':')
                    throw UsageError("unknown scheme '" + entry + "'");
                try {
                    spec.threshold = std::stod(entry.substr(10));
                } catch (const std::exception&) {
                    throw UsageError("bad threshold in scheme '" + entry + "'");
                }
            }
        } else {
            throw UsageError("unknown scheme '" + entry +
                             "' (expected trusting, discerning, threshold[:c], mean)");
        }
        specs.push_back(spec);
    }
    if (specs.empty()) throw UsageError("--schemes lists no schemes");
    return specs;
}

}  // namespace detail

// Parses command-line arguments (plus an optional key=value config file and
// an optional preset) into a fully validated RunSpec. Throws UsageError on
// misuse and HelpRequested for --help.
inline RunSpec parse_run_spec(const std::vector<std::string>& args) {
    RunSpec spec;

    CLI::App app{"feedback-lab: feedback-retrain loop simulator with trust-based pruning"};
    app.get_formatter()->column_width(30);

    std::string config_path;
    app.add_option("--config", config_path, "key=value config file; command line wins");
    app.add_option("--preset", spec.preset,
                   "experiment preset (noisy-{ng,reuters}-{4r1n,3r2n,2r3n,1r4n}, "
                   "confused-{ng,reuters}); explicit flags override it");
    app.add_option("--dataset", spec.dataset,
                   "dataset kind: synthetic | newsgroups | reuters | cache");
    app.add_option("--corpus-root", spec.corpus_root, "directory of corpus document files");
    app.add_option("--manifest", spec.manifest, "manifest file: doc_id category...");
    app.add_option("--cache", spec.cache_path, "dataset cache file (with --dataset cache)");
    app.add_option("--classes", spec.classes, "synthetic: number of classes");
    app.add_option("--docs-per-class", spec.docs_per_class,
                   "synthetic: documents per class (overrides --labels defaults)");
    app.add_option("--vocab-size", spec.vocab_size, "synthetic: vocabulary size");
    app.add_option("--doc-length", spec.doc_length, "synthetic: tokens per document");
    app.add_option("--separation", spec.separation,
                   "synthetic: probability a token comes from the class block");
    app.add_option("--labels", spec.labels,
                   "synthetic: label names (generic | newsgroups | reuters)");
    app.add_option("--pool", spec.pool,
                   "agent pool, e.g. reliable:4,noisy:1 or reliable:4,confused:reuters");
    app.add_option("--schemes", spec.schemes_raw,
                   "comma list of trusting, discerning, threshold[:c], mean");
    app.add_option("--chunks", spec.chunks, "number of chunks N (1 pre-train + N-1 stages)");
    app.add_option("--reps", spec.reps, "number of trial repetitions");
    std::uint64_t seed_flag = 0;
    app.add_option("--seed", seed_flag, "root seed (64-bit)");
    app.add_option("--alpha", spec.alpha, "naive Bayes smoothing constant");
    app.add_option("--threshold", spec.threshold, "trust threshold c for threshold scheme");
    app.add_option("--burn-in", spec.burn_in,
                   "initial stages where prune schemes accept all feedback");
    app.add_option("--out", spec.out, "output directory");
    app.add_flag("--plot", spec.plot, "also write plot.svg");
    app.add_option("--jobs", spec.jobs, "repetition-level parallelism (output-invariant)");
    app.add_option("--write-cache", spec.write_cache, "write the loaded dataset cache here");
    for (CLI::Option* opt : app.get_options())
        opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // Pre-pass: pull --config out so its contents can precede the real argv.
    std::vector<std::string> effective;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file path");
            for (auto& extra : detail::config_file_args(args[i + 1])) effective.push_back(extra);
            ++i;
        } else if (a.rfind("--config=", 0) == 0) {
            for (auto& extra : detail::config_file_args(a.substr(9))) effective.push_back(extra);
        } else {
            effective.push_back(a);
        }
    }
    // config args sit first so later command-line values win under TakeLast
    std::vector<const char*> argv{"feedback-lab"};
    for (const auto& a : effective) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    auto user_set = [&](const std::string& flag) { return app.count(flag) > 0; };

    if (!spec.preset.empty()) {
        const auto& table = detail::preset_table();
        const auto it = table.find(spec.preset);
        if (it == table.end()) {
            std::string names;
            for (const auto& [name, _] : table) names += (names.empty() ? "" : ", ") + name;
            throw UsageError("unknown preset '" + spec.preset + "' (available: " + names + ")");
        }
        const detail::Preset& preset = it->second;
        if (!user_set("--pool")) spec.pool = preset.pool;
        if (!user_set("--schemes")) spec.schemes_raw = preset.schemes;
        if (!user_set("--threshold")) spec.threshold = preset.threshold;
        if (!user_set("--burn-in")) spec.burn_in = preset.burn_in;
        if (!user_set("--labels") && spec.dataset == "synthetic") spec.labels = preset.labels_hint;
    }

    if (user_set("--seed")) {
        spec.seed = seed_flag;
    } else if (const char* env = std::getenv("FEEDBACK_LAB_SEED")) {
        try {
            std::size_t pos = 0;
            spec.seed = std::stoull(env, &pos);
            if (pos != std::string(env).size()) throw std::invalid_argument(env);
        } catch (const std::exception&) {
            throw UsageError("FEEDBACK_LAB_SEED is not a 64-bit integer: " + std::string(env));
        }
    }

    std::vector<std::string> problems;
    if (spec.dataset.empty()) {
        problems.push_back("--dataset is required");
    } else if (spec.dataset != "synthetic" && spec.dataset != "newsgroups" &&
               spec.dataset != "reuters" && spec.dataset != "cache") {
        problems.push_back("--dataset must be synthetic, newsgroups, reuters, or cache");
    }
    if (spec.dataset == "newsgroups" || spec.dataset == "reuters") {
        if (spec.corpus_root.empty())
            problems.push_back("--corpus-root is required for --dataset " + spec.dataset);
        else if (!std::filesystem::is_directory(spec.corpus_root))
            problems.push_back("--corpus-root does not exist: " + spec.corpus_root);
        if (spec.manifest.empty())
            problems.push_back("--manifest is required for --dataset " + spec.dataset);
        else if (!std::filesystem::is_regular_file(spec.manifest))
            problems.push_back("--manifest does not exist: " + spec.manifest);
    }
    if (spec.dataset == "cache") {
        if (spec.cache_path.empty())
            problems.push_back("--cache is required for --dataset cache");
        else if (!std::filesystem::is_regular_file(spec.cache_path))
            problems.push_back("--cache does not exist: " + spec.cache_path);
    }
    if (spec.dataset == "synthetic") {
        if (spec.labels != "generic" && spec.labels != "newsgroups" && spec.labels != "reuters")
            problems.push_back("--labels must be generic, newsgroups, or reuters");
        const std::size_t preset_classes = spec.labels == "newsgroups" ? 4
                                           : spec.labels == "reuters"  ? 10
                                                                       : 0;
        if (preset_classes != 0 && spec.classes != 0 && spec.classes != preset_classes)
            problems.push_back("--classes contradicts --labels " + spec.labels);
    }
    if (spec.chunks < 2) problems.push_back("--chunks must be at least 2");
    if (spec.reps < 1) problems.push_back("--reps must be at least 1");
    if (!(spec.alpha > 0.0)) problems.push_back("--alpha must be > 0");
    if (!(spec.threshold >= 0.0 && spec.threshold <= 1.0))
        problems.push_back("--threshold must be in [0, 1]");
    if (spec.jobs < 1) problems.push_back("--jobs must be at least 1");
    if (!problems.empty()) {
        std::string message = "invalid usage:";
        for (const auto& p : problems) message += "\n  " + p;
        throw UsageError(message);
    }

    spec.schemes = detail::parse_schemes(spec.schemes_raw, spec.threshold, spec.burn_in);
    return spec;
}

// Builds the dataset named by the spec.
inline Dataset build_dataset(const RunSpec& spec) {
    if (spec.dataset == "synthetic") {
        std::vector<std::string> names;
        std::vector<std::size_t> counts;
        if (spec.labels == "newsgroups") {
            names = newsgroups_label_names();
            counts = newsgroups_class_counts();
        } else if (spec.labels == "reuters") {
            names = reuters_label_names();
            counts = reuters_class_counts();
        } else {
            const std::size_t k = spec.classes == 0 ? 4 : spec.classes;
            for (std::size_t c = 0; c < k; ++c) names.push_back("class" + std::to_string(c));
            counts.assign(k, 100);
        }
        if (spec.docs_per_class != 0) counts.assign(names.size(), spec.docs_per_class);
        return synthesize_labeled_corpus(names, counts, spec.vocab_size, spec.doc_length,
                                         spec.separation, spec.seed);
    }
    if (spec.dataset == "newsgroups" || spec.dataset == "reuters") {
        const auto& selected = spec.dataset == "newsgroups" ? newsgroups_label_names()
                                                            : reuters_label_names();
        const auto mode =
            spec.dataset == "newsgroups" ? VectorMode::counts : VectorMode::tfidf;
        const auto docs = load_category_corpus(spec.corpus_root, spec.manifest, selected);
        if (docs.empty())
            std::cerr << "warning: no documents matched the selected categories\n";
        return vectorize(filter_single_label(docs, selected), mode, selected);
    }
    return load_dataset(spec.cache_path);
}

// Runs the experiment described by a validated RunSpec and writes
// aggregate.csv, raw.csv, trust.csv (and plot.svg when requested) into the
// output directory. Returns the process exit code.
inline int run_from_spec(const RunSpec& spec) {
    const Dataset dataset = build_dataset(spec);
    TrialConfig config{spec.chunks, spec.reps,  spec.seed,
                       spec.alpha,  spec.schemes, pool_from_spec(spec.pool, dataset.label_space)};
    const ExperimentResult result = run_experiment(config, dataset, spec.jobs);

    const std::filesystem::path out_dir(spec.out);
    std::filesystem::create_directories(out_dir);
    const auto write_file = [&](const char* name, auto&& writer) {
        const std::filesystem::path path = out_dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        writer(out);
        if (!out) throw IoError("write failed: " + path.string());
    };
    write_file("aggregate.csv", [&](std::ostream& o) { write_aggregate_csv(o, result.aggregate); });
    write_file("raw.csv", [&](std::ostream& o) {
        write_raw_csv(o, std::span<const TrialResult>(result.trials));
    });
    write_file("trust.csv", [&](std::ostream& o) {
        write_trust_csv(o, std::span<const TrialResult>(result.trials));
    });
    if (spec.plot) emit_plot(result.aggregate, out_dir / "plot.svg");
    if (!spec.write_cache.empty()) save_dataset(dataset, spec.write_cache);

    std::cout << "dataset: " << dataset.size() << " docs, " << dataset.label_space.size()
              << " classes, vocab " << dataset.vocab.size() << "\n";
    const AggregateResult& agg = result.aggregate;
    for (std::size_t s = 0; s < agg.schemes.size(); ++s) {
        const AggregateCell& last = agg.cells[s][agg.n_stages - 1];
        std::cout << agg.schemes[s] << ": final-stage mean F1 " << detail::fixed6(last.mean_f1)
                  << " +/- " << detail::fixed6(last.stderr_f1) << "\n";
    }
    std::cout << "wrote " << (out_dir / "aggregate.csv").string() << ", raw.csv, trust.csv"
              << (spec.plot ? ", plot.svg" : "") << "\n";
    return 0;
}

}  // namespace feedback_lab
