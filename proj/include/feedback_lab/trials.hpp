#pragma once

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "feedback_lab/agents.hpp"
#include "feedback_lab/classifier.hpp"
#include "feedback_lab/corpus.hpp"
#include "feedback_lab/rng.hpp"
#include "feedback_lab/scheme.hpp"

namespace feedback_lab {

struct SchemeSpec {
    SchemeKind kind = SchemeKind::trusting;
    double threshold = 0.3;     // threshold_prune only
    std::uint32_t burn_in = 0;  // prune schemes only
};

struct TrialConfig {
    std::uint32_t n_chunks = 10;
    std::uint32_t repetitions = 100;
    std::uint64_t root_seed = 1;
    double alpha = 1.0;
    std::vector<SchemeSpec> schemes;
    AgentPool pool;
};

struct TrustTraceRow {
    std::uint32_t stage = 0;
    std::uint32_t agent = 0;
    std::uint64_t agreements = 0;
    std::uint64_t total = 0;
    double score = 0.0;
    bool accepted = false;  // would the condition accept this agent now
};

struct SchemeTrialResult {
    std::string scheme;
    std::vector<double> f1;                         // one entry per feedback stage
    std::vector<std::uint32_t> accepted_counts;
    std::vector<std::uint32_t> feedback_counts;
    std::vector<TrustTraceRow> trust_trace;         // (N-1) * M rows, stage-major
    std::vector<std::uint64_t> stage_input_hashes;  // content hash of chunk+feedback
};

struct TrialResult {
    std::vector<SchemeTrialResult> schemes;
};

struct AggregateCell {
    double mean_f1 = 0.0;
    double stderr_f1 = 0.0;
    std::uint32_t n_reps = 0;
};

struct AggregateResult {
    std::vector<std::string> schemes;
    std::uint32_t n_stages = 0;
    std::vector<std::vector<AggregateCell>> cells;  // [scheme][stage]
};

struct ExperimentResult {
    AggregateResult aggregate;
    std::vector<TrialResult> trials;
};

// Micro-averaged F1 from globally pooled per-class TP/FP/FN. For
// single-label multiclass data this equals accuracy.
inline double micro_f1(std::span<const LabelId> predictions, std::span<const LabelId> truths) {
    if (predictions.empty()) throw DataError("micro_f1: empty input");
    if (predictions.size() != truths.size())
        throw DataError("micro_f1: predictions and truths differ in length");
    LabelId max_id = 0;
    for (const LabelId p : predictions) max_id = std::max(max_id, p);
    for (const LabelId t : truths) max_id = std::max(max_id, t);
    std::vector<std::uint64_t> tp(max_id + 1, 0), fp(max_id + 1, 0), fn(max_id + 1, 0);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == truths[i]) {
            tp[predictions[i]] += 1;
        } else {
            fp[predictions[i]] += 1;
            fn[truths[i]] += 1;
        }
    }
    std::uint64_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
    for (std::size_t c = 0; c <= max_id; ++c) {
        tp_sum += tp[c];
        fp_sum += fp[c];
        fn_sum += fn[c];
    }
    return static_cast<double>(2 * tp_sum) /
           static_cast<double>(2 * tp_sum + fp_sum + fn_sum);
}

namespace detail {

inline void validate(const TrialConfig& config, const Dataset& dataset) {
    if (config.n_chunks < 2)
        throw ConfigError("need at least 2 chunks (one pre-train chunk plus one stage)");
    if (config.repetitions < 1) throw ConfigError("need at least 1 repetition");
    if (config.schemes.empty()) throw ConfigError("no schemes configured");
    if (config.pool.size() == 0) throw ConfigError("agent pool is empty");
    if (dataset.size() == 0) throw DataError("dataset is empty");
    if (config.pool.n_labels != dataset.label_space.size())
        throw ConfigError("agent pool was built for a different label space");
}

inline std::uint64_t hash_stage_inputs(const ChunkView& chunk,
                                       std::span<const FeedbackRecord> feedback) {
    std::uint64_t h = kFnvOffset;
    h = fnv1a_mix(h, chunk.size());
    for (const FeatureVector* x : chunk) {
        h = fnv1a_mix(h, x->entries.size());
        for (const auto& e : x->entries) {
            h = fnv1a_mix(h, e.index);
            h = fnv1a_mix(h, std::bit_cast<std::uint64_t>(e.weight));
        }
    }
    for (const auto& r : feedback) {
        h = fnv1a_mix(h, r.agent_index);
        h = fnv1a_mix(h, r.feedback_label);
    }
    return h;
}

}  // namespace detail

// One N-stage trial: shuffle/partition with the repetition seed, pre-train
// every scheme on chunk 1 with ground-truth labels, then for each remaining
// chunk generate one shared feedback list and run every scheme's stage on
// it, recording micro-F1 of the pre-retrain predictions against the truth.
inline TrialResult run_trial(const TrialConfig& config, const Dataset& dataset,
                             std::uint64_t rep_seed) {
    detail::validate(config, dataset);

    const ChunkPlan plan = shuffle_partition(dataset, config.n_chunks, derive_seed(rep_seed, 0));
    SplitMix64 feedback_rng(derive_seed(rep_seed, 1));
    const auto dimension =
        static_cast<std::uint32_t>(std::max<std::size_t>(dataset.vocab.size(), 1));

    std::vector<SchemeState> states;
    TrialResult result;
    for (const SchemeSpec& spec : config.schemes) {
        states.push_back(make_scheme(spec.kind, spec.threshold, spec.burn_in,
                                     MultinomialNB(dataset.label_space, dimension, config.alpha),
                                     config.pool));
        result.schemes.push_back({states.back().config.name, {}, {}, {}, {}, {}});
    }

    auto chunk_view = [&](std::size_t c) {
        ChunkView view;
        view.reserve(plan.chunks[c].size());
        for (const std::uint32_t i : plan.chunks[c]) view.push_back(&dataset.vectors[i]);
        return view;
    };
    auto chunk_truths = [&](std::size_t c) {
        std::vector<LabelId> truths;
        truths.reserve(plan.chunks[c].size());
        for (const std::uint32_t i : plan.chunks[c]) truths.push_back(dataset.truth[i]);
        return truths;
    };

    const ChunkView pretrain_docs = chunk_view(0);
    const std::vector<LabelId> pretrain_labels = chunk_truths(0);
    for (SchemeState& state : states)
        state.model.partial_fit(std::span<const FeatureVector* const>(pretrain_docs),
                                std::span<const LabelId>(pretrain_labels));

    for (std::size_t c = 1; c < config.n_chunks; ++c) {
        const ChunkView chunk = chunk_view(c);
        const std::vector<LabelId> truths = chunk_truths(c);
        const std::vector<FeedbackRecord> feedback =
            collect_feedback(config.pool, truths, feedback_rng);

        for (std::size_t s = 0; s < states.size(); ++s) {
            SchemeState& state = states[s];
            SchemeTrialResult& trace = result.schemes[s];
            trace.stage_input_hashes.push_back(detail::hash_stage_inputs(chunk, feedback));

            const StageOutcome outcome = run_stage(state, chunk, feedback);
            trace.f1.push_back(micro_f1(outcome.predictions, truths));
            trace.accepted_counts.push_back(static_cast<std::uint32_t>(outcome.accepted.size()));
            trace.feedback_counts.push_back(static_cast<std::uint32_t>(outcome.feedback_count));

            const auto stage = static_cast<std::uint32_t>(c - 1);
            for (std::uint32_t a = 0; a < state.trust.size(); ++a) {
                trace.trust_trace.push_back(
                    {stage, a, state.trust.agents[a].agreements, state.trust.agents[a].total,
                     trust_score(state.trust, a),
                     condition_accepts(state.config.condition, state.trust, a,
                                       state.pool_size)});
            }
        }
    }
    return result;
}

// R repetitions with per-repetition seeds derive_seed(root_seed, r).
// Repetitions are independent, so they may run on `jobs` threads; results
// land in repetition order and the aggregate is identical for any jobs.
inline ExperimentResult run_experiment(const TrialConfig& config, const Dataset& dataset,
                                       unsigned jobs = 1) {
    detail::validate(config, dataset);

    const std::size_t reps = config.repetitions;
    ExperimentResult result;
    result.trials.resize(reps);

    const unsigned workers =
        std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(reps)));
    if (workers == 1) {
        for (std::size_t r = 0; r < reps; ++r)
            result.trials[r] = run_trial(config, dataset, derive_seed(config.root_seed, r));
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> threads;
        std::vector<std::exception_ptr> errors(workers);
        for (unsigned w = 0; w < workers; ++w) {
            threads.emplace_back([&, w] {
                try {
                    for (;;) {
                        const std::size_t r = next.fetch_add(1);
                        if (r >= reps) return;
                        result.trials[r] =
                            run_trial(config, dataset, derive_seed(config.root_seed, r));
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : threads) t.join();
        for (const auto& err : errors)
            if (err) std::rethrow_exception(err);
    }

    AggregateResult& agg = result.aggregate;
    agg.n_stages = config.n_chunks - 1;
    for (const SchemeSpec& spec : config.schemes)
        agg.schemes.emplace_back(scheme_name(spec.kind));
    agg.cells.assign(agg.schemes.size(),
                     std::vector<AggregateCell>(agg.n_stages));
    for (std::size_t s = 0; s < agg.schemes.size(); ++s) {
        for (std::uint32_t t = 0; t < agg.n_stages; ++t) {
            double mean = 0.0;
            for (std::size_t r = 0; r < reps; ++r) mean += result.trials[r].schemes[s].f1[t];
            mean /= static_cast<double>(reps);
            double var = 0.0;
            if (reps > 1) {
                for (std::size_t r = 0; r < reps; ++r) {
                    const double d = result.trials[r].schemes[s].f1[t] - mean;
                    var += d * d;
                }
                var /= static_cast<double>(reps - 1);
            }
            agg.cells[s][t] = {mean, std::sqrt(var / static_cast<double>(reps)),
                               static_cast<std::uint32_t>(reps)};
        }
    }
    return result;
}

namespace detail {

inline std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace detail

inline void write_aggregate_csv(std::ostream& out, const AggregateResult& agg) {
    out << "scheme,stage,mean_f1,stderr,n_reps\n";
    for (std::size_t s = 0; s < agg.schemes.size(); ++s)
        for (std::uint32_t t = 0; t < agg.n_stages; ++t)
            out << agg.schemes[s] << "," << t << "," << detail::fixed6(agg.cells[s][t].mean_f1)
                << "," << detail::fixed6(agg.cells[s][t].stderr_f1) << ","
                << agg.cells[s][t].n_reps << "\n";
}

inline void write_raw_csv(std::ostream& out, std::span<const TrialResult> trials) {
    out << "rep,scheme,stage,f1,accepted,feedback_total\n";
    for (std::size_t r = 0; r < trials.size(); ++r)
        for (const SchemeTrialResult& scheme : trials[r].schemes)
            for (std::size_t t = 0; t < scheme.f1.size(); ++t)
                out << r << "," << scheme.scheme << "," << t << ","
                    << detail::fixed6(scheme.f1[t]) << "," << scheme.accepted_counts[t] << ","
                    << scheme.feedback_counts[t] << "\n";
}

inline void write_trust_csv(std::ostream& out, std::span<const TrialResult> trials) {
    out << "rep,scheme,stage,agent,agreements,total,score,accepted\n";
    for (std::size_t r = 0; r < trials.size(); ++r)
        for (const SchemeTrialResult& scheme : trials[r].schemes)
            for (const TrustTraceRow& row : scheme.trust_trace)
                out << r << "," << scheme.scheme << "," << row.stage << "," << row.agent << ","
                    << row.agreements << "," << row.total << "," << detail::fixed6(row.score)
                    << "," << (row.accepted ? 1 : 0) << "\n";
}

}  // namespace feedback_lab
