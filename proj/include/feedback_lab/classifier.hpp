#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "feedback_lab/corpus.hpp"
#include "feedback_lab/error.hpp"

namespace feedback_lab {

// Incremental multinomial Naive Bayes over sparse nonnegative features.
// Fitting is purely additive on the sufficient statistics, so training on
// batches A then B produces exactly the statistics of training on their
// union once.
//
// score(c) = ln(class_weight[c] / sum(class_weight))
//          + sum_t x[t] * ln((feature_sum[c][t] + alpha) /
//                            (feature_total[c] + alpha * dimension))
//
// Classes never seen in training keep a -inf log prior and are never
// predicted. Fractional feature weights (e.g. TF-IDF) are accepted as-is.
class MultinomialNB {
public:
    MultinomialNB(LabelSpace label_space, std::uint32_t dimension, double alpha)
        : labels_(std::move(label_space)), alpha_(alpha), dimension_(dimension) {
        if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
        if (dimension == 0) throw ConfigError("dimension must be >= 1");
        const std::size_t k = labels_.size();
        class_weight_.assign(k, 0.0);
        feature_total_.assign(k, 0.0);
        feature_sum_.assign(k, std::vector<double>(dimension_, 0.0));
    }

    const LabelSpace& label_space() const { return labels_; }
    double alpha() const { return alpha_; }
    std::uint32_t dimension() const { return dimension_; }
    const std::vector<double>& class_weight() const { return class_weight_; }
    double feature_sum(LabelId c, std::uint32_t t) const { return feature_sum_.at(c).at(t); }
    double feature_total(LabelId c) const { return feature_total_.at(c); }
    bool trained() const { return total_weight_ > 0.0; }

    void partial_fit(std::span<const FeatureVector* const> docs,
                     std::span<const LabelId> labels) {
        if (docs.size() != labels.size())
            throw DataError("partial_fit: docs and labels differ in length");
        for (std::size_t i = 0; i < docs.size(); ++i) {
            if (labels[i] >= labels_.size())
                throw DataError("partial_fit: batch item " + std::to_string(i) +
                                " has unknown label id " + std::to_string(labels[i]));
            if (docs[i]->dimension != dimension_)
                throw DataError("partial_fit: batch item " + std::to_string(i) +
                                " has dimension " + std::to_string(docs[i]->dimension) +
                                ", expected " + std::to_string(dimension_));
        }
        if (docs.empty()) return;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const LabelId y = labels[i];
            class_weight_[y] += 1.0;
            total_weight_ += 1.0;
            for (const auto& e : docs[i]->entries) {
                feature_sum_[y][e.index] += e.weight;
                feature_total_[y] += e.weight;
            }
        }
        cache_valid_ = false;
        refresh_cache();  // keep concurrent reads between mutations race-free
    }

    void partial_fit(std::span<const FeatureVector> docs, std::span<const LabelId> labels) {
        std::vector<const FeatureVector*> ptrs(docs.size());
        for (std::size_t i = 0; i < docs.size(); ++i) ptrs[i] = &docs[i];
        partial_fit(std::span<const FeatureVector* const>(ptrs), labels);
    }

    std::vector<double> log_scores(const FeatureVector& x) const {
        if (!trained()) throw UntrainedModelError();
        if (x.dimension != dimension_)
            throw DataError("log_scores: query dimension mismatch");
        refresh_cache();
        const std::size_t k = labels_.size();
        std::vector<double> scores(k);
        for (std::size_t c = 0; c < k; ++c) {
            double s = log_prior_[c];
            if (std::isfinite(s)) {
                const double* ll = log_likelihood_[c].data();
                for (const auto& e : x.entries) s += e.weight * ll[e.index];
            }
            scores[c] = s;
        }
        return scores;
    }

    // Argmax over finite scores; ties break toward the lowest class id.
    LabelId predict(const FeatureVector& x) const {
        const std::vector<double> scores = log_scores(x);
        LabelId best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        bool found = false;
        for (std::size_t c = 0; c < scores.size(); ++c) {
            if (std::isfinite(scores[c]) && scores[c] > best_score) {
                best = static_cast<LabelId>(c);
                best_score = scores[c];
                found = true;
            }
        }
        if (!found) throw UntrainedModelError();
        return best;
    }

    // Debug dump: alpha, per-class weight and nonzero feature sums.
    void dump(std::ostream& out) const {
        out << "alpha " << alpha_ << "\n";
        for (std::size_t c = 0; c < labels_.size(); ++c) {
            out << labels_.name(static_cast<LabelId>(c)) << " " << class_weight_[c];
            for (std::uint32_t t = 0; t < dimension_; ++t)
                if (feature_sum_[c][t] != 0.0) out << " " << t << ":" << feature_sum_[c][t];
            out << "\n";
        }
    }

private:
    void refresh_cache() const {
        if (cache_valid_) return;
        const std::size_t k = labels_.size();
        log_prior_.assign(k, -std::numeric_limits<double>::infinity());
        log_likelihood_.assign(k, {});
        for (std::size_t c = 0; c < k; ++c) {
            if (class_weight_[c] <= 0.0) continue;
            log_prior_[c] = std::log(class_weight_[c] / total_weight_);
            const double log_den = std::log(feature_total_[c] + alpha_ * dimension_);
            auto& row = log_likelihood_[c];
            row.resize(dimension_);
            for (std::uint32_t t = 0; t < dimension_; ++t)
                row[t] = std::log(feature_sum_[c][t] + alpha_) - log_den;
        }
        cache_valid_ = true;
    }

    LabelSpace labels_;
    double alpha_;
    std::uint32_t dimension_;
    std::vector<double> class_weight_;
    std::vector<std::vector<double>> feature_sum_;
    std::vector<double> feature_total_;
    double total_weight_ = 0.0;

    mutable bool cache_valid_ = false;
    mutable std::vector<double> log_prior_;
    mutable std::vector<std::vector<double>> log_likelihood_;
};

}  // namespace feedback_lab
