#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "feedback_lab/error.hpp"
#include "feedback_lab/rng.hpp"

namespace feedback_lab {

using LabelId = std::uint32_t;

// Ordered set of target labels; a label's id is its position in the list.
class LabelSpace {
public:
    explicit LabelSpace(std::vector<std::string> names) : names_(std::move(names)) {
        if (names_.empty()) throw ConfigError("label space must be nonempty");
        std::set<std::string> seen;
        for (const auto& n : names_)
            if (!seen.insert(n).second) throw ConfigError("duplicate label name: " + n);
    }

    std::size_t size() const { return names_.size(); }
    const std::string& name(LabelId id) const { return names_.at(id); }
    const std::vector<std::string>& names() const { return names_; }

    std::optional<LabelId> find(const std::string& name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return static_cast<LabelId>(i);
        return std::nullopt;
    }

    LabelId id_of(const std::string& name) const {
        if (auto id = find(name)) return *id;
        throw ConfigError("unknown label name: " + name);
    }

private:
    std::vector<std::string> names_;
};

struct RawDocument {
    std::string doc_id;
    std::string text;
    std::set<std::string> categories;
};

// A document that survived single-label filtering.
struct LabeledDocument {
    std::string doc_id;
    std::string text;
    std::string label;
};

struct FeatureEntry {
    std::uint32_t index;
    double weight;
};

// Sparse nonnegative feature weights for one document, sorted by index,
// with no explicit zero entries.
struct FeatureVector {
    std::vector<FeatureEntry> entries;
    std::uint32_t dimension = 0;

    double l2_norm() const {
        double s = 0.0;
        for (const auto& e : entries) s += e.weight * e.weight;
        return std::sqrt(s);
    }

    static FeatureVector from_map(std::uint32_t dimension,
                                  const std::map<std::uint32_t, double>& weights) {
        FeatureVector v;
        v.dimension = dimension;
        v.entries.reserve(weights.size());
        for (const auto& [idx, w] : weights) {
            if (idx >= dimension) throw DataError("feature index out of range");
            if (w < 0.0) throw DataError("negative feature weight");
            if (w == 0.0) continue;
            v.entries.push_back({idx, w});
        }
        return v;
    }
};

struct Dataset {
    std::vector<FeatureVector> vectors;
    std::vector<LabelId> truth;
    LabelSpace label_space;
    std::vector<std::string> vocab;
    std::vector<std::string> doc_ids;

    std::size_t size() const { return vectors.size(); }
};

// Disjoint index chunks covering a dataset, produced by shuffle_partition.
struct ChunkPlan {
    std::vector<std::vector<std::uint32_t>> chunks;
    std::uint64_t seed = 0;
};

// Lowercases text and extracts maximal runs of >= 2 ASCII alphanumeric
// characters as terms.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char ch : text) {
        if (std::isalnum(ch) != 0 && ch < 128) {
            cur.push_back(static_cast<char>(std::tolower(ch)));
        } else {
            if (cur.size() >= 2) out.push_back(cur);
            cur.clear();
        }
    }
    if (cur.size() >= 2) out.push_back(cur);
    return out;
}

// Class names of the four-newsgroup subset, in selection order.
inline const std::vector<std::string>& newsgroups_label_names() {
    static const std::vector<std::string> names = {
        "sci.med", "comp.graphics", "talk.politics.mideast", "sci.space"};
    return names;
}

inline const std::vector<std::size_t>& newsgroups_class_counts() {
    static const std::vector<std::size_t> counts = {594, 584, 564, 593};
    return counts;
}

// Category names of the ten-class Reuters-21578 subset, in selection order.
inline const std::vector<std::string>& reuters_label_names() {
    static const std::vector<std::string> names = {
        "earn", "acq",   "money-fx", "grain", "crude",
        "trade", "interest", "sugar", "corn", "ship"};
    return names;
}

// Per-class document counts of the Reuters subset after single-label
// filtering, in the same order as reuters_label_names().
inline const std::vector<std::size_t>& reuters_class_counts() {
    static const std::vector<std::size_t> counts = {2847, 1609, 369, 217, 315,
                                                    318,  203,  104, 2,   119};
    return counts;
}

// Reads a manifest of `doc_id category [category ...]` lines and loads every
// document whose category set intersects `selected`. Full category sets are
// kept; single-label filtering happens separately.
inline std::vector<RawDocument> load_category_corpus(
    const std::filesystem::path& root_path, const std::filesystem::path& manifest_path,
    const std::vector<std::string>& selected) {
    std::ifstream manifest(manifest_path);
    if (!manifest) throw IngestError("cannot open manifest: " + manifest_path.string());

    const std::set<std::string> wanted(selected.begin(), selected.end());
    std::set<std::string> seen_ids;
    std::vector<RawDocument> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(manifest, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::string doc_id;
        if (!(fields >> doc_id)) continue;  // blank line
        if (!seen_ids.insert(doc_id).second)
            throw IngestError("duplicate doc_id '" + doc_id + "' in manifest: " +
                              manifest_path.string() + ":" + std::to_string(line_no));
        RawDocument doc;
        doc.doc_id = doc_id;
        std::string cat;
        bool hit = false;
        while (fields >> cat) {
            doc.categories.insert(cat);
            if (wanted.count(cat) != 0) hit = true;
        }
        if (!hit) continue;

        const std::filesystem::path file = root_path / doc_id;
        std::ifstream in(file, std::ios::binary);
        if (!in) throw IngestError("cannot read document file: " + file.string());
        std::ostringstream text;
        text << in.rdbuf();
        doc.text = text.str();
        docs.push_back(std::move(doc));
    }
    return docs;
}

// Keeps exactly the documents whose category set intersected with `selected`
// has size one, collapsing that intersection to the document's label.
inline std::vector<LabeledDocument> filter_single_label(
    const std::vector<RawDocument>& docs, const std::vector<std::string>& selected) {
    if (selected.empty()) throw ConfigError("selected label list must be nonempty");
    const std::set<std::string> wanted(selected.begin(), selected.end());
    std::vector<LabeledDocument> out;
    for (const auto& doc : docs) {
        std::string match;
        std::size_t hits = 0;
        for (const auto& cat : doc.categories) {
            if (wanted.count(cat) != 0) {
                match = cat;
                if (++hits > 1) break;
            }
        }
        if (hits == 1) out.push_back({doc.doc_id, doc.text, match});
    }
    return out;
}

enum class VectorMode { counts, tfidf };

// Builds a Dataset over the corpus vocabulary (sorted distinct terms).
// Counts mode stores raw term frequencies. Tfidf mode stores
// tf * (ln((1+n)/(1+df)) + 1), L2-normalized per document.
inline Dataset vectorize(const std::vector<LabeledDocument>& docs, VectorMode mode,
                         const std::vector<std::string>& label_names) {
    if (docs.empty()) throw DataError("vectorize requires at least one document");
    LabelSpace labels(label_names);

    std::set<std::string> term_set;
    std::vector<std::vector<std::string>> doc_tokens;
    doc_tokens.reserve(docs.size());
    for (const auto& doc : docs) {
        doc_tokens.push_back(tokenize(doc.text));
        for (const auto& t : doc_tokens.back()) term_set.insert(t);
    }

    std::vector<std::string> vocab(term_set.begin(), term_set.end());
    std::map<std::string, std::uint32_t> index;
    for (std::uint32_t i = 0; i < vocab.size(); ++i) index[vocab[i]] = i;
    const auto dimension = static_cast<std::uint32_t>(std::max<std::size_t>(vocab.size(), 1));

    std::vector<double> df(vocab.size(), 0.0);
    std::vector<std::map<std::uint32_t, double>> tf(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (const auto& t : doc_tokens[d]) tf[d][index[t]] += 1.0;
        for (const auto& [idx, _] : tf[d]) df[idx] += 1.0;
    }

    Dataset ds{{}, {}, labels, std::move(vocab), {}};
    ds.vectors.reserve(docs.size());
    ds.truth.reserve(docs.size());
    ds.doc_ids.reserve(docs.size());
    const double n_docs = static_cast<double>(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        std::map<std::uint32_t, double> weights = std::move(tf[d]);
        if (mode == VectorMode::tfidf) {
            for (auto& [idx, w] : weights)
                w *= std::log((1.0 + n_docs) / (1.0 + df[idx])) + 1.0;
            double norm = 0.0;
            for (const auto& [idx, w] : weights) norm += w * w;
            norm = std::sqrt(norm);
            if (norm > 0.0)
                for (auto& [idx, w] : weights) w /= norm;
        }
        ds.vectors.push_back(FeatureVector::from_map(dimension, weights));
        ds.truth.push_back(labels.id_of(docs[d].label));
        ds.doc_ids.push_back(docs[d].doc_id);
    }
    return ds;
}

inline Dataset vectorize(const std::vector<LabeledDocument>& docs, VectorMode mode) {
    std::set<std::string> names;
    for (const auto& doc : docs) names.insert(doc.label);
    return vectorize(docs, mode, std::vector<std::string>(names.begin(), names.end()));
}

// Seeded Fisher-Yates shuffle followed by a split into n_chunks contiguous
// runs; when the size is not divisible, the leading chunks take the extra
// element each.
inline ChunkPlan shuffle_partition(const Dataset& dataset, std::size_t n_chunks,
                                   std::uint64_t seed) {
    const std::size_t n = dataset.size();
    if (n_chunks == 0 || n_chunks > n)
        throw ConfigError("n_chunks must be in [1, dataset size]");

    std::vector<std::uint32_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
    SplitMix64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.bounded(i + 1));
        std::swap(perm[i], perm[j]);
    }

    ChunkPlan plan;
    plan.seed = seed;
    const std::size_t base = n / n_chunks;
    const std::size_t rem = n % n_chunks;
    std::size_t pos = 0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        const std::size_t len = base + (c < rem ? 1 : 0);
        plan.chunks.emplace_back(perm.begin() + pos, perm.begin() + pos + len);
        pos += len;
    }
    if (pos != n) throw std::logic_error("partition does not cover the dataset");
    return plan;
}

// Synthetic Counts-mode corpus with explicit class names and per-class
// document counts. Each class owns a contiguous vocabulary block; a token is
// drawn from the class block with probability class_separation, uniformly
// from the whole vocabulary otherwise.
inline Dataset synthesize_labeled_corpus(const std::vector<std::string>& class_names,
                                         const std::vector<std::size_t>& docs_per_class,
                                         std::size_t vocab_size, std::size_t doc_length,
                                         double class_separation, std::uint64_t seed) {
    const std::size_t n_classes = class_names.size();
    if (n_classes == 0) throw ConfigError("synthesize: need at least one class");
    if (docs_per_class.size() != n_classes)
        throw ConfigError("synthesize: docs_per_class size mismatch");
    if (vocab_size < n_classes) throw ConfigError("synthesize: vocab_size < n_classes");
    if (doc_length == 0) throw ConfigError("synthesize: doc_length must be >= 1");
    if (!(class_separation > 0.0 && class_separation <= 1.0))
        throw ConfigError("synthesize: class_separation must be in (0, 1]");
    for (std::size_t c = 0; c < n_classes; ++c)
        if (docs_per_class[c] == 0) throw ConfigError("synthesize: empty class");

    std::size_t width = 1;
    for (std::size_t v = vocab_size - 1; v >= 10; v /= 10) ++width;
    std::vector<std::string> vocab(vocab_size);
    for (std::size_t i = 0; i < vocab_size; ++i) {
        const std::string digits = std::to_string(i);
        vocab[i] = "w" + std::string(width - digits.size(), '0') + digits;
    }

    Dataset ds{{}, {}, LabelSpace(class_names), std::move(vocab), {}};
    const std::size_t block = vocab_size / n_classes;
    SplitMix64 rng(seed);
    std::size_t serial = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (std::size_t d = 0; d < docs_per_class[c]; ++d) {
            std::map<std::uint32_t, double> counts;
            for (std::size_t t = 0; t < doc_length; ++t) {
                std::uint64_t idx;
                if (rng.unit() < class_separation)
                    idx = c * block + rng.bounded(block);
                else
                    idx = rng.bounded(vocab_size);
                counts[static_cast<std::uint32_t>(idx)] += 1.0;
            }
            ds.vectors.push_back(
                FeatureVector::from_map(static_cast<std::uint32_t>(vocab_size), counts));
            ds.truth.push_back(static_cast<LabelId>(c));
            char buf[32];
            std::snprintf(buf, sizeof buf, "synth-%06zu", serial++);
            ds.doc_ids.emplace_back(buf);
        }
    }
    return ds;
}

// Balanced synthetic corpus with generic class names.
inline Dataset synthesize_corpus(std::size_t n_classes, std::size_t n_docs_per_class,
                                 std::size_t vocab_size, std::size_t doc_length,
                                 double class_separation, std::uint64_t seed) {
    if (n_classes == 0) throw ConfigError("synthesize: need at least one class");
    std::vector<std::string> names(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) names[c] = "class" + std::to_string(c);
    return synthesize_labeled_corpus(names, std::vector<std::size_t>(n_classes, n_docs_per_class),
                                     vocab_size, doc_length, class_separation, seed);
}

// Dataset cache: plain-text columnar format, see README for the layout.
inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset cache: " + path.string());
    out << "feedback-lab-dataset v1\n";
    out << "labels " << ds.label_space.size() << "\n";
    for (const auto& name : ds.label_space.names()) out << name << "\n";
    out << "vocab " << ds.vocab.size() << "\n";
    for (const auto& term : ds.vocab) out << term << "\n";
    out << "docs " << ds.size() << "\n";
    char buf[64];
    for (std::size_t d = 0; d < ds.size(); ++d) {
        const std::string& id = ds.doc_ids.size() == ds.size() ? ds.doc_ids[d] : "";
        if (id.find(',') != std::string::npos)
            throw IoError("doc_id contains a comma: " + id);
        out << id << "," << ds.truth[d] << ",";
        bool first = true;
        for (const auto& e : ds.vectors[d].entries) {
            std::snprintf(buf, sizeof buf, "%u:%.17g", e.index, e.weight);
            out << (first ? "" : " ") << buf;
            first = false;
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

inline Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open dataset cache: " + path.string());
    const std::string err = "malformed dataset cache: " + path.string();

    std::string line, word;
    std::size_t count = 0;
    if (!std::getline(in, line) || line != "feedback-lab-dataset v1") throw IngestError(err);

    auto read_section = [&](const std::string& tag) {
        if (!(in >> word >> count) || word != tag) throw IngestError(err);
        std::getline(in, line);  // consume rest of header line
    };

    read_section("labels");
    std::vector<std::string> names(count);
    for (auto& n : names)
        if (!std::getline(in, n)) throw IngestError(err);

    read_section("vocab");
    std::vector<std::string> vocab(count);
    for (auto& t : vocab)
        if (!std::getline(in, t)) throw IngestError(err);

    read_section("docs");
    Dataset ds{{}, {}, LabelSpace(names), std::move(vocab), {}};
    const auto dimension = static_cast<std::uint32_t>(std::max<std::size_t>(ds.vocab.size(), 1));
    for (std::size_t d = 0; d < count; ++d) {
        if (!std::getline(in, line)) throw IngestError(err);
        try {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) throw IngestError(err);
        ds.doc_ids.push_back(line.substr(0, c1));
        const unsigned long label = std::stoul(line.substr(c1 + 1, c2 - c1 - 1));
        if (label >= ds.label_space.size()) throw IngestError(err);
        ds.truth.push_back(static_cast<LabelId>(label));

        FeatureVector v;
        v.dimension = dimension;
        std::istringstream entries(line.substr(c2 + 1));
        std::string pair;
        while (entries >> pair) {
            const auto colon = pair.find(':');
            if (colon == std::string::npos) throw IngestError(err);
            const unsigned long idx = std::stoul(pair.substr(0, colon));
            const double w = std::stod(pair.substr(colon + 1));
            if (idx >= dimension || w < 0.0) throw IngestError(err);
            if (!v.entries.empty() && v.entries.back().index >= idx) throw IngestError(err);
            v.entries.push_back({static_cast<std::uint32_t>(idx), w});
        }
        ds.vectors.push_back(std::move(v));
        } catch (const IngestError&) {
            throw;
        } catch (const std::exception&) {
            throw IngestError(err);
        }
    }
    return ds;
}

}  // namespace feedback_lab
