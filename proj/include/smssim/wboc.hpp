// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 smssim contributors
#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "smssim/common.hpp"
#include "smssim/embeddings.hpp"
#include "smssim/tagger.hpp"

namespace smssim {

/// Which denominator the weighted cluster score divides by. Selected (the
/// default) divides by the frequencies of the per-word best-matching clusters,
/// keeping the score in [0,1] with self-matches at exactly 1. Literal divides
/// by the summed frequency of ALL clusters of the label and is kept only for
/// comparison; it is not bounded by 1.
enum class WbocDenominator { Selected, Literal };

inline std::string_view to_string(WbocDenominator d) {
    return d == WbocDenominator::Selected ? "selected" : "literal";
}

inline WbocDenominator parse_wboc_denominator(std::string_view name) {
    if (name == "selected") {
        return WbocDenominator::Selected;
    }
    if (name == "literal") {
        return WbocDenominator::Literal;
    }
    throw std::invalid_argument("unknown wboc denominator: '" + std::string(name) +
                                "' (expected selected|literal)");
}

/// A frequency-weighted word cluster. Embedded clusters keep the running mean
/// of their member vectors as centroid; out-of-vocabulary clusters hold
/// occurrences of one exact word string and a null centroid.
struct Cluster {
    std::map<std::string, int> members; // normalized word -> occurrence count
    int frequency = 0;                  // total member occurrences
    WordVector centroid;

    bool contains(const std::string& normalized_word) const {
        return members.find(normalized_word) != members.end();
    }
};

/// Everything retained for one user label: the clusters plus the keyword
/// sequences of every tagged message (the sequence matcher needs the latter).
struct LabelModel {
    std::string label;
    std::vector<Cluster> clusters;
    std::vector<KeywordSequence> tagged;
};

/// Similarity of one word to one cluster: exact membership counts as 1.0,
/// otherwise the (non-negative) cosine to the centroid when both sides are
/// embedded, otherwise 0. The membership rule keeps every ingested word at
/// similarity 1 to its own cluster even after the centroid has drifted.
inline double word_cluster_similarity(const std::string& normalized_word, const WordVector& vec,
                                      const Cluster& cluster) {
    if (cluster.contains(normalized_word)) {
        return 1.0;
    }
    if (!vec.is_null() && !cluster.centroid.is_null()) {
        const double c = cosine(vec, cluster.centroid);
        return c > 0.0 ? c : 0.0;
    }
    return 0.0;
}

namespace detail {

/// Index of the best-matching cluster (first wins ties) plus its similarity.
struct ClusterMatch {
    std::size_t index = 0;
    double similarity = 0.0;
};

inline ClusterMatch best_cluster(const LabelModel& model, const std::string& normalized_word,
                                 const WordVector& vec) {
    ClusterMatch best;
    for (std::size_t i = 0; i < model.clusters.size(); ++i) {
        const double sim = word_cluster_similarity(normalized_word, vec, model.clusters[i]);
        if (sim > best.similarity) {
            best = {i, sim};
        }
    }
    return best;
}

inline void ingest_word(LabelModel& model, const Token& word, const EmbeddingTable& table,
                        double tau_cluster) {
    const WordVector vec = table.lookup(word.normalized);
    const ClusterMatch best = best_cluster(model, word.normalized, vec);
    if (!model.clusters.empty() && best.similarity >= tau_cluster) {
        Cluster& cluster = model.clusters[best.index];
        ++cluster.members[word.normalized];
        ++cluster.frequency;
        if (!cluster.centroid.is_null() && !vec.is_null()) {
            // running mean over member occurrences
            std::vector<double> c = cluster.centroid.components();
            for (std::size_t d = 0; d < c.size(); ++d) {
                c[d] += (vec.components()[d] - c[d]) / static_cast<double>(cluster.frequency);
            }
            cluster.centroid = WordVector(std::move(c));
        }
        return;
    }
    Cluster fresh;
    fresh.members[word.normalized] = 1;
    fresh.frequency = 1;
    fresh.centroid = vec; // null for OOV words
    model.clusters.push_back(std::move(fresh));
}

} // namespace detail

/// Appends one tagged message to the model, streaming its words through the
/// greedy clustering rule. Exactly equivalent to rebuilding the model with
/// this message appended to the original tagging order.
inline void add_message(LabelModel& model, const KeywordSequence& keywords,
                        const EmbeddingTable& table, double tau_cluster) {
    if (tau_cluster <= 0.0 || tau_cluster > 1.0) {
        throw std::invalid_argument("add_message: tau_cluster must lie in (0,1]");
    }
    model.tagged.push_back(keywords);
    for (const Token& word : keywords.keywords) {
        detail::ingest_word(model, word, table, tau_cluster);
    }
}

/// Builds a label model by streaming the tagged messages in order, words
/// left to right. Each word occurrence joins the existing cluster it is most
/// similar to when that similarity reaches tau_cluster, else starts a new
/// cluster; OOV words only ever join the cluster of their exact string.
inline LabelModel build_label_model(const std::string& label,
                                    const std::vector<KeywordSequence>& tagged,
                                    const EmbeddingTable& table, double tau_cluster) {
    if (tagged.empty()) {
        throw std::invalid_argument("build_label_model: tagged message set is empty");
    }
    LabelModel model;
    model.label = label;
    for (const auto& seq : tagged) {
        add_message(model, seq, table, tau_cluster);
    }
    return model;
}

/// Weighted cluster score of a test message: each word contributes its best
/// cluster similarity m_i weighted by that cluster's frequency. Degenerate
/// inputs (no keywords, no clusters) score 0 with the flag set.
inline ScoreResult wboc_score(const LabelModel& model, const KeywordSequence& keywords,
                              const EmbeddingTable& table,
                              WbocDenominator denominator = WbocDenominator::Selected) {
    if (keywords.keywords.empty() || model.clusters.empty()) {
        return {0.0, true};
    }
    double numerator = 0.0;
    double selected_frequencies = 0.0;
    for (const Token& word : keywords.keywords) {
        const WordVector vec = table.lookup(word.normalized);
        const detail::ClusterMatch best = detail::best_cluster(model, word.normalized, vec);
        const double f = static_cast<double>(model.clusters[best.index].frequency);
        numerator += f * best.similarity;
        selected_frequencies += f;
    }
    double total = 0.0;
    if (denominator == WbocDenominator::Literal) {
        for (const auto& cluster : model.clusters) {
            total += static_cast<double>(cluster.frequency);
        }
    } else {
        total = selected_frequencies;
    }
    return {numerator / total, false};
}

// ---------------------------------------------------------------------------
// persistence
// ---------------------------------------------------------------------------

inline nlohmann::json token_to_json(const Token& token) {
    nlohmann::json j;
    j["surface"] = token.surface;
    j["normalized"] = token.normalized;
    j["tag"] = token.tag ? nlohmann::json(std::string(to_string(*token.tag)))
                         : nlohmann::json(nullptr);
    return j;
}

inline Token token_from_json(const nlohmann::json& j) {
    Token token;
    token.surface = j.at("surface").get<std::string>();
    token.normalized = j.at("normalized").get<std::string>();
    if (j.contains("tag") && !j["tag"].is_null()) {
        token.tag = parse_pos_tag(j["tag"].get<std::string>());
    }
    return token;
}

inline nlohmann::json keyword_sequence_to_json(const KeywordSequence& seq) {
    nlohmann::json j;
    j["source_id"] = seq.source_id;
    j["keywords"] = nlohmann::json::array();
    for (const auto& token : seq.keywords) {
        j["keywords"].push_back(token_to_json(token));
    }
    return j;
}

inline KeywordSequence keyword_sequence_from_json(const nlohmann::json& j) {
    KeywordSequence seq;
    seq.source_id = j.at("source_id").get<std::string>();
    for (const auto& t : j.at("keywords")) {
        seq.keywords.push_back(token_from_json(t));
    }
    return seq;
}

inline nlohmann::json label_model_to_json(const LabelModel& model) {
    nlohmann::json j;
    j["label"] = model.label;
    j["clusters"] = nlohmann::json::array();
    for (const auto& cluster : model.clusters) {
        nlohmann::json c;
        c["members"] = nlohmann::json::object();
        for (const auto& [word, count] : cluster.members) {
            c["members"][word] = count;
        }
        c["frequency"] = cluster.frequency;
        c["centroid"] = cluster.centroid.is_null() ? nlohmann::json(nullptr)
                                                   : nlohmann::json(cluster.centroid.components());
        j["clusters"].push_back(std::move(c));
    }
    j["tagged"] = nlohmann::json::array();
    for (const auto& seq : model.tagged) {
        j["tagged"].push_back(keyword_sequence_to_json(seq));
    }
    return j;
}

inline LabelModel label_model_from_json(const nlohmann::json& j) {
    LabelModel model;
    model.label = j.at("label").get<std::string>();
    for (const auto& c : j.at("clusters")) {
        Cluster cluster;
        for (const auto& [word, count] : c.at("members").items()) {
            cluster.members[word] = count.get<int>();
        }
        cluster.frequency = c.at("frequency").get<int>();
        if (!c.at("centroid").is_null()) {
            cluster.centroid = WordVector(c["centroid"].get<std::vector<double>>());
        }
        model.clusters.push_back(std::move(cluster));
    }
    for (const auto& s : j.at("tagged")) {
        model.tagged.push_back(keyword_sequence_from_json(s));
    }
    return model;
}

} // namespace smssim
