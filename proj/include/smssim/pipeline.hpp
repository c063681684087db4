// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 smssim contributors
#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "json.hpp"

#include "smssim/corpus.hpp"
#include "smssim/csm.hpp"
#include "smssim/embeddings.hpp"
#include "smssim/tagger.hpp"
#include "smssim/wboc.hpp"

namespace smssim {

/// Pipeline knobs: the score mix weight, both similarity thresholds, the
/// rejection threshold, and the cluster-score denominator choice.
struct PipelineConfig {
    double alpha = 0.8;
    double tau_cluster = 0.7;
    double tau_match = 0.7;
    double confidence_threshold = 0.7;
    WbocDenominator wboc_denominator = WbocDenominator::Selected;

    void validate() const {
        auto check_unit = [](double v, const char* name) {
            if (!(v > 0.0 && v <= 1.0)) {
                throw std::invalid_argument(std::string("PipelineConfig: ") + name +
                                            " must lie in (0,1]");
            }
        };
        check_unit(alpha, "alpha");
        check_unit(tau_cluster, "tau_cluster");
        check_unit(tau_match, "tau_match");
        check_unit(confidence_threshold, "confidence_threshold");
    }
};

inline nlohmann::json config_to_json(const PipelineConfig& config) {
    nlohmann::json j;
    j["alpha"] = config.alpha;
    j["tau_cluster"] = config.tau_cluster;
    j["tau_match"] = config.tau_match;
    j["confidence_threshold"] = config.confidence_threshold;
    j["wboc_denominator"] = std::string(to_string(config.wboc_denominator));
    return j;
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig config;
    config.alpha = j.at("alpha").get<double>();
    config.tau_cluster = j.at("tau_cluster").get<double>();
    config.tau_match = j.at("tau_match").get<double>();
    config.confidence_threshold = j.at("confidence_threshold").get<double>();
    config.wboc_denominator = parse_wboc_denominator(j.at("wboc_denominator").get<std::string>());
    config.validate();
    return config;
}

/// Which scoring pipeline to run: the full WBoC+CSM mix, the cluster-only
/// baseline (alpha forced to 1, sequence branch skipped), or the word-order
/// variant that swaps the gestalt matcher for the Stasis baseline.
enum class PipelineVariant { Full, Baseline, Stasis };

inline std::string_view to_string(PipelineVariant v) {
    switch (v) {
    case PipelineVariant::Full: return "full";
    case PipelineVariant::Baseline: return "baseline";
    case PipelineVariant::Stasis: return "stasis";
    }
    return "full";
}

inline PipelineVariant parse_pipeline_variant(std::string_view name) {
    if (name == "full") {
        return PipelineVariant::Full;
    }
    if (name == "baseline") {
        return PipelineVariant::Baseline;
    }
    if (name == "stasis") {
        return PipelineVariant::Stasis;
    }
    throw std::invalid_argument("unknown variant: '" + std::string(name) +
                                "' (expected full|baseline|stasis)");
}

/// All user labels plus the config they were built under and the embedding
/// table they score against.
struct ModelStore {
    PipelineConfig config;
    std::map<std::string, LabelModel> labels;
    std::shared_ptr<const EmbeddingTable> table;
};

/// The mixed confidence alpha*wboc + (1-alpha)*csm.
inline double confidence(double wboc, double csm, double alpha) {
    if (!(wboc >= 0.0 && wboc <= 1.0) || !(csm >= 0.0 && csm <= 1.0)) {
        throw std::invalid_argument("confidence: scores must lie in [0,1]");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("confidence: alpha must lie in (0,1]");
    }
    return alpha * wboc + (1.0 - alpha) * csm;
}

/// Per-label raw branch scores. Under the stasis variant the csm slot holds
/// the word-order similarity; under baseline it is 0 (branch skipped).
struct LabelScores {
    double wboc = 0.0;
    double csm = 0.0;
};

inline double effective_alpha(const PipelineConfig& config, PipelineVariant variant) {
    return variant == PipelineVariant::Baseline ? 1.0 : config.alpha;
}

/// Scores one extracted message against every label of the store. The wboc
/// value is clamped to [0,1] so the literal-denominator comparison mode stays
/// inside confidence()'s domain.
inline std::map<std::string, LabelScores> score_message(const ModelStore& store,
                                                        const KeywordSequence& keywords,
                                                        PipelineVariant variant) {
    if (!store.table) {
        throw std::invalid_argument("score_message: store has no embedding table attached");
    }
    std::map<std::string, LabelScores> scores;
    for (const auto& [label, model] : store.labels) {
        LabelScores s;
        const double raw = wboc_score(model, keywords, *store.table,
                                      store.config.wboc_denominator).value;
        s.wboc = raw > 1.0 ? 1.0 : raw;
        switch (variant) {
        case PipelineVariant::Full:
            s.csm = csm_label_score(model, keywords, *store.table, store.config.tau_match);
            break;
        case PipelineVariant::Baseline:
            s.csm = 0.0;
            break;
        case PipelineVariant::Stasis: {
            double best = 0.0;
            for (const auto& tagged : model.tagged) {
                const double sim = stasis_word_order_similarity(keywords, tagged, *store.table,
                                                                store.config.tau_match)
                                       .value;
                if (sim > best) {
                    best = sim;
                }
            }
            s.csm = best;
            break;
        }
        }
        scores.emplace(label, s);
    }
    return scores;
}

/// One label's scores and mixed confidence inside a PredictionResult.
struct LabelPrediction {
    double wboc = 0.0;
    double csm = 0.0;
    double confidence = 0.0;
};

/// The outcome of predicting one message: per-label diagnostics, the chosen
/// label (absent when every confidence is below the threshold), and the
/// maximum confidence.
struct PredictionResult {
    std::map<std::string, LabelPrediction> per_label;
    std::optional<std::string> chosen;
    double chosen_confidence = 0.0;
};

namespace detail {

inline PredictionResult decide(const std::map<std::string, LabelScores>& scores, double alpha,
                               double threshold) {
    PredictionResult result;
    const std::string* best_label = nullptr;
    for (const auto& [label, s] : scores) { // sorted: ties keep the smallest name
        LabelPrediction p{s.wboc, s.csm, confidence(s.wboc, s.csm, alpha)};
        if (best_label == nullptr || p.confidence > result.chosen_confidence) {
            result.chosen_confidence = p.confidence;
            best_label = &label;
        }
        result.per_label.emplace(label, p);
    }
    if (best_label != nullptr && result.chosen_confidence >= threshold) {
        result.chosen = *best_label;
    }
    return result;
}

} // namespace detail

/// Extracts keywords and scores the message against every label; the chosen
/// label is the confidence argmax when it clears the threshold (ties go to
/// the lexicographically smallest label name).
inline PredictionResult predict(const ModelStore& store, const SmsMessage& message,
                                const Tagger& tagger = default_tagger(),
                                PipelineVariant variant = PipelineVariant::Full) {
    if (store.labels.empty()) {
        throw std::invalid_argument("predict: model store has no labels");
    }
    const KeywordSequence keywords = extract_keywords(message, tagger);
    const auto scores = score_message(store, keywords, variant);
    return detail::decide(scores, effective_alpha(store.config, variant),
                          store.config.confidence_threshold);
}

/// Tags a message under the given label, creating the label on first use.
inline void assign(ModelStore& store, const SmsMessage& message, const std::string& label,
                   const Tagger& tagger = default_tagger()) {
    if (!store.table) {
        throw std::invalid_argument("assign: store has no embedding table attached");
    }
    if (label.empty()) {
        throw std::invalid_argument("assign: empty label name");
    }
    const KeywordSequence keywords = extract_keywords(message, tagger);
    auto it = store.labels.find(label);
    if (it == store.labels.end()) {
        store.labels.emplace(label,
                             build_label_model(label, {keywords}, *store.table,
                                               store.config.tau_cluster));
    } else {
        add_message(it->second, keywords, *store.table, store.config.tau_cluster);
    }
}

// ---------------------------------------------------------------------------
// persistence
// ---------------------------------------------------------------------------

inline nlohmann::json store_to_json(const ModelStore& store) {
    nlohmann::json j;
    j["config"] = config_to_json(store.config);
    j["labels"] = nlohmann::json::object();
    for (const auto& [label, model] : store.labels) {
        j["labels"][label] = label_model_to_json(model);
    }
    return j;
}

inline ModelStore store_from_json(const nlohmann::json& j,
                                  std::shared_ptr<const EmbeddingTable> table) {
    ModelStore store;
    store.config = config_from_json(j.at("config"));
    for (const auto& [label, model] : j.at("labels").items()) {
        store.labels.emplace(label, label_model_from_json(model));
    }
    store.table = std::move(table);
    return store;
}

inline void save_model_store(const ModelStore& store, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write model file: " + path.string());
    }
    out << store_to_json(store).dump(2) << '\n';
}

inline ModelStore load_model_store(const std::filesystem::path& path,
                                   std::shared_ptr<const EmbeddingTable> table) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open model file: " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("model file " + path.string() + ": malformed JSON (" + e.what() +
                                 ")");
    }
    try {
        return store_from_json(j, std::move(table));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("model file " + path.string() + ": " + e.what());
    }
}

/// Text rendering shared by the CLI and its tests.
inline std::string render_prediction(const PredictionResult& result) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "chosen: " << (result.chosen ? *result.chosen : "NONE")
        << "  confidence: " << result.chosen_confidence << '\n';
    std::size_t width = 0;
    for (const auto& [label, p] : result.per_label) {
        width = std::max(width, label.size());
    }
    for (const auto& [label, p] : result.per_label) {
        out << "  " << std::left << std::setw(static_cast<int>(width)) << label << std::right
            << "  wboc=" << p.wboc << "  csm=" << p.csm << "  confidence=" << p.confidence
            << '\n';
    }
    return out.str();
}

} // namespace smssim
