// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 smssim contributors
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "smssim/corpus.hpp"
#include "smssim/pipeline.hpp"

namespace smssim {

/// Per-label stratified split of a corpus into k groups whose sizes differ by
/// at most one. The protocol trains on ONE group and tests on the rest.
struct FoldPlan {
    int k = 0;
    std::uint32_t seed = 0;
    std::map<std::string, std::vector<std::vector<std::size_t>>> groups; // label -> k index sets
};

/// Shuffles each label's message indices (seeded Fisher-Yates) and deals them
/// round-robin into k groups. Unlabeled messages are not part of any plan.
inline FoldPlan partition_kfold(const LabeledCorpus& corpus, int k, std::uint32_t seed) {
    if (k < 2) {
        throw std::invalid_argument("partition_kfold: k must be >= 2");
    }
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < corpus.messages.size(); ++i) {
        if (corpus.messages[i].label) {
            by_label[*corpus.messages[i].label].push_back(i);
        }
    }
    if (by_label.empty()) {
        throw std::invalid_argument("partition_kfold: corpus has no labeled messages");
    }
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    std::mt19937 rng(seed);
    for (auto& [label, indices] : by_label) {
        if (indices.size() < static_cast<std::size_t>(k)) {
            throw std::invalid_argument("partition_kfold: label \"" + label + "\" has " +
                                        std::to_string(indices.size()) + " messages, fewer than k=" +
                                        std::to_string(k));
        }
        // manual Fisher-Yates over raw draws keeps the plan identical across
        // standard library implementations
        for (std::size_t i = indices.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
            std::swap(indices[i], indices[j]);
        }
        auto& groups = plan.groups[label];
        groups.assign(static_cast<std::size_t>(k), {});
        for (std::size_t i = 0; i < indices.size(); ++i) {
            groups[i % static_cast<std::size_t>(k)].push_back(indices[i]);
        }
    }
    return plan;
}

/// Macro-averaged metrics of one label across one confusion tally.
struct LabelMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Prediction counts of one evaluation fold: true label -> predicted label,
/// with rejections kept apart (they count as false negatives of the true
/// label and charge no false positive anywhere).
struct ConfusionTally {
    std::map<std::string, std::map<std::string, std::size_t>> predicted;
    std::map<std::string, std::size_t> rejected;
    std::size_t total = 0;
};

/// Macro precision/recall/F1 plus accuracy for one tally.
struct TallyMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    std::map<std::string, LabelMetrics> per_label;
};

inline double harmonic_f1(double precision, double recall) {
    if (precision * recall == 0.0) {
        return 0.0;
    }
    return 2.0 * precision * recall / (precision + recall);
}

inline TallyMetrics metrics_from_confusion(const ConfusionTally& tally,
                                           const std::set<std::string>& labels) {
    if (labels.empty()) {
        throw std::invalid_argument("metrics_from_confusion: empty label set");
    }
    TallyMetrics metrics;
    double correct = 0.0;
    for (const auto& label : labels) {
        double tp = 0.0, fp = 0.0, fn = 0.0;
        if (auto row = tally.predicted.find(label); row != tally.predicted.end()) {
            for (const auto& [predicted, count] : row->second) {
                if (predicted == label) {
                    tp += static_cast<double>(count);
                } else {
                    fn += static_cast<double>(count);
                }
            }
        }
        if (auto rej = tally.rejected.find(label); rej != tally.rejected.end()) {
            fn += static_cast<double>(rej->second);
        }
        for (const auto& [true_label, row] : tally.predicted) {
            if (true_label == label) {
                continue;
            }
            if (auto hit = row.find(label); hit != row.end()) {
                fp += static_cast<double>(hit->second);
            }
        }
        LabelMetrics lm;
        lm.precision = (tp + fp) > 0.0 ? tp / (tp + fp) : 0.0;
        lm.recall = (tp + fn) > 0.0 ? tp / (tp + fn) : 0.0;
        lm.f1 = harmonic_f1(lm.precision, lm.recall);
        metrics.precision += lm.precision;
        metrics.recall += lm.recall;
        correct += tp;
        metrics.per_label.emplace(label, lm);
    }
    const double label_count = static_cast<double>(labels.size());
    metrics.precision /= label_count;
    metrics.recall /= label_count;
    metrics.f1 = harmonic_f1(metrics.precision, metrics.recall);
    metrics.accuracy = tally.total > 0 ? correct / static_cast<double>(tally.total) : 0.0;
    return metrics;
}

/// Fold-averaged evaluation results plus the settings that produced them.
struct EvalReport {
    PipelineConfig config;
    PipelineVariant variant = PipelineVariant::Full;
    int k = 0;
    std::uint32_t seed = 0;

    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    std::map<std::string, LabelMetrics> per_label;

    std::vector<double> fold_precision, fold_recall, fold_f1, fold_accuracy;
    double var_precision = 0.0, var_recall = 0.0, var_f1 = 0.0, var_accuracy = 0.0;

    std::size_t test_messages = 0;
    std::size_t rejected = 0;
};

namespace detail {

struct ScoredMessage {
    std::string true_label;
    std::map<std::string, LabelScores> scores;
};

inline void validate_plan(const LabeledCorpus& corpus, const FoldPlan& plan) {
    if (plan.k < 2) {
        throw std::invalid_argument("evaluate: fold plan has k < 2");
    }
    std::map<std::string, std::size_t> label_counts;
    for (const auto& msg : corpus.messages) {
        if (msg.label) {
            ++label_counts[*msg.label];
        }
    }
    if (plan.groups.size() != label_counts.size()) {
        throw std::invalid_argument("evaluate: fold plan labels do not match the corpus");
    }
    for (const auto& [label, groups] : plan.groups) {
        auto counts = label_counts.find(label);
        if (counts == label_counts.end()) {
            throw std::invalid_argument("evaluate: fold plan label \"" + label +
                                        "\" not in the corpus");
        }
        if (groups.size() != static_cast<std::size_t>(plan.k)) {
            throw std::invalid_argument("evaluate: fold plan for \"" + label + "\" has " +
                                        std::to_string(groups.size()) + " groups, expected k=" +
                                        std::to_string(plan.k));
        }
        std::set<std::size_t> seen;
        for (const auto& group : groups) {
            for (std::size_t idx : group) {
                if (idx >= corpus.messages.size() || !corpus.messages[idx].label ||
                    *corpus.messages[idx].label != label) {
                    throw std::invalid_argument("evaluate: fold plan index " +
                                                std::to_string(idx) +
                                                " does not hold a \"" + label + "\" message");
                }
                if (!seen.insert(idx).second) {
                    throw std::invalid_argument("evaluate: fold plan repeats index " +
                                                std::to_string(idx));
                }
            }
        }
        if (seen.size() != counts->second) {
            throw std::invalid_argument("evaluate: fold plan for \"" + label +
                                        "\" does not cover every message");
        }
    }
}

/// Phase 1 of evaluation: per fold, the alpha-independent (wboc, csm) scores
/// of every test message. The alpha sweep reuses this across alpha values.
inline std::vector<std::vector<ScoredMessage>>
collect_scores(const LabeledCorpus& corpus, std::shared_ptr<const EmbeddingTable> table,
               const PipelineConfig& config, const FoldPlan& plan, PipelineVariant variant,
               const Tagger& tagger) {
    validate_plan(corpus, plan);
    config.validate();

    std::map<std::size_t, KeywordSequence> keywords;
    for (const auto& [label, groups] : plan.groups) {
        for (const auto& group : groups) {
            for (std::size_t idx : group) {
                keywords.emplace(idx, extract_keywords(corpus.messages[idx], tagger));
            }
        }
    }

    std::vector<std::vector<ScoredMessage>> folds;
    folds.reserve(static_cast<std::size_t>(plan.k));
    for (int f = 0; f < plan.k; ++f) {
        ModelStore store;
        store.config = config;
        store.table = table;
        for (const auto& [label, groups] : plan.groups) {
            std::vector<KeywordSequence> tagged;
            for (std::size_t idx : groups[static_cast<std::size_t>(f)]) {
                tagged.push_back(keywords.at(idx));
            }
            store.labels.emplace(label,
                                 build_label_model(label, tagged, *table, config.tau_cluster));
        }
        std::vector<ScoredMessage> scored;
        for (const auto& [label, groups] : plan.groups) {
            for (int g = 0; g < plan.k; ++g) {
                if (g == f) {
                    continue;
                }
                for (std::size_t idx : groups[static_cast<std::size_t>(g)]) {
                    ScoredMessage sm;
                    sm.true_label = label;
                    sm.scores = score_message(store, keywords.at(idx), variant);
                    scored.push_back(std::move(sm));
                }
            }
        }
        folds.push_back(std::move(scored));
    }
    return folds;
}

/// Phase 2: apply one alpha and the rejection threshold to the cached scores.
inline std::vector<ConfusionTally> decide_folds(const std::vector<std::vector<ScoredMessage>>& folds,
                                                double alpha, double threshold) {
    std::vector<ConfusionTally> tallies;
    tallies.reserve(folds.size());
    for (const auto& fold : folds) {
        ConfusionTally tally;
        for (const auto& sm : fold) {
            const std::string* best = nullptr;
            double best_conf = 0.0;
            for (const auto& [label, s] : sm.scores) { // sorted: ties keep smallest name
                const double conf = confidence(s.wboc, s.csm, alpha);
                if (best == nullptr || conf > best_conf) {
                    best = &label;
                    best_conf = conf;
                }
            }
            if (best != nullptr && best_conf >= threshold) {
                ++tally.predicted[sm.true_label][*best];
            } else {
                ++tally.rejected[sm.true_label];
            }
            ++tally.total;
        }
        tallies.push_back(std::move(tally));
    }
    return tallies;
}

inline double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) {
        return 0.0;
    }
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return ss / static_cast<double>(xs.size() - 1);
}

inline EvalReport report_from_tallies(const PipelineConfig& config, PipelineVariant variant,
                                      const FoldPlan& plan,
                                      const std::vector<ConfusionTally>& tallies,
                                      const std::set<std::string>& labels) {
    EvalReport report;
    report.config = config;
    report.variant = variant;
    report.k = plan.k;
    report.seed = plan.seed;

    std::map<std::string, LabelMetrics> label_sums;
    for (const auto& tally : tallies) {
        const TallyMetrics m = metrics_from_confusion(tally, labels);
        report.fold_precision.push_back(m.precision);
        report.fold_recall.push_back(m.recall);
        report.fold_f1.push_back(m.f1);
        report.fold_accuracy.push_back(m.accuracy);
        for (const auto& [label, lm] : m.per_label) {
            label_sums[label].precision += lm.precision;
            label_sums[label].recall += lm.recall;
        }
        report.test_messages += tally.total;
        for (const auto& [label, count] : tally.rejected) {
            report.rejected += count;
        }
    }
    const double folds = static_cast<double>(tallies.size());
    for (double p : report.fold_precision) {
        report.precision += p;
    }
    for (double r : report.fold_recall) {
        report.recall += r;
    }
    for (double a : report.fold_accuracy) {
        report.accuracy += a;
    }
    report.precision /= folds;
    report.recall /= folds;
    report.accuracy /= folds;
    report.f1 = harmonic_f1(report.precision, report.recall);
    for (auto& [label, sums] : label_sums) {
        LabelMetrics lm;
        lm.precision = sums.precision / folds;
        lm.recall = sums.recall / folds;
        lm.f1 = harmonic_f1(lm.precision, lm.recall);
        report.per_label.emplace(label, lm);
    }
    report.var_precision = sample_variance(report.fold_precision);
    report.var_recall = sample_variance(report.fold_recall);
    report.var_f1 = sample_variance(report.fold_f1);
    report.var_accuracy = sample_variance(report.fold_accuracy);
    return report;
}

} // namespace detail

/// Inverted k-fold evaluation: for every fold index f, a store is built from
/// group f alone and tested on the other k-1 groups. Baseline forces alpha=1
/// with the sequence branch skipped; stasis swaps the gestalt matcher for the
/// word-order baseline.
inline EvalReport evaluate(const LabeledCorpus& corpus,
                           std::shared_ptr<const EmbeddingTable> table,
                           const PipelineConfig& config, const FoldPlan& plan,
                           PipelineVariant variant = PipelineVariant::Full,
                           const Tagger& tagger = default_tagger()) {
    const auto folds = detail::collect_scores(corpus, table, config, plan, variant, tagger);
    const double alpha = effective_alpha(config, variant);
    const auto tallies = detail::decide_folds(folds, alpha, config.confidence_threshold);
    PipelineConfig echo = config;
    echo.alpha = alpha;
    return detail::report_from_tallies(echo, variant, plan, tallies, corpus.labels);
}

/// One EvalReport per alpha, sharing a single scoring pass (the raw scores do
/// not depend on alpha). Each report is bit-identical to a direct evaluate()
/// call at that alpha.
inline std::vector<EvalReport> alpha_sweep(const LabeledCorpus& corpus,
                                           std::shared_ptr<const EmbeddingTable> table,
                                           const PipelineConfig& base_config, const FoldPlan& plan,
                                           const std::vector<double>& alphas,
                                           const Tagger& tagger = default_tagger()) {
    if (alphas.empty()) {
        throw std::invalid_argument("alpha_sweep: empty alpha list");
    }
    for (double a : alphas) {
        if (!(a > 0.0 && a <= 1.0)) {
            throw std::invalid_argument("alpha_sweep: alpha values must lie in (0,1]");
        }
    }
    const auto folds =
        detail::collect_scores(corpus, table, base_config, plan, PipelineVariant::Full, tagger);
    std::vector<EvalReport> reports;
    reports.reserve(alphas.size());
    for (double a : alphas) {
        const auto tallies = detail::decide_folds(folds, a, base_config.confidence_threshold);
        PipelineConfig config = base_config;
        config.alpha = a;
        reports.push_back(detail::report_from_tallies(config, PipelineVariant::Full, plan, tallies,
                                                      corpus.labels));
    }
    return reports;
}

// ---------------------------------------------------------------------------
// latency benchmark
// ---------------------------------------------------------------------------

/// Wall-time stats of one pipeline stage across all (message x repetition)
/// samples.
struct StageTiming {
    double mean_ms = 0.0;
    double p95_ms = 0.0;
};

struct BenchReport {
    StageTiming extract;
    StageTiming wboc;
    StageTiming csm;
    StageTiming predict;
    std::size_t model_bytes = 0; // rough in-memory footprint of the store
    std::size_t messages = 0;
    std::size_t repetitions = 0;
};

namespace detail {

inline StageTiming timing_from_samples(std::vector<double>& samples_ms) {
    StageTiming t;
    double sum = 0.0;
    for (double s : samples_ms) {
        sum += s;
    }
    t.mean_ms = sum / static_cast<double>(samples_ms.size());
    std::sort(samples_ms.begin(), samples_ms.end());
    const std::size_t rank =
        (samples_ms.size() * 95 + 99) / 100; // nearest-rank ceil(0.95 n), 1-based
    t.p95_ms = samples_ms[rank == 0 ? 0 : rank - 1];
    return t;
}

inline std::size_t estimate_store_bytes(const ModelStore& store) {
    std::size_t bytes = sizeof(ModelStore);
    for (const auto& [label, model] : store.labels) {
        bytes += label.size() + model.label.size() + sizeof(LabelModel);
        for (const auto& cluster : model.clusters) {
            bytes += sizeof(Cluster) + cluster.centroid.dimension() * sizeof(double);
            for (const auto& [word, count] : cluster.members) {
                bytes += word.size() + sizeof(int) + 3 * sizeof(void*); // map node overhead
            }
        }
        for (const auto& seq : model.tagged) {
            bytes += sizeof(KeywordSequence) + seq.source_id.size();
            for (const auto& token : seq.keywords) {
                bytes += sizeof(Token) + token.surface.size() + token.normalized.size();
            }
        }
    }
    return bytes;
}

} // namespace detail

/// Times keyword extraction, cluster scoring, sequence scoring, and the full
/// prediction per message.
inline BenchReport benchmark(const ModelStore& store, const std::vector<SmsMessage>& messages,
                             std::size_t repetitions, const Tagger& tagger = default_tagger()) {
    if (messages.empty()) {
        throw std::invalid_argument("benchmark: empty message set");
    }
    if (repetitions < 1) {
        throw std::invalid_argument("benchmark: repetitions must be >= 1");
    }
    if (store.labels.empty()) {
        throw std::invalid_argument("benchmark: model store has no labels");
    }
    using clock = std::chrono::steady_clock;
    auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };

    std::vector<double> extract_ms, wboc_ms, csm_ms, predict_ms;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        for (const auto& msg : messages) {
            auto t0 = clock::now();
            const KeywordSequence keywords = extract_keywords(msg, tagger);
            extract_ms.push_back(ms_since(t0));

            t0 = clock::now();
            for (const auto& [label, model] : store.labels) {
                (void)wboc_score(model, keywords, *store.table, store.config.wboc_denominator);
            }
            wboc_ms.push_back(ms_since(t0));

            t0 = clock::now();
            for (const auto& [label, model] : store.labels) {
                (void)csm_label_score(model, keywords, *store.table, store.config.tau_match);
            }
            csm_ms.push_back(ms_since(t0));

            t0 = clock::now();
            (void)predict(store, msg, tagger);
            predict_ms.push_back(ms_since(t0));
        }
    }
    BenchReport report;
    report.extract = detail::timing_from_samples(extract_ms);
    report.wboc = detail::timing_from_samples(wboc_ms);
    report.csm = detail::timing_from_samples(csm_ms);
    report.predict = detail::timing_from_samples(predict_ms);
    report.model_bytes = detail::estimate_store_bytes(store);
    report.messages = messages.size();
    report.repetitions = repetitions;
    return report;
}

// ---------------------------------------------------------------------------
// serialization and text rendering
// ---------------------------------------------------------------------------

inline nlohmann::json eval_report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["config"] = config_to_json(report.config);
    j["config"]["variant"] = std::string(to_string(report.variant));
    j["config"]["k"] = report.k;
    j["config"]["seed"] = report.seed;

    nlohmann::json results;
    results["overall"] = {{"precision", report.precision},
                          {"recall", report.recall},
                          {"f1", report.f1},
                          {"accuracy", report.accuracy}};
    results["per_label"] = nlohmann::json::object();
    for (const auto& [label, lm] : report.per_label) {
        results["per_label"][label] = {
            {"precision", lm.precision}, {"recall", lm.recall}, {"f1", lm.f1}};
    }
    results["per_fold"] = {{"precision", report.fold_precision},
                           {"recall", report.fold_recall},
                           {"f1", report.fold_f1},
                           {"accuracy", report.fold_accuracy}};
    results["variance"] = {{"precision", report.var_precision},
                           {"recall", report.var_recall},
                           {"f1", report.var_f1},
                           {"accuracy", report.var_accuracy}};
    results["test_messages"] = report.test_messages;
    results["rejected"] = report.rejected;
    j["results"] = results;
    return j;
}

inline std::string render_eval_report(const EvalReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "variant: " << to_string(report.variant) << "  alpha: " << report.config.alpha
        << "  k: " << report.k << "  seed: " << report.seed << '\n';
    out << "Precision  " << report.precision << '\n';
    out << "Recall     " << report.recall << '\n';
    out << "F1 Score   " << report.f1 << '\n';
    out << "Accuracy   " << report.accuracy << '\n';
    out << "test messages: " << report.test_messages << "  rejected: " << report.rejected << '\n';
    out << "per label:\n";
    std::size_t width = 0;
    for (const auto& [label, lm] : report.per_label) {
        width = std::max(width, label.size());
    }
    for (const auto& [label, lm] : report.per_label) {
        out << "  " << std::left << std::setw(static_cast<int>(width)) << label << std::right
            << "  precision=" << lm.precision << "  recall=" << lm.recall << "  f1=" << lm.f1
            << '\n';
    }
    return out.str();
}

inline std::string render_sweep_table(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << std::left << std::setw(11) << "Metric" << std::right;
    for (const auto& r : reports) {
        std::ostringstream head;
        head << "alpha=" << std::setprecision(2) << std::fixed << r.config.alpha;
        out << std::setw(12) << head.str();
    }
    out << '\n';
    auto row = [&](const char* name, auto pick) {
        out << std::left << std::setw(11) << name << std::right;
        for (const auto& r : reports) {
            out << std::setw(12) << pick(r);
        }
        out << '\n';
    };
    row("Precision", [](const EvalReport& r) { return r.precision; });
    row("Recall", [](const EvalReport& r) { return r.recall; });
    row("F1 Score", [](const EvalReport& r) { return r.f1; });
    row("Accuracy", [](const EvalReport& r) { return r.accuracy; });
    return out.str();
}

inline std::string render_kappa(const KappaReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(6);
    out << "P_a   " << report.p_a << '\n';
    out << "P_e   " << report.p_e << '\n';
    if (report.omega) {
        out << "omega " << *report.omega << '\n';
    } else {
        out << "omega undefined (P_e = 1)\n";
    }
    return out.str();
}

inline nlohmann::json bench_report_to_json(const BenchReport& report) {
    auto stage = [](const StageTiming& t) {
        return nlohmann::json{{"mean_ms", t.mean_ms}, {"p95_ms", t.p95_ms}};
    };
    nlohmann::json j;
    j["extract"] = stage(report.extract);
    j["wboc"] = stage(report.wboc);
    j["csm"] = stage(report.csm);
    j["predict"] = stage(report.predict);
    j["model_bytes"] = report.model_bytes;
    j["messages"] = report.messages;
    j["repetitions"] = report.repetitions;
    return j;
}

inline std::string render_bench(const BenchReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3);
    out << "stage      mean_ms    p95_ms\n";
    auto row = [&](const char* name, const StageTiming& t) {
        out << std::left << std::setw(9) << name << std::right << std::setw(10) << t.mean_ms
            << std::setw(10) << t.p95_ms << '\n';
    };
    row("extract", report.extract);
    row("wboc", report.wboc);
    row("csm", report.csm);
    row("predict", report.predict);
    out << "model bytes: " << report.model_bytes << "  messages: " << report.messages
        << "  repetitions: " << report.repetitions << '\n';
    return out.str();
}

} // namespace smssim
