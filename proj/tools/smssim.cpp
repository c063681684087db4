// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 smssim contributors

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"

#include "smssim/smssim.hpp"

namespace {

using namespace smssim;

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = s.find(',', start);
        if (comma == std::string::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
    return parts;
}

std::vector<double> parse_alpha_list(const std::string& s) {
    std::vector<double> alphas;
    for (const auto& part : split_commas(s)) {
        try {
            std::size_t used = 0;
            alphas.push_back(std::stod(part, &used));
            if (used != part.size()) {
                throw std::invalid_argument(part);
            }
        } catch (const std::exception&) {
            throw std::runtime_error("cannot parse alpha value '" + part + "' in --alphas");
        }
    }
    return alphas;
}

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) {
        return "";
    }
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string strip_quotes(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

/// Pops one argument off a REPL command line: a double-quoted span or the
/// span up to the next space. Returns {argument, remainder}.
std::pair<std::string, std::string> pop_arg(const std::string& line) {
    const std::string t = strip(line);
    if (t.empty()) {
        return {"", ""};
    }
    if (t.front() == '"') {
        const std::size_t close = t.find('"', 1);
        if (close != std::string::npos) {
            return {t.substr(1, close - 1), strip(t.substr(close + 1))};
        }
        return {t.substr(1), ""};
    }
    const std::size_t space = t.find(' ');
    if (space == std::string::npos) {
        return {t, ""};
    }
    return {t.substr(0, space), strip(t.substr(space + 1))};
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write output file: " + path);
    }
    out << j.dump(2) << '\n';
}

std::shared_ptr<const EmbeddingTable> load_table(const std::string& path) {
    return std::make_shared<const EmbeddingTable>(load_embedding_table(path));
}

/// Optional config overrides shared by several subcommands. Negative values
/// mean "not given"; validation happens inside the library.
struct ConfigFlags {
    double alpha = -1.0;
    double threshold = -1.0;
    double tau_cluster = -1.0;
    double tau_match = -1.0;
    std::string denominator;

    void add_to(CLI::App* sub, bool with_cluster = true) {
        sub->add_option("--alpha", alpha, "confidence mix weight in (0,1] (default 0.8)");
        sub->add_option("--threshold", threshold,
                        "confidence rejection threshold in (0,1] (default 0.7)");
        if (with_cluster) {
            sub->add_option("--tau-cluster", tau_cluster,
                            "cluster-join similarity threshold in (0,1] (default 0.7)");
        }
        sub->add_option("--tau-match", tau_match,
                        "contextual word-match threshold in (0,1] (default 0.7)");
        sub->add_option("--denominator", denominator,
                        "cluster score denominator: selected|literal (default selected)");
    }

    PipelineConfig apply(PipelineConfig config) const {
        if (alpha >= 0.0) {
            config.alpha = alpha;
        }
        if (threshold >= 0.0) {
            config.confidence_threshold = threshold;
        }
        if (tau_cluster >= 0.0) {
            config.tau_cluster = tau_cluster;
        }
        if (tau_match >= 0.0) {
            config.tau_match = tau_match;
        }
        if (!denominator.empty()) {
            config.wboc_denominator = parse_wboc_denominator(denominator);
        }
        config.validate();
        return config;
    }
};

/// Builds a store from a labeled corpus: the first per_label labeled messages
/// of each label in corpus order (all of them when per_label is 0).
ModelStore store_from_corpus(const LabeledCorpus& corpus,
                             std::shared_ptr<const EmbeddingTable> table,
                             const PipelineConfig& config, int per_label) {
    std::map<std::string, std::vector<KeywordSequence>> tagged;
    for (const auto& msg : corpus.messages) {
        if (!msg.label) {
            continue;
        }
        auto& seqs = tagged[*msg.label];
        if (per_label > 0 && seqs.size() >= static_cast<std::size_t>(per_label)) {
            continue;
        }
        seqs.push_back(extract_keywords(msg, default_tagger()));
    }
    if (tagged.empty()) {
        throw std::runtime_error("corpus has no labeled messages to build from");
    }
    ModelStore store;
    store.config = config;
    store.table = std::move(table);
    for (const auto& [label, seqs] : tagged) {
        store.labels.emplace(label, build_label_model(label, seqs, *store.table,
                                                      config.tau_cluster));
    }
    return store;
}

int run_repl(const std::string& model_path, const std::string& embeddings_path) {
    auto table = load_table(embeddings_path);
    ModelStore store;
    if (std::filesystem::exists(model_path)) {
        store = load_model_store(model_path, table);
    } else {
        store.table = table;
    }
    const bool tty = isatty(fileno(stdin)) != 0;
    std::string line;
    while (true) {
        if (tty) {
            std::cout << "> " << std::flush;
        }
        if (!std::getline(std::cin, line)) {
            break;
        }
        const auto [command, rest] = pop_arg(line);
        if (command.empty()) {
            continue;
        }
        if (command == "quit") {
            break;
        }
        if (command == "labels") {
            if (store.labels.empty()) {
                std::cout << "(no labels)\n";
            } else {
                for (const auto& [label, model] : store.labels) {
                    std::cout << label << " (" << model.tagged.size() << ")\n";
                }
            }
            continue;
        }
        if (command == "save") {
            save_model_store(store, model_path);
            std::cout << "saved to " << model_path << '\n';
            continue;
        }
        if (command == "tag") {
            const auto [label, text_part] = pop_arg(rest);
            const std::string text = strip_quotes(text_part);
            if (label.empty() || text.empty()) {
                std::cout << "usage: tag <label> <text>\n";
                continue;
            }
            assign(store, SmsMessage{"repl", text, label}, label);
            std::cout << "tagged under '" << label << "' (" << store.labels.at(label).tagged.size()
                      << " messages)\n";
            continue;
        }
        if (command == "new") {
            const std::string text = strip_quotes(rest);
            if (text.empty()) {
                std::cout << "usage: new <text>\n";
                continue;
            }
            if (store.labels.empty()) {
                std::cout << "predicted: NONE (no labels tagged yet)\n";
                continue;
            }
            const PredictionResult result = predict(store, SmsMessage{"repl", text, std::nullopt});
            std::ostringstream conf;
            conf << std::fixed << std::setprecision(4) << result.chosen_confidence;
            if (!result.chosen) {
                std::cout << "predicted: NONE  confidence: " << conf.str() << '\n';
                continue;
            }
            std::cout << "predicted: " << *result.chosen << "  confidence: " << conf.str() << '\n';
            std::cout << "move to this label? [y/n]\n";
            std::string answer;
            if (tty) {
                std::cout << "> " << std::flush;
            }
            if (!std::getline(std::cin, answer)) {
                std::cout << "not moved\n";
                break;
            }
            if (strip(answer) == "y" || strip(answer) == "yes") {
                assign(store, SmsMessage{"repl", text, *result.chosen}, *result.chosen);
                std::cout << "moved under '" << *result.chosen << "' ("
                          << store.labels.at(*result.chosen).tagged.size() << " messages)\n";
            } else {
                std::cout << "not moved\n";
            }
            continue;
        }
        std::cout << "unrecognized command: '" << command
                  << "' (commands: tag <label> <text>, new <text>, labels, save, quit)\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SMS similarity pipeline: keyword extraction, weighted bag of clusters, and "
                 "contextual sequence matching"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    // gen-corpus
    auto* gen = app.add_subcommand("gen-corpus", "generate a deterministic synthetic SMS corpus");
    std::string gen_labels;
    int gen_per_label = 50;
    std::uint32_t gen_seed = 42;
    std::string gen_out;
    gen->add_option("--labels", gen_labels,
                    "comma-separated label names (default: the seven built-in labels)");
    gen->add_option("--per-label", gen_per_label, "messages per label (default 50)");
    gen->add_option("--seed", gen_seed, "generation seed (default 42)");
    gen->add_option("--out", gen_out, "output corpus path (default: stdout)");

    // build
    auto* build = app.add_subcommand("build", "build a model store from a labeled corpus");
    std::string build_corpus, build_embeddings, build_model;
    int build_per_label = 0;
    ConfigFlags build_config;
    build->add_option("--corpus", build_corpus, "labeled corpus (JSON lines)")->required();
    build->add_option("--embeddings", build_embeddings, "embedding table (text format)")
        ->required();
    build->add_option("--model", build_model, "output model path")->required();
    build->add_option("--tagged-per-label", build_per_label,
                      "tag only the first N messages per label (default 0 = all)");
    build_config.add_to(build);

    // predict
    auto* pred = app.add_subcommand("predict", "predict the label of one message");
    std::string pred_model, pred_embeddings, pred_text, pred_variant = "full";
    ConfigFlags pred_config;
    pred->add_option("--model", pred_model, "model store path")->required();
    pred->add_option("--embeddings", pred_embeddings, "embedding table")->required();
    pred->add_option("--text", pred_text, "message text")->required();
    pred->add_option("--variant", pred_variant, "pipeline variant: full|baseline|stasis");
    pred_config.add_to(pred, /*with_cluster=*/false);

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "inverted k-fold evaluation over a corpus");
    std::string eval_corpus, eval_embeddings, eval_variant = "full", eval_out;
    int eval_k = 60;
    std::uint32_t eval_seed = 42;
    ConfigFlags eval_config;
    eval->add_option("--corpus", eval_corpus, "labeled corpus")->required();
    eval->add_option("--embeddings", eval_embeddings, "embedding table")->required();
    eval->add_option("--k", eval_k, "fold count (default 60)");
    eval->add_option("--seed", eval_seed, "fold shuffle seed (default 42)");
    eval->add_option("--variant", eval_variant, "pipeline variant: full|baseline|stasis");
    eval->add_option("--out", eval_out, "write the JSON report here");
    eval_config.add_to(eval);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "evaluate across a list of alpha values");
    std::string sweep_corpus, sweep_embeddings, sweep_alphas = "0.6,0.7,0.8,0.9", sweep_out;
    int sweep_k = 60;
    std::uint32_t sweep_seed = 42;
    ConfigFlags sweep_config;
    sweep->add_option("--corpus", sweep_corpus, "labeled corpus")->required();
    sweep->add_option("--embeddings", sweep_embeddings, "embedding table")->required();
    sweep->add_option("--alphas", sweep_alphas, "comma-separated alpha values");
    sweep->add_option("--k", sweep_k, "fold count (default 60)");
    sweep->add_option("--seed", sweep_seed, "fold shuffle seed (default 42)");
    sweep->add_option("--out", sweep_out, "write the JSON reports here");
    sweep_config.add_to(sweep);

    // kappa
    auto* kappa = app.add_subcommand("kappa", "inter-annotator agreement from an annotation file");
    std::string kappa_annotations, kappa_annotators, kappa_labels, kappa_out;
    kappa->add_option("--annotations", kappa_annotations, "annotation file (JSON lines)")
        ->required();
    kappa->add_option("--annotators", kappa_annotators,
                      "two comma-separated annotator ids (default: the file's only two)");
    kappa->add_option("--labels", kappa_labels,
                      "comma-separated label set (default: labels seen in the file)");
    kappa->add_option("--out", kappa_out, "write the JSON report here");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "latency benchmark over a corpus");
    std::string bench_corpus, bench_embeddings, bench_out;
    int bench_per_label = 6;
    int bench_reps = 3;
    ConfigFlags bench_config;
    bench_cmd->add_option("--corpus", bench_corpus, "labeled corpus")->required();
    bench_cmd->add_option("--embeddings", bench_embeddings, "embedding table")->required();
    bench_cmd->add_option("--tagged-per-label", bench_per_label,
                          "messages per label in the store (default 6)");
    bench_cmd->add_option("--repetitions", bench_reps, "timing repetitions (default 3)");
    bench_cmd->add_option("--out", bench_out, "write the JSON report here");
    bench_config.add_to(bench_cmd);

    // repl
    auto* repl = app.add_subcommand("repl", "interactive tag-and-predict session");
    std::string repl_model, repl_embeddings;
    repl->add_option("--model", repl_model, "model store path (created on save)")->required();
    repl->add_option("--embeddings", repl_embeddings, "embedding table")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            std::set<std::string> labels = default_labels();
            if (!gen_labels.empty()) {
                labels.clear();
                for (const auto& l : split_commas(gen_labels)) {
                    const std::string name = strip(l);
                    if (name.empty()) {
                        throw std::runtime_error("empty label name in --labels");
                    }
                    labels.insert(name);
                }
            }
            const LabeledCorpus corpus = generate_synthetic_corpus(labels, gen_per_label, gen_seed);
            if (gen_out.empty()) {
                save_corpus(corpus, std::cout);
            } else {
                save_corpus(corpus, std::filesystem::path(gen_out));
            }
            return 0;
        }
        if (build->parsed()) {
            const LabeledCorpus corpus = load_corpus(build_corpus);
            auto table = load_table(build_embeddings);
            const PipelineConfig config = build_config.apply(PipelineConfig{});
            const ModelStore store = store_from_corpus(corpus, table, config, build_per_label);
            std::size_t tagged = 0, clusters = 0;
            for (const auto& [label, model] : store.labels) {
                tagged += model.tagged.size();
                clusters += model.clusters.size();
            }
            save_model_store(store, build_model);
            std::cout << "labels: " << store.labels.size() << "  tagged: " << tagged
                      << "  clusters: " << clusters << '\n';
            std::cout << "saved to " << build_model << '\n';
            return 0;
        }
        if (pred->parsed()) {
            auto table = load_table(pred_embeddings);
            ModelStore store = load_model_store(pred_model, table);
            store.config = pred_config.apply(store.config);
            const PredictionResult result =
                predict(store, SmsMessage{"cli", pred_text, std::nullopt}, default_tagger(),
                        parse_pipeline_variant(pred_variant));
            std::cout << render_prediction(result);
            return 0;
        }
        if (eval->parsed()) {
            const LabeledCorpus corpus = load_corpus(eval_corpus);
            auto table = load_table(eval_embeddings);
            const PipelineConfig config = eval_config.apply(PipelineConfig{});
            const FoldPlan plan = partition_kfold(corpus, eval_k, eval_seed);
            const EvalReport report = evaluate(corpus, table, config, plan,
                                               parse_pipeline_variant(eval_variant));
            std::cout << render_eval_report(report);
            if (!eval_out.empty()) {
                write_json_file(eval_report_to_json(report), eval_out);
            }
            return 0;
        }
        if (sweep->parsed()) {
            const LabeledCorpus corpus = load_corpus(sweep_corpus);
            auto table = load_table(sweep_embeddings);
            const PipelineConfig config = sweep_config.apply(PipelineConfig{});
            const FoldPlan plan = partition_kfold(corpus, sweep_k, sweep_seed);
            const auto reports =
                alpha_sweep(corpus, table, config, plan, parse_alpha_list(sweep_alphas));
            std::cout << render_sweep_table(reports);
            if (!sweep_out.empty()) {
                nlohmann::json j = nlohmann::json::array();
                for (const auto& r : reports) {
                    j.push_back(eval_report_to_json(r));
                }
                write_json_file(j, sweep_out);
            }
            return 0;
        }
        if (kappa->parsed()) {
            const auto sets = load_annotations(kappa_annotations);
            const AnnotationSet* a1 = nullptr;
            const AnnotationSet* a2 = nullptr;
            if (!kappa_annotators.empty()) {
                const auto names = split_commas(kappa_annotators);
                if (names.size() != 2) {
                    throw std::runtime_error("--annotators needs exactly two names");
                }
                for (const auto& s : sets) {
                    if (s.annotator == strip(names[0])) {
                        a1 = &s;
                    }
                    if (s.annotator == strip(names[1])) {
                        a2 = &s;
                    }
                }
                if (a1 == nullptr || a2 == nullptr || a1 == a2) {
                    throw std::runtime_error("annotators not found in " + kappa_annotations);
                }
            } else {
                if (sets.size() != 2) {
                    throw std::runtime_error("annotation file has " +
                                             std::to_string(sets.size()) +
                                             " annotators; pick two with --annotators");
                }
                a1 = &sets[0];
                a2 = &sets[1];
            }
            std::set<std::string> labels;
            if (!kappa_labels.empty()) {
                for (const auto& l : split_commas(kappa_labels)) {
                    labels.insert(strip(l));
                }
            } else {
                for (const auto* s : {a1, a2}) {
                    for (const auto& [id, label] : s->assignments) {
                        labels.insert(label);
                    }
                }
            }
            const KappaReport report = compute_kappa(*a1, *a2, labels);
            std::cout << render_kappa(report);
            if (!kappa_out.empty()) {
                nlohmann::json j;
                j["p_a"] = report.p_a;
                j["p_e"] = report.p_e;
                j["omega"] = report.omega ? nlohmann::json(*report.omega)
                                          : nlohmann::json(nullptr);
                write_json_file(j, kappa_out);
            }
            return 0;
        }
        if (bench_cmd->parsed()) {
            const LabeledCorpus corpus = load_corpus(bench_corpus);
            auto table = load_table(bench_embeddings);
            const PipelineConfig config = bench_config.apply(PipelineConfig{});
            const ModelStore store = store_from_corpus(corpus, table, config, bench_per_label);
            const BenchReport report =
                benchmark(store, corpus.messages, static_cast<std::size_t>(bench_reps));
            std::cout << render_bench(report);
            if (!bench_out.empty()) {
                write_json_file(bench_report_to_json(report), bench_out);
            }
            return 0;
        }
        if (repl->parsed()) {
            return run_repl(repl_model, repl_embeddings);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
