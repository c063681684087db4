// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 smssim contributors

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <catch2/catch_amalgamated.hpp>

#include "smssim/corpus.hpp"

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int status = -1;
    std::string output;
};

RunResult run_command(const std::string& command) {
    FILE* pipe = popen((command + " 2>&1").c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) {
        out.append(buf, n);
    }
    const int rc = pclose(pipe);
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, out};
}

RunResult run_cli(const std::string& args) {
    return run_command(std::string(SMSSIM_CLI_PATH) + " " + args);
}

const fs::path& workdir() {
    static const fs::path dir = [] {
        const fs::path d =
            fs::temp_directory_path() / ("smssim_cli_" + std::to_string(getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string embeddings_arg() {
    return std::string("--embeddings ") + SMSSIM_DATA_DIR + "/demo_embeddings_50d.txt";
}

std::string write_file(const std::string& name, const std::string& content) {
    const fs::path path = workdir() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Generates a corpus file once and builds a model beside it.
struct Fixture {
    std::string corpus_path;
    std::string model_path;
};

const Fixture& fixture() {
    static const Fixture f = [] {
        Fixture fx;
        fx.corpus_path = (workdir() / "corpus.jsonl").string();
        fx.model_path = (workdir() / "model.json").string();
        RunResult gen = run_cli("gen-corpus --per-label 8 --seed 42 --out " + fx.corpus_path);
        REQUIRE(gen.status == 0);
        RunResult build = run_cli("build --corpus " + fx.corpus_path + " " + embeddings_arg() +
                                  " --model " + fx.model_path + " --tagged-per-label 6");
        REQUIRE(build.status == 0);
        REQUIRE(build.output.find("labels: 7") != std::string::npos);
        REQUIRE(build.output.find("saved to") != std::string::npos);
        return fx;
    }();
    return f;
}

} // namespace

TEST_CASE("gen-corpus writes a deterministic labeled corpus") {
    const RunResult a = run_cli("gen-corpus --per-label 2 --seed 7");
    REQUIRE(a.status == 0);
    const RunResult b = run_cli("gen-corpus --per-label 2 --seed 7");
    CHECK(a.output == b.output);

    std::istringstream in(a.output);
    const smssim::LabeledCorpus corpus = smssim::load_corpus(in);
    CHECK(corpus.messages.size() == 14);
    CHECK(corpus.labels == smssim::default_labels());

    const RunResult c = run_cli("gen-corpus --per-label 2 --seed 8");
    CHECK(a.output != c.output);
}

TEST_CASE("gen-corpus honors a custom label list") {
    const RunResult r = run_cli("gen-corpus --labels \"Ping,Pong Pang\" --per-label 3");
    REQUIRE(r.status == 0);
    std::istringstream in(r.output);
    const smssim::LabeledCorpus corpus = smssim::load_corpus(in);
    CHECK(corpus.messages.size() == 6);
    CHECK(corpus.labels == std::set<std::string>{"Ping", "Pong Pang"});
}

TEST_CASE("build then predict retrieves the trained label") {
    const Fixture& fx = fixture();
    // A message the model was trained on must come back as its own label.
    const smssim::LabeledCorpus corpus = smssim::load_corpus(fs::path(fx.corpus_path));
    const smssim::SmsMessage& probe = corpus.messages.front();
    REQUIRE(probe.label.has_value());
    const RunResult r = run_cli("predict --model " + fx.model_path + " " + embeddings_arg() +
                                " --text \"" + probe.text + "\"");
    REQUIRE(r.status == 0);
    CHECK(r.output.find("chosen: " + *probe.label) != std::string::npos);
    CHECK(r.output.find("confidence: 1.0000") != std::string::npos);
    CHECK(r.output.find("wboc=") != std::string::npos);

    const RunResult variant =
        run_cli("predict --model " + fx.model_path + " " + embeddings_arg() +
                " --variant baseline --text \"pizza order\"");
    CHECK(variant.status == 0);

    const RunResult rejected = run_cli("predict --model " + fx.model_path + " " +
                                       embeddings_arg() + " --text \"qqq www eee\"");
    REQUIRE(rejected.status == 0);
    CHECK(rejected.output.find("chosen: NONE") != std::string::npos);
}

TEST_CASE("evaluate prints the metric block and writes a stable JSON report") {
    const Fixture& fx = fixture();
    const std::string out1 = (workdir() / "eval1.json").string();
    const std::string out2 = (workdir() / "eval2.json").string();

    const RunResult r1 = run_cli("evaluate --corpus " + fx.corpus_path + " " + embeddings_arg() +
                                 " --k 4 --seed 42 --out " + out1);
    REQUIRE(r1.status == 0);
    CHECK(r1.output.find("Precision") != std::string::npos);
    CHECK(r1.output.find("Accuracy") != std::string::npos);
    CHECK(r1.output.find("variant: full") != std::string::npos);

    const RunResult r2 = run_cli("evaluate --corpus " + fx.corpus_path + " " + embeddings_arg() +
                                 " --k 4 --seed 42 --out " + out2);
    REQUIRE(r2.status == 0);
    CHECK(r1.output == r2.output);
    CHECK(read_file(out1) == read_file(out2));

    const nlohmann::json j = nlohmann::json::parse(read_file(out1));
    CHECK(j["config"]["k"] == 4);
    CHECK(j["results"].contains("overall"));
}

TEST_CASE("evaluate supports the baseline variant flag") {
    const Fixture& fx = fixture();
    const RunResult r = run_cli("evaluate --corpus " + fx.corpus_path + " " + embeddings_arg() +
                                " --k 4 --variant baseline");
    REQUIRE(r.status == 0);
    CHECK(r.output.find("variant: baseline") != std::string::npos);
    CHECK(r.output.find("alpha: 1.0000") != std::string::npos);
}

TEST_CASE("sweep renders one column per alpha") {
    const Fixture& fx = fixture();
    const RunResult r = run_cli("sweep --corpus " + fx.corpus_path + " " + embeddings_arg() +
                                " --k 4 --alphas 0.6,0.9");
    REQUIRE(r.status == 0);
    CHECK(r.output.find("alpha=0.60") != std::string::npos);
    CHECK(r.output.find("alpha=0.90") != std::string::npos);
    CHECK(r.output.find("F1 Score") != std::string::npos);

    const RunResult bad = run_cli("sweep --corpus " + fx.corpus_path + " " + embeddings_arg() +
                                  " --k 4 --alphas 0.6,zap");
    CHECK(bad.status == 1);
    CHECK(bad.output.find("error:") != std::string::npos);
}

TEST_CASE("kappa reads annotation files and honors annotator selection") {
    const std::string path = write_file("annotations.jsonl",
                                        "{\"annotator\":\"a1\",\"id\":\"m1\",\"label\":\"X\"}\n"
                                        "{\"annotator\":\"a2\",\"id\":\"m1\",\"label\":\"X\"}\n"
                                        "{\"annotator\":\"a1\",\"id\":\"m2\",\"label\":\"X\"}\n"
                                        "{\"annotator\":\"a2\",\"id\":\"m2\",\"label\":\"X\"}\n"
                                        "{\"annotator\":\"a1\",\"id\":\"m3\",\"label\":\"Y\"}\n"
                                        "{\"annotator\":\"a2\",\"id\":\"m3\",\"label\":\"Y\"}\n"
                                        "{\"annotator\":\"a1\",\"id\":\"m4\",\"label\":\"X\"}\n"
                                        "{\"annotator\":\"a2\",\"id\":\"m4\",\"label\":\"Y\"}\n");
    const std::string out = (workdir() / "kappa.json").string();
    const RunResult r = run_cli("kappa --annotations " + path + " --out " + out);
    REQUIRE(r.status == 0);
    CHECK(r.output.find("P_a   0.750000") != std::string::npos);
    CHECK(r.output.find("P_e   0.531250") != std::string::npos);
    CHECK(r.output.find("omega 0.466667") != std::string::npos);

    const nlohmann::json j = nlohmann::json::parse(read_file(out));
    CHECK(j["p_a"] == 0.75);

    const RunResult named = run_cli("kappa --annotations " + path + " --annotators a1,a2");
    CHECK(named.status == 0);
    CHECK(named.output == r.output);

    const RunResult missing = run_cli("kappa --annotations " + path + " --annotators a1,a9");
    CHECK(missing.status == 1);
    CHECK(missing.output.find("error:") != std::string::npos);
}

TEST_CASE("bench reports per-stage latency") {
    const Fixture& fx = fixture();
    const RunResult r = run_cli("bench --corpus " + fx.corpus_path + " " + embeddings_arg() +
                                " --tagged-per-label 6 --repetitions 1");
    REQUIRE(r.status == 0);
    CHECK(r.output.find("stage") != std::string::npos);
    CHECK(r.output.find("predict") != std::string::npos);
    CHECK(r.output.find("model bytes:") != std::string::npos);
}

TEST_CASE("repl session tags, predicts, confirms moves, and persists on save") {
    const std::string model = (workdir() / "repl_model.json").string();
    const std::string script = write_file("repl_script.txt",
                                          "tag Food \"order pizza burger\"\n"
                                          "new \"order pizza burger\"\n"
                                          "y\n"
                                          "labels\n"
                                          "save\n"
                                          "quit\n");
    const RunResult r = run_command(std::string(SMSSIM_CLI_PATH) + " repl --model " + model +
                                    " " + embeddings_arg() + " < " + script);
    REQUIRE(r.status == 0);
    CHECK(r.output == "tagged under 'Food' (1 messages)\n"
                      "predicted: Food  confidence: 1.0000\n"
                      "move to this label? [y/n]\n"
                      "moved under 'Food' (2 messages)\n"
                      "Food (2)\n"
                      "saved to " + model + "\n");

    // The saved model carries over into the next session.
    const std::string script2 = write_file("repl_script2.txt", "labels\nquit\n");
    const RunResult r2 = run_command(std::string(SMSSIM_CLI_PATH) + " repl --model " + model +
                                     " " + embeddings_arg() + " < " + script2);
    REQUIRE(r2.status == 0);
    CHECK(r2.output == "Food (2)\n");
}

TEST_CASE("repl declines moves and handles unknown commands without state changes") {
    const std::string model = (workdir() / "repl_model2.json").string();
    const std::string script = write_file("repl_script3.txt",
                                          "new \"hello there\"\n"
                                          "bogus\n"
                                          "tag\n"
                                          "tag Food \"order pizza\"\n"
                                          "new \"order pizza\"\n"
                                          "n\n"
                                          "labels\n"
                                          "quit\n");
    const RunResult r = run_command(std::string(SMSSIM_CLI_PATH) + " repl --model " + model +
                                    " " + embeddings_arg() + " < " + script);
    REQUIRE(r.status == 0);
    CHECK(r.output ==
          "predicted: NONE (no labels tagged yet)\n"
          "unrecognized command: 'bogus' (commands: tag <label> <text>, new <text>, labels, "
          "save, quit)\n"
          "usage: tag <label> <text>\n"
          "tagged under 'Food' (1 messages)\n"
          "predicted: Food  confidence: 1.0000\n"
          "move to this label? [y/n]\n"
          "not moved\n"
          "Food (1)\n");
    // Without save, nothing was persisted.
    CHECK_FALSE(fs::exists(model));
}

TEST_CASE("failures exit nonzero with a single-line diagnostic") {
    const RunResult missing_file =
        run_cli("build --corpus /nonexistent.jsonl " + embeddings_arg() + " --model /tmp/x.json");
    CHECK(missing_file.status == 1);
    CHECK(missing_file.output.find("error:") == 0);

    const RunResult bad_k = run_cli("evaluate --corpus " + fixture().corpus_path + " " +
                                    embeddings_arg() + " --k 60");
    CHECK(bad_k.status == 1);
    CHECK(bad_k.output.find("error:") == 0);

    const RunResult no_sub = run_cli("");
    CHECK(no_sub.status != 0);

    const RunResult unknown_flag = run_cli("gen-corpus --frobnicate");
    CHECK(unknown_flag.status != 0);

    const RunResult missing_required = run_cli("predict --text hello");
    CHECK(missing_required.status != 0);
}
