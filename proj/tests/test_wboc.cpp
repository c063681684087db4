// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 smssim contributors

#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "smssim/wboc.hpp"

using namespace smssim;
using oracles::make_sequence;

namespace {

/// Two-word vocabulary at cosine 0.4: far enough apart to form two clusters
/// at the default threshold.
EmbeddingTable offer_table() {
    EmbeddingTable table(2);
    table.insert("cashback", {1.0, 0.0});
    table.insert("offer", {0.4, std::sqrt(0.84)});
    return table;
}

} // namespace

TEST_CASE("cluster similarity is exact membership, then clamped centroid cosine") {
    Cluster cluster;
    cluster.members = {{"cashback", 2}};
    cluster.frequency = 2;
    cluster.centroid = WordVector({1.0, 0.0});

    // Membership wins even for a word whose vector disagrees with the centroid.
    CHECK(word_cluster_similarity("cashback", WordVector({0.0, 1.0}), cluster) == 1.0);
    // Non-members fall back to centroid cosine, clamped at zero.
    CHECK(word_cluster_similarity("promo", WordVector({0.4, std::sqrt(0.84)}), cluster) ==
          Catch::Approx(0.4).margin(1e-12));
    CHECK(word_cluster_similarity("promo", WordVector({-1.0, 0.0}), cluster) == 0.0);
    // Null on either side means no similarity evidence at all.
    CHECK(word_cluster_similarity("promo", WordVector(), cluster) == 0.0);
    Cluster oov;
    oov.members = {{"zentra", 1}};
    oov.frequency = 1;
    CHECK(word_cluster_similarity("zentra", WordVector(), oov) == 1.0);
    CHECK(word_cluster_similarity("kartzo", WordVector(), oov) == 0.0);
    CHECK(word_cluster_similarity("kartzo", WordVector({1.0, 0.0}), oov) == 0.0);
}

TEST_CASE("dissimilar words form separate clusters, repeats join") {
    const EmbeddingTable table = offer_table();
    const LabelModel model = build_label_model(
        "Offers", {make_sequence({"cashback", "cashback", "offer"})}, table, 0.7);

    REQUIRE(model.clusters.size() == 2);
    CHECK(model.clusters[0].members.at("cashback") == 2);
    CHECK(model.clusters[0].frequency == 2);
    CHECK(model.clusters[0].centroid == WordVector({1.0, 0.0}));
    CHECK(model.clusters[1].members.at("offer") == 1);
    CHECK(model.clusters[1].frequency == 1);
    CHECK(model.label == "Offers");
    REQUIRE(model.tagged.size() == 1);
}

TEST_CASE("out-of-vocabulary words cluster by exact string only") {
    const EmbeddingTable table = offer_table();
    const LabelModel model = build_label_model(
        "Vendors", {make_sequence({"zentra", "kartzo", "zentra"})}, table, 0.7);

    REQUIRE(model.clusters.size() == 2);
    CHECK(model.clusters[0].members.at("zentra") == 2);
    CHECK(model.clusters[0].frequency == 2);
    CHECK(model.clusters[0].centroid.is_null());
    CHECK(model.clusters[1].members.at("kartzo") == 1);
}

TEST_CASE("centroid is the running mean of member occurrence vectors") {
    EmbeddingTable table(2);
    table.insert("a", {1.0, 0.0});
    table.insert("b", {0.8, 0.6});
    table.insert("c", {0.6, 0.8});

    const LabelModel model =
        build_label_model("L", {make_sequence({"a", "b", "c"})}, table, 0.7);

    // a seeds the cluster; b joins at cosine 0.8; the centroid moves to
    // (0.9, 0.3); c joins at cosine ~0.822 against that mean.
    REQUIRE(model.clusters.size() == 1);
    const Cluster& cluster = model.clusters[0];
    CHECK(cluster.frequency == 3);
    CHECK(cluster.members.size() == 3);
    REQUIRE(cluster.centroid.dimension() == 2);
    CHECK(cluster.centroid.components()[0] == Catch::Approx(0.8).margin(1e-12));
    CHECK(cluster.centroid.components()[1] == Catch::Approx(1.4 / 3.0).margin(1e-12));
}

TEST_CASE("message score weights best-cluster similarities by cluster frequency") {
    const EmbeddingTable table = offer_table();
    const LabelModel model = build_label_model(
        "Offers", {make_sequence({"cashback", "cashback", "cashback", "offer"})}, table, 0.7);
    REQUIRE(model.clusters.size() == 2);
    REQUIRE(model.clusters[0].frequency == 3);

    // promo sits at cosine 0.9 from the cashback centroid; deal at 0.5 from
    // the offer vector and negative from cashback.
    EmbeddingTable query = offer_table();
    query.insert("promo", {0.9, std::sqrt(0.19)});
    const double offer_angle = std::acos(0.4);
    query.insert("deal",
                 {std::cos(offer_angle + std::acos(0.5)), std::sin(offer_angle + std::acos(0.5))});

    const ScoreResult r = wboc_score(model, make_sequence({"promo", "deal"}), query);
    CHECK_FALSE(r.degenerate);
    // (3 * 0.9 + 1 * 0.5) / (3 + 1)
    CHECK(r.value == Catch::Approx(0.8).margin(1e-9));
}

TEST_CASE("a message made of member words scores exactly 1") {
    const EmbeddingTable table = offer_table();
    const LabelModel model = build_label_model(
        "Offers", {make_sequence({"cashback", "offer", "zentra"})}, table, 0.7);
    const ScoreResult r = wboc_score(model, make_sequence({"offer", "zentra", "cashback"}), table);
    CHECK(r.value == 1.0);
    CHECK_FALSE(r.degenerate);
}

TEST_CASE("unmatched words drag the score down through the selected denominator") {
    const EmbeddingTable table = offer_table();
    const LabelModel model = build_label_model(
        "Offers", {make_sequence({"cashback", "cashback", "offer"})}, table, 0.7);
    // "nonsense" is OOV and matches nothing: similarity 0, but its best
    // cluster (the first, by argmax over equal scores) still charges the
    // denominator with frequency 2.
    const ScoreResult r =
        wboc_score(model, make_sequence({"cashback", "offer", "nonsense"}), table);
    CHECK(r.value == Catch::Approx(3.0 / 5.0).margin(1e-12));
}

TEST_CASE("literal denominator can exceed the unit interval") {
    const EmbeddingTable table = offer_table();
    LabelModel model = build_label_model(
        "Offers",
        {make_sequence({"cashback", "cashback", "cashback", "cashback", "cashback", "offer"})},
        table, 0.7);
    REQUIRE(model.clusters[0].frequency == 5);
    REQUIRE(model.clusters[1].frequency == 1);

    const auto message = make_sequence({"cashback", "cashback", "cashback"});
    const ScoreResult selected = wboc_score(model, message, table, WbocDenominator::Selected);
    const ScoreResult literal = wboc_score(model, message, table, WbocDenominator::Literal);
    CHECK(selected.value == 1.0);
    CHECK(literal.value == Catch::Approx(15.0 / 6.0).margin(1e-12));
}

TEST_CASE("degenerate inputs score zero with the flag set") {
    const EmbeddingTable table = offer_table();
    const LabelModel model =
        build_label_model("Offers", {make_sequence({"cashback"})}, table, 0.7);
    CHECK(wboc_score(model, make_sequence({}), table).degenerate);

    LabelModel empty;
    empty.label = "Empty";
    CHECK(wboc_score(empty, make_sequence({"cashback"}), table).degenerate);

    CHECK_THROWS_AS(build_label_model("L", {}, table, 0.7), std::invalid_argument);
    CHECK_THROWS_AS(build_label_model("L", {make_sequence({"a"})}, table, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_label_model("L", {make_sequence({"a"})}, table, 1.5),
                    std::invalid_argument);
}

TEST_CASE("incremental additions equal a from-scratch rebuild") {
    const EmbeddingTable table = oracles::grouped_table();
    std::mt19937 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<KeywordSequence> stream;
        const std::size_t n = 1 + rng() % 6;
        for (std::size_t i = 0; i < n; ++i) {
            stream.push_back(oracles::random_grouped_sequence(rng, rng() % 4, rng() % 4));
        }
        LabelModel incremental =
            build_label_model("L", {stream[0]}, table, 0.7);
        for (std::size_t i = 1; i < n; ++i) {
            add_message(incremental, stream[i], table, 0.7);
        }
        const LabelModel rebuilt = build_label_model("L", stream, table, 0.7);
        CHECK(label_model_to_json(incremental).dump() == label_model_to_json(rebuilt).dump());
    }
}

TEST_CASE("label models survive a serialization round trip byte for byte") {
    const EmbeddingTable table = oracles::grouped_table();
    std::mt19937 rng(32);
    const LabelModel model = build_label_model(
        "L",
        {oracles::random_grouped_sequence(rng, 0, 1), oracles::random_grouped_sequence(rng, 0, 2)},
        table, 0.7);
    const nlohmann::json j = label_model_to_json(model);
    const LabelModel back = label_model_from_json(j);
    CHECK(label_model_to_json(back).dump() == j.dump());
    CHECK(back.label == model.label);
    CHECK(back.clusters.size() == model.clusters.size());
    CHECK(back.tagged.size() == model.tagged.size());
}

TEST_CASE("selected-denominator scores stay within the unit interval") {
    const EmbeddingTable table = oracles::grouped_table();
    std::mt19937 rng(33);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<KeywordSequence> stream;
        const std::size_t n = 1 + rng() % 4;
        for (std::size_t i = 0; i < n; ++i) {
            stream.push_back(oracles::random_grouped_sequence(rng, rng() % 4, rng() % 4));
        }
        const LabelModel model = build_label_model("L", stream, table, 0.7);
        const auto probe = oracles::random_grouped_sequence(rng, rng() % 4, rng() % 4);
        const ScoreResult r = wboc_score(model, probe, table);
        CHECK(r.value >= 0.0);
        CHECK(r.value <= 1.0);
    }
}

TEST_CASE("denominator names parse both ways") {
    CHECK(parse_wboc_denominator("selected") == WbocDenominator::Selected);
    CHECK(parse_wboc_denominator("literal") == WbocDenominator::Literal);
    CHECK(to_string(WbocDenominator::Selected) == "selected");
    CHECK(to_string(WbocDenominator::Literal) == "literal");
    CHECK_THROWS_AS(parse_wboc_denominator("other"), std::invalid_argument);
}
