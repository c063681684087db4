// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 smssim contributors

#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "smssim/csm.hpp"
#include "smssim/wboc.hpp"

using namespace smssim;
using oracles::make_sequence;

namespace {

EmbeddingTable empty_table() {
    return EmbeddingTable(2);
}

} // namespace

TEST_CASE("longest block ties break to the earliest left position") {
    const EmbeddingTable table = empty_table();
    const auto s1 = make_sequence({"abc", "def"});
    const auto s2 = make_sequence({"def", "abc"});

    const MatchBlock block = longest_match_block(s1, s2, table, 0.7);
    CHECK(block.i == 0);
    CHECK(block.j == 1);
    CHECK(block.length == 1);

    // The block at (0,1) orphans "def": one matched word out of four.
    CHECK(matching_words(s1, s2, table, 0.7) == 1);
    CHECK(sim_contx(s1, s2, table, 0.7).value == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("embedding-similar words extend blocks across inexact positions") {
    EmbeddingTable table(2);
    table.insert("b", {1.0, 0.0});
    table.insert("x", {0.8, 0.6});

    const auto s1 = make_sequence({"a", "b", "c"});
    const auto s2 = make_sequence({"a", "x", "c"});
    CHECK(matching_words(s1, s2, table, 0.7) == 3);
    CHECK(sim_contx(s1, s2, table, 0.7).value == 1.0);
    // Raising the threshold above their similarity splits the block.
    CHECK(matching_words(s1, s2, table, 0.9) == 2);
}

TEST_CASE("each matched word is counted once") {
    const EmbeddingTable table = empty_table();
    const auto s1 = make_sequence({"a", "b", "a", "b"});
    const auto s2 = make_sequence({"a", "b"});
    CHECK(matching_words(s1, s2, table, 0.7) == 2);
    CHECK(sim_contx(s1, s2, table, 0.7).value == Catch::Approx(4.0 / 6.0).margin(1e-12));
}

TEST_CASE("self similarity is exactly 1 and empty input is degenerate") {
    const EmbeddingTable table = empty_table();
    const auto s1 = make_sequence({"pay", "bill", "today"});
    const ScoreResult self = sim_contx(s1, s1, table, 0.7);
    CHECK(self.value == 1.0);
    CHECK_FALSE(self.degenerate);

    const ScoreResult both_empty = sim_contx(make_sequence({}), make_sequence({}), table, 0.7);
    CHECK(both_empty.value == 0.0);
    CHECK(both_empty.degenerate);

    const ScoreResult one_empty = sim_contx(s1, make_sequence({}), table, 0.7);
    CHECK(one_empty.value == 0.0);
    CHECK_FALSE(one_empty.degenerate);
}

TEST_CASE("greedy matching can gain words when the threshold rises") {
    // Frozen counterexample to naive threshold monotonicity: at tau 0.8 the
    // earliest longest block pairs p with e2, orphaning both exact words; at
    // tau 0.9 that block disappears and the two exact matches survive.
    EmbeddingTable table(2);
    const double e2_angle = std::acos(0.6);
    const double p_angle = e2_angle + std::acos(0.85);
    table.insert("e1", {1.0, 0.0});
    table.insert("e2", {0.6, 0.8});
    table.insert("p", {std::cos(p_angle), std::sin(p_angle)});
    REQUIRE(cosine(table.lookup("p"), table.lookup("e2")) == Catch::Approx(0.85).margin(1e-9));
    REQUIRE(cosine(table.lookup("p"), table.lookup("e1")) < 0.7);

    const auto s1 = make_sequence({"p", "e1", "q", "e2"});
    const auto s2 = make_sequence({"e1", "e2"});

    CHECK(matching_words(s1, s2, table, 0.8) == 1);
    CHECK(matching_words(s1, s2, table, 0.9) == 2);
}

TEST_CASE("matching agrees with the exhaustive oracle on random pairs") {
    const EmbeddingTable table = oracles::fan_table();
    std::mt19937 rng(11);
    const double taus[] = {0.6, 0.7, 0.8, 0.95};
    for (int trial = 0; trial < 1000; ++trial) {
        const auto s1 = oracles::random_fan_sequence(rng);
        const auto s2 = oracles::random_fan_sequence(rng);
        const double tau = taus[trial % 4];

        const std::size_t m = matching_words(s1, s2, table, tau);
        REQUIRE(m == oracles::matching_words_oracle(s1, s2, table, tau));

        const MatchBlock block = longest_match_block(s1, s2, table, tau);
        const oracles::BlockRef ref = oracles::longest_block_exhaustive(
            s1, s2, table, tau, 0, s1.keywords.size(), 0, s2.keywords.size());
        REQUIRE(block.length == ref.length);
        if (ref.length > 0) {
            REQUIRE(block.i == ref.i);
            REQUIRE(block.j == ref.j);
        }

        CHECK(m <= oracles::max_ordered_matches(s1, s2, table, tau));
        CHECK(m <= std::min(s1.keywords.size(), s2.keywords.size()));

        const ScoreResult sim = sim_contx(s1, s2, table, tau);
        CHECK(sim.value >= 0.0);
        CHECK(sim.value <= 1.0);
        if (!s1.keywords.empty()) {
            CHECK(sim_contx(s1, s1, table, tau).value == 1.0);
        }
    }
}

TEST_CASE("label score is the best match over the label's tagged messages") {
    const EmbeddingTable table = empty_table();
    LabelModel model = build_label_model(
        "L", {make_sequence({"pay", "bill"}), make_sequence({"recharge", "phone", "today"})},
        table, 0.7);

    const auto probe = make_sequence({"recharge", "phone", "today"});
    CHECK(csm_label_score(model, probe, table, 0.7) == 1.0);

    const auto partial = make_sequence({"pay", "phone"});
    // Against ["pay","bill"]: one match of four words; against the other: one
    // match of five.
    CHECK(csm_label_score(model, partial, table, 0.7) == Catch::Approx(0.5).margin(1e-12));

    LabelModel empty;
    empty.label = "E";
    CHECK_THROWS_AS(csm_label_score(empty, probe, table, 0.7), std::invalid_argument);
}

TEST_CASE("threshold domain is validated") {
    const EmbeddingTable table = empty_table();
    const auto s = make_sequence({"a"});
    CHECK_THROWS_AS(sim_contx(s, s, table, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sim_contx(s, s, table, 1.5), std::invalid_argument);
    CHECK_NOTHROW(sim_contx(s, s, table, 1.0));
}

TEST_CASE("word-order similarity matches hand-worked examples") {
    const EmbeddingTable table = empty_table();

    const ScoreResult swapped =
        stasis_word_order_similarity(make_sequence({"a", "b"}), make_sequence({"b", "a"}), table,
                                     0.7);
    CHECK(swapped.value == Catch::Approx(2.0 / 3.0).margin(1e-12));

    const ScoreResult disjoint =
        stasis_word_order_similarity(make_sequence({"a", "b"}), make_sequence({"c"}), table, 0.7);
    CHECK(disjoint.value == 0.0);
    CHECK_FALSE(disjoint.degenerate);

    const auto s = make_sequence({"a", "b"});
    CHECK(stasis_word_order_similarity(s, s, table, 0.7).value == 1.0);

    const ScoreResult empty =
        stasis_word_order_similarity(make_sequence({}), make_sequence({}), table, 0.7);
    CHECK(empty.degenerate);
}

TEST_CASE("word-order similarity borrows positions from similar words") {
    const EmbeddingTable table = oracles::fan_table();
    // w0 and w1 sit at cosine ~0.988 > tau: each borrows the other's slot, so
    // the position vectors coincide.
    const ScoreResult r = stasis_word_order_similarity(make_sequence({"w0"}),
                                                       make_sequence({"w1"}), table, 0.7);
    CHECK(r.value == 1.0);

    // At a threshold above their similarity the borrowed slot vanishes.
    const ScoreResult strict = stasis_word_order_similarity(make_sequence({"w0"}),
                                                            make_sequence({"w1"}), table, 0.99);
    CHECK(strict.value == 0.0);
}

TEST_CASE("word-order similarity stays within the unit interval on random pairs") {
    const EmbeddingTable table = oracles::fan_table();
    std::mt19937 rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        const auto s1 = oracles::random_fan_sequence(rng);
        const auto s2 = oracles::random_fan_sequence(rng);
        if (s1.keywords.empty() && s2.keywords.empty()) {
            continue;
        }
        const ScoreResult r = stasis_word_order_similarity(s1, s2, table, 0.7);
        CHECK(r.value >= 0.0);
        CHECK(r.value <= 1.0);
        if (!s1.keywords.empty()) {
            CHECK(stasis_word_order_similarity(s1, s1, table, 0.7).value == 1.0);
        }
    }
}
