// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 smssim contributors
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "smssim/common.hpp"
#include "smssim/embeddings.hpp"
#include "smssim/tagger.hpp"
#include "smssim/wboc.hpp"

namespace smssim {

/// A run of aligned word pairs: s1[i..i+length) matches s2[j..j+length).
struct MatchBlock {
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t length = 0;
};

namespace detail {

/// Pairwise contextual-equality matrix between two keyword sequences: cells
/// are true when the words are exactly equal (normalized) or their embedding
/// similarity reaches tau. run[i][j] additionally holds the length of the
/// match streak starting at (i, j), enabling O(1) block-length queries.
struct MatchMatrix {
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    std::vector<std::size_t> run; // (n1+1) x (n2+1), trailing rows/cols zero

    std::size_t run_at(std::size_t i, std::size_t j) const { return run[i * (n2 + 1) + j]; }
};

inline MatchMatrix build_match_matrix(const KeywordSequence& s1, const KeywordSequence& s2,
                                      const EmbeddingTable& table, double tau_match) {
    MatchMatrix m;
    m.n1 = s1.keywords.size();
    m.n2 = s2.keywords.size();
    m.run.assign((m.n1 + 1) * (m.n2 + 1), 0);

    std::vector<WordVector> v1, v2;
    v1.reserve(m.n1);
    v2.reserve(m.n2);
    for (const auto& w : s1.keywords) {
        v1.push_back(table.lookup(w.normalized));
    }
    for (const auto& w : s2.keywords) {
        v2.push_back(table.lookup(w.normalized));
    }

    for (std::size_t i = m.n1; i-- > 0;) {
        for (std::size_t j = m.n2; j-- > 0;) {
            const auto& a = s1.keywords[i];
            const auto& b = s2.keywords[j];
            const bool match =
                a.normalized == b.normalized ||
                word_similarity(a.normalized, v1[i], b.normalized, v2[j]) >= tau_match;
            m.run[i * (m.n2 + 1) + j] = match ? m.run_at(i + 1, j + 1) + 1 : 0;
        }
    }
    return m;
}

/// Longest matching block within [lo1,hi1) x [lo2,hi2); ties resolve to the
/// smallest i, then the smallest j. length 0 when nothing matches.
inline MatchBlock longest_block_in_range(const MatchMatrix& m, std::size_t lo1, std::size_t hi1,
                                         std::size_t lo2, std::size_t hi2) {
    MatchBlock best;
    for (std::size_t i = lo1; i < hi1; ++i) {
        for (std::size_t j = lo2; j < hi2; ++j) {
            std::size_t r = m.run_at(i, j);
            if (r > hi1 - i) {
                r = hi1 - i;
            }
            if (r > hi2 - j) {
                r = hi2 - j;
            }
            if (r > best.length) { // strict: ties keep smallest i, then j
                best = {i, j, r};
            }
        }
    }
    return best;
}

inline std::size_t matching_words_in_range(const MatchMatrix& m, std::size_t lo1, std::size_t hi1,
                                           std::size_t lo2, std::size_t hi2) {
    const MatchBlock block = longest_block_in_range(m, lo1, hi1, lo2, hi2);
    if (block.length == 0) {
        return 0;
    }
    return block.length + matching_words_in_range(m, lo1, block.i, lo2, block.j) +
           matching_words_in_range(m, block.i + block.length, hi1, block.j + block.length, hi2);
}

inline void check_tau(double tau_match, const char* who) {
    if (tau_match <= 0.0 || tau_match > 1.0) {
        throw std::invalid_argument(std::string(who) + ": tau_match must lie in (0,1]");
    }
}

} // namespace detail

/// The longest contextual match between two sequences (whole-range variant of
/// the block search the recursion uses).
inline MatchBlock longest_match_block(const KeywordSequence& s1, const KeywordSequence& s2,
                                      const EmbeddingTable& table, double tau_match) {
    detail::check_tau(tau_match, "longest_match_block");
    const auto m = detail::build_match_matrix(s1, s2, table, tau_match);
    return detail::longest_block_in_range(m, 0, m.n1, 0, m.n2);
}

/// Number of matching words under greedy longest-block recursion: take the
/// longest block (ties: smallest i, then j), count its pairs once, and recurse
/// on both flanks. Words match when exactly equal or embedding-similar at
/// tau_match or above.
inline std::size_t matching_words(const KeywordSequence& s1, const KeywordSequence& s2,
                                  const EmbeddingTable& table, double tau_match) {
    detail::check_tau(tau_match, "matching_words");
    if (s1.keywords.empty() || s2.keywords.empty()) {
        return 0;
    }
    const auto m = detail::build_match_matrix(s1, s2, table, tau_match);
    return detail::matching_words_in_range(m, 0, m.n1, 0, m.n2);
}

/// Gestalt similarity 2*M_w/(|s1| + |s2|), in [0,1]. Two empty sequences are
/// degenerate and score 0.
inline ScoreResult sim_contx(const KeywordSequence& s1, const KeywordSequence& s2,
                             const EmbeddingTable& table, double tau_match) {
    detail::check_tau(tau_match, "sim_contx");
    const std::size_t total = s1.keywords.size() + s2.keywords.size();
    if (total == 0) {
        return {0.0, true};
    }
    const double m = static_cast<double>(matching_words(s1, s2, table, tau_match));
    return {2.0 * m / static_cast<double>(total), false};
}

/// Best gestalt similarity between s1 and any tagged message of the label.
inline double csm_label_score(const LabelModel& model, const KeywordSequence& s1,
                              const EmbeddingTable& table, double tau_match) {
    detail::check_tau(tau_match, "csm_label_score");
    if (model.tagged.empty()) {
        throw std::invalid_argument("csm_label_score: label \"" + model.label +
                                    "\" has no tagged messages");
    }
    double best = 0.0;
    for (const auto& tagged : model.tagged) {
        const double sim = sim_contx(s1, tagged, table, tau_match).value;
        if (sim > best) {
            best = sim;
        }
    }
    return best;
}

/// Word-order baseline: over the unique joint word list, each sentence yields
/// a vector of 1-based positions (own position if the word occurs, else the
/// position of its most similar word when that similarity strictly exceeds
/// tau, else 0); similarity is 1 - |r1 - r2| / |r1 + r2|.
inline ScoreResult stasis_word_order_similarity(const KeywordSequence& s1,
                                                const KeywordSequence& s2,
                                                const EmbeddingTable& table, double tau) {
    detail::check_tau(tau, "stasis_word_order_similarity");
    if (s1.keywords.empty() && s2.keywords.empty()) {
        return {0.0, true};
    }

    std::vector<std::string> joint;
    auto add_unique = [&joint](const KeywordSequence& s) {
        for (const auto& w : s.keywords) {
            bool seen = false;
            for (const auto& j : joint) {
                if (j == w.normalized) {
                    seen = true;
                    break;
                }
            }
            if (!seen) {
                joint.push_back(w.normalized);
            }
        }
    };
    add_unique(s1);
    add_unique(s2);

    auto position_vector = [&](const KeywordSequence& s) {
        std::vector<double> r(joint.size(), 0.0);
        std::vector<WordVector> vecs;
        vecs.reserve(s.keywords.size());
        for (const auto& w : s.keywords) {
            vecs.push_back(table.lookup(w.normalized));
        }
        for (std::size_t k = 0; k < joint.size(); ++k) {
            bool present = false;
            for (std::size_t p = 0; p < s.keywords.size(); ++p) {
                if (s.keywords[p].normalized == joint[k]) {
                    r[k] = static_cast<double>(p + 1);
                    present = true;
                    break;
                }
            }
            if (present) {
                continue;
            }
            const WordVector joint_vec = table.lookup(joint[k]);
            double best_sim = 0.0;
            std::size_t best_pos = 0;
            for (std::size_t p = 0; p < s.keywords.size(); ++p) {
                const double sim =
                    word_similarity(joint[k], joint_vec, s.keywords[p].normalized, vecs[p]);
                if (sim > best_sim) { // strict: earliest position wins ties
                    best_sim = sim;
                    best_pos = p;
                }
            }
            if (best_sim > tau) {
                r[k] = static_cast<double>(best_pos + 1);
            }
        }
        return r;
    };

    const std::vector<double> r1 = position_vector(s1);
    const std::vector<double> r2 = position_vector(s2);
    double diff = 0.0, sum = 0.0;
    for (std::size_t k = 0; k < joint.size(); ++k) {
        diff += (r1[k] - r2[k]) * (r1[k] - r2[k]);
        sum += (r1[k] + r2[k]) * (r1[k] + r2[k]);
    }
    // sum > 0: every joint word occurs in at least one sentence at position >= 1
    return {1.0 - std::sqrt(diff) / std::sqrt(sum), false};
}

} // namespace smssim
