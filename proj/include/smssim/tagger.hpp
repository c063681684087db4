// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 smssim contributors
#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "smssim/common.hpp"
#include "smssim/corpus.hpp"

namespace smssim {

/// Coarse part-of-speech tags. Only the NOUN/PROPN/VERB distinction matters
/// downstream (those are the keyword tags); the rest exist to filter.
enum class PosTag { NOUN, PROPN, VERB, ADJ, ADV, ADP, CONJ, PRON, DET, NUM, OTHER };

inline std::string_view to_string(PosTag tag) {
    switch (tag) {
    case PosTag::NOUN: return "NOUN";
    case PosTag::PROPN: return "PROPN";
    case PosTag::VERB: return "VERB";
    case PosTag::ADJ: return "ADJ";
    case PosTag::ADV: return "ADV";
    case PosTag::ADP: return "ADP";
    case PosTag::CONJ: return "CONJ";
    case PosTag::PRON: return "PRON";
    case PosTag::DET: return "DET";
    case PosTag::NUM: return "NUM";
    case PosTag::OTHER: return "OTHER";
    }
    return "OTHER";
}

inline PosTag parse_pos_tag(std::string_view name) {
    static const std::unordered_map<std::string_view, PosTag> table = {
        {"NOUN", PosTag::NOUN}, {"PROPN", PosTag::PROPN}, {"VERB", PosTag::VERB},
        {"ADJ", PosTag::ADJ},   {"ADV", PosTag::ADV},     {"ADP", PosTag::ADP},
        {"CONJ", PosTag::CONJ}, {"PRON", PosTag::PRON},   {"DET", PosTag::DET},
        {"NUM", PosTag::NUM},   {"OTHER", PosTag::OTHER}};
    auto it = table.find(name);
    if (it == table.end()) {
        throw std::invalid_argument("unknown POS tag name: '" + std::string(name) + "'");
    }
    return it->second;
}

inline bool is_keyword_tag(PosTag tag) {
    return tag == PosTag::NOUN || tag == PosTag::PROPN || tag == PosTag::VERB;
}

/// One token of an SMS: the original surface form, its lowercased form, and
/// (after tagging) a coarse POS tag.
struct Token {
    std::string surface;
    std::string normalized;
    std::optional<PosTag> tag;

    friend bool operator==(const Token&, const Token&) = default;
};

/// The ordered keywords extracted from one message; the unit of work for both
/// scoring branches.
struct KeywordSequence {
    std::vector<Token> keywords;
    std::string source_id;
};

/// Splits text into maximal runs of letters or of digits; '.' and ',' join a
/// digit run only when flanked by digits on both sides. Everything else
/// separates. Bytes >= 0x80 count as letters so UTF-8 words stay whole.
inline std::vector<Token> tokenize(std::string_view text) {
    auto is_letter = [](unsigned char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
    };
    auto is_digit = [](unsigned char c) { return c >= '0' && c <= '9'; };

    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        std::size_t j = i;
        if (is_letter(c)) {
            while (j < text.size() && is_letter(static_cast<unsigned char>(text[j]))) {
                ++j;
            }
        } else if (is_digit(c)) {
            ++j;
            while (j < text.size()) {
                const auto d = static_cast<unsigned char>(text[j]);
                if (is_digit(d)) {
                    ++j;
                } else if ((d == '.' || d == ',') && j + 1 < text.size() &&
                           is_digit(static_cast<unsigned char>(text[j + 1]))) {
                    j += 2;
                } else {
                    break;
                }
            }
        } else {
            ++i;
            continue;
        }
        std::string surface(text.substr(i, j - i));
        Token token;
        token.normalized = ascii_lower(surface);
        token.surface = std::move(surface);
        tokens.push_back(std::move(token));
        i = j;
    }
    return tokens;
}

// ---------------------------------------------------------------------------
// Viterbi decoding for a linear-chain model
// ---------------------------------------------------------------------------

/// Start and transition scores over a tag set of size T; emission scores are
/// supplied per call.
struct ViterbiModel {
    std::vector<double> start;                   // [T]
    std::vector<std::vector<double>> transition; // [T][T], transition[from][to]

    std::size_t tag_count() const { return start.size(); }

    void validate() const {
        const std::size_t t = start.size();
        if (t == 0) {
            throw std::invalid_argument("ViterbiModel: tag set must be non-empty");
        }
        if (transition.size() != t) {
            throw std::invalid_argument("ViterbiModel: transition matrix must be TxT");
        }
        for (const auto& row : transition) {
            if (row.size() != t) {
                throw std::invalid_argument("ViterbiModel: transition matrix must be TxT");
            }
            for (double v : row) {
                if (!std::isfinite(v)) {
                    throw std::invalid_argument("ViterbiModel: non-finite transition score");
                }
            }
        }
        for (double v : start) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("ViterbiModel: non-finite start score");
            }
        }
    }
};

/// Max-scoring tag path under start[t1] + sum emissions[i][ti] + sum
/// transition[ti][ti+1]. Ties resolve to the smallest tag index at each
/// backtrack step (equivalently: the reverse-lexicographically smallest
/// max-scoring path).
inline std::vector<std::size_t> viterbi_decode(const std::vector<std::vector<double>>& emissions,
                                               const ViterbiModel& model) {
    model.validate();
    if (emissions.empty()) {
        throw std::invalid_argument("viterbi_decode: empty emission matrix");
    }
    const std::size_t n = emissions.size();
    const std::size_t t = model.tag_count();
    for (const auto& row : emissions) {
        if (row.size() != t) {
            throw std::invalid_argument("viterbi_decode: emission row width " +
                                        std::to_string(row.size()) + " does not match tag count " +
                                        std::to_string(t));
        }
    }

    std::vector<std::vector<double>> best(n, std::vector<double>(t));
    std::vector<std::vector<std::size_t>> back(n, std::vector<std::size_t>(t, 0));
    for (std::size_t tag = 0; tag < t; ++tag) {
        best[0][tag] = model.start[tag] + emissions[0][tag];
    }
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t tag = 0; tag < t; ++tag) {
            std::size_t arg = 0;
            double score = best[i - 1][0] + model.transition[0][tag];
            for (std::size_t prev = 1; prev < t; ++prev) {
                const double candidate = best[i - 1][prev] + model.transition[prev][tag];
                if (candidate > score) { // strict: ties keep the smaller index
                    score = candidate;
                    arg = prev;
                }
            }
            best[i][tag] = score + emissions[i][tag];
            back[i][tag] = arg;
        }
    }
    std::size_t tail = 0;
    for (std::size_t tag = 1; tag < t; ++tag) {
        if (best[n - 1][tag] > best[n - 1][tail]) {
            tail = tag;
        }
    }
    std::vector<std::size_t> path(n);
    path[n - 1] = tail;
    for (std::size_t i = n - 1; i > 0; --i) {
        path[i - 1] = back[i][path[i]];
    }
    return path;
}

// ---------------------------------------------------------------------------
// taggers
// ---------------------------------------------------------------------------

/// Assigns a tag to every token of one message.
class Tagger {
public:
    virtual ~Tagger() = default;
    virtual void tag(std::vector<Token>& tokens, std::string_view message_id) const = 0;
};

using Lexicon = std::unordered_map<std::string, PosTag>;

/// The built-in word -> tag lexicon behind the default tagger. Closed-class
/// words (pronouns, determiners, adpositions, ...) matter most here: they are
/// what keyword extraction filters away.
inline const Lexicon& builtin_lexicon() {
    static const Lexicon table = [] {
        Lexicon t;
        auto add = [&t](std::initializer_list<const char*> words, PosTag tag) {
            for (const char* w : words) {
                t.emplace(w, tag);
            }
        };
        add({"i",    "you",   "your",   "yours", "my",    "mine",  "me",      "we",
             "our",  "ours",  "us",     "he",    "him",   "his",   "she",     "her",
             "hers", "it",    "its",    "they",  "them",  "their", "theirs",  "who",
             "whom", "whose", "what",   "which", "anyone", "someone", "everyone",
             "yourself"},
            PosTag::PRON);
        add({"the",  "a",    "an",    "this", "that",  "these", "those", "any", "some",
             "all",  "no",   "every", "each", "both",  "few",   "more",  "most",
             "other", "another", "such"},
            PosTag::DET);
        add({"in",     "on",      "at",     "of",      "for",    "to",     "from",
             "with",   "by",      "about",  "against", "between", "into",  "through",
             "during", "before",  "after",  "above",   "below",  "under",  "over",
             "upto",   "via",     "per",    "till",    "until",  "within", "without",
             "across", "near",    "off"},
            PosTag::ADP);
        add({"and", "or", "but", "nor", "so", "yet", "because", "while", "although",
             "though", "unless", "than", "as", "whereas", "if"},
            PosTag::CONJ);
        add({"is",       "am",       "are",      "was",      "were",     "be",
             "been",     "being",    "has",      "have",     "had",      "having",
             "do",       "does",     "did",      "done",     "will",     "would",
             "shall",    "should",   "can",      "could",    "may",      "might",
             "must",     "get",      "got",      "gets",     "use",      "used",
             "uses",     "make",     "made",     "makes",    "buy",      "bought",
             "pay",      "paid",     "pays",     "send",     "sent",     "sends",
             "receive",  "received", "receives", "give",     "given",    "gave",
             "take",     "taken",    "took",     "click",    "visit",    "call",
             "avail",    "apply",    "earn",     "win",      "won",      "book",
             "share",    "shared",   "enter",    "entered",  "sign",     "log",
             "complete", "completed", "authorise", "authorize", "redeem", "claim",
             "expires",  "expire",   "ends",     "start",    "starts",   "check",
             "track",    "download", "install",  "renew",    "upgrade",  "shop",
             "save",     "spend",    "spent",    "transfer", "withdraw", "hurry",
             "come",     "go",       "try",      "choose",   "select",   "unlock",
             "grab",     "enjoy",    "reply",    "stop",     "serves",   "departs",
             "reserve"},
            PosTag::VERB);
        add({"not",   "now",    "soon",      "today",       "tomorrow", "yesterday",
             "here",  "there",  "again",     "already",     "always",   "never",
             "very",  "too",    "also",      "just",        "only",     "still",
             "even",  "almost", "quickly",   "immediately", "instantly", "currently",
             "daily", "once",   "twice",     "away",        "back",     "please"},
            PosTag::ADV);
        add({"new",     "free",    "valid",   "dear",    "available", "exclusive",
             "special", "limited", "best",    "great",   "good",      "big",
             "huge",    "extra",   "flat",    "first",   "last",      "next",
             "final",   "latest",  "lucky",   "happy",   "safe",      "quick",
             "easy",    "instant", "low",     "high",    "mega",      "super",
             "total",   "minimum", "maximum", "net",     "open",      "hungry"},
            PosTag::ADJ);
        add({"one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
             "ten", "zero", "hundred", "thousand", "lakh", "crore", "million"},
            PosTag::NUM);
        add({"ok", "okay", "hi", "hello", "hey", "url", "tnc", "http", "https", "www", "com"},
            PosTag::OTHER);
        add({"otp",        "cashback",  "offer",     "code",        "coupon",   "promo",
             "discount",   "deal",      "account",   "balance",     "card",     "bank",
             "wallet",     "amount",    "transaction", "payment",   "purchase", "salary",
             "money",      "cash",      "price",     "cost",        "fee",      "charge",
             "order",      "booking",   "ticket",    "flight",      "airport",  "airline",
             "seat",       "boarding",  "checkin",   "travel",      "trip",     "journey",
             "hotel",      "room",      "stay",      "night",       "weekend",  "food",
             "pizza",      "burger",    "meal",      "restaurant",  "delivery", "customer",
             "user",       "member",    "number",    "details",     "reference", "request",
             "update",     "notification", "alert",  "message",     "sms",      "text",
             "phone",      "mobile",    "device",    "app",         "password", "pin",
             "login",      "verification", "security", "time",      "date",     "day",
             "minutes",    "hours",     "validity",  "expiry",      "store",    "sale",
             "fest",       "festival",  "season",    "gift",        "prize",    "reward",
             "points",     "voucher",   "statement", "emi",         "loan",     "credit",
             "debit",      "insurance", "policy",    "bill",        "recharge", "plan",
             "pack",       "data",      "service",   "support",     "team",     "helpline",
             "branch",     "office",    "web",       "percent",     "rupees",   "rs"},
            PosTag::NOUN);
        return t;
    }();
    return table;
}

/// Loads a "word<TAB>TAG" lexicon file.
inline Lexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open lexicon file: " + path.string());
    }
    Lexicon lexicon;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                     ": expected \"word<TAB>TAG\"");
        }
        const std::string word = ascii_lower(std::string_view(line).substr(0, tab));
        PosTag tag;
        try {
            tag = parse_pos_tag(std::string_view(line).substr(tab + 1));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) + ": " +
                                     e.what());
        }
        if (!lexicon.emplace(word, tag).second) {
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                     ": duplicate entry for \"" + word + "\"");
        }
    }
    return lexicon;
}

/// Deterministic lexicon-plus-heuristics tagger: exact lexicon lookup, then
/// digit tokens -> NUM, capitalized mid-sentence unknowns -> PROPN (vendor
/// names), then suffix rules, then NOUN.
class LexiconTagger : public Tagger {
public:
    LexiconTagger() : lexicon_(&builtin_lexicon()) {}
    explicit LexiconTagger(Lexicon lexicon)
        : owned_(std::move(lexicon)), lexicon_(&owned_) {}

    void tag(std::vector<Token>& tokens, std::string_view /*message_id*/) const override {
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            tokens[i].tag = classify(tokens[i], i == 0);
        }
    }

private:
    static bool ends_with(std::string_view s, std::string_view suffix) {
        return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
    }

    PosTag classify(const Token& token, bool sentence_initial) const {
        auto it = lexicon_->find(token.normalized);
        if (it != lexicon_->end()) {
            return it->second;
        }
        const auto first = static_cast<unsigned char>(token.surface.front());
        if (first >= '0' && first <= '9') {
            return PosTag::NUM;
        }
        if (!sentence_initial && first >= 'A' && first <= 'Z') {
            return PosTag::PROPN;
        }
        if (token.normalized.size() >= 5 && ends_with(token.normalized, "ing")) {
            return PosTag::VERB;
        }
        if (token.normalized.size() >= 4 && ends_with(token.normalized, "ed")) {
            return PosTag::VERB;
        }
        if (token.normalized.size() >= 4 && ends_with(token.normalized, "ly")) {
            return PosTag::ADV;
        }
        return PosTag::NOUN;
    }

    Lexicon owned_;
    const Lexicon* lexicon_;
};

/// Shared default tagger instance (stateless after construction).
inline const Tagger& default_tagger() {
    static const LexiconTagger tagger;
    return tagger;
}

// ---------------------------------------------------------------------------
// externally produced emission scores
// ---------------------------------------------------------------------------

/// Per-message emission matrix plus the tag name of each column.
struct MessageEmissions {
    std::vector<std::string> tags;
    std::vector<std::vector<double>> emissions; // one row per token
};

/// Loads a JSON-lines file of {"id", "emissions": NxT, "tags": [names]}.
inline std::map<std::string, MessageEmissions>
load_external_emissions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open emissions file: " + path.string());
    }
    std::map<std::string, MessageEmissions> result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::string where = path.string() + " line " + std::to_string(line_no);
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(where + ": malformed JSON (" + e.what() + ")");
        }
        if (!row.contains("id") || !row["id"].is_string()) {
            throw std::runtime_error(where + ": missing or invalid \"id\"");
        }
        if (!row.contains("tags") || !row["tags"].is_array() || row["tags"].empty()) {
            throw std::runtime_error(where + ": missing or invalid \"tags\"");
        }
        MessageEmissions entry;
        for (const auto& name : row["tags"]) {
            if (!name.is_string()) {
                throw std::runtime_error(where + ": tag names must be strings");
            }
            try {
                parse_pos_tag(name.get<std::string>());
            } catch (const std::invalid_argument& e) {
                throw std::runtime_error(where + ": " + e.what());
            }
            entry.tags.push_back(name.get<std::string>());
        }
        if (!row.contains("emissions") || !row["emissions"].is_array()) {
            throw std::runtime_error(where + ": missing or invalid \"emissions\"");
        }
        for (const auto& json_row : row["emissions"]) {
            if (!json_row.is_array() || json_row.size() != entry.tags.size()) {
                throw std::runtime_error(where + ": emission rows must have one score per tag");
            }
            std::vector<double> scores;
            for (const auto& v : json_row) {
                if (!v.is_number()) {
                    throw std::runtime_error(where + ": emission scores must be numbers");
                }
                scores.push_back(v.get<double>());
            }
            entry.emissions.push_back(std::move(scores));
        }
        if (!result.emplace(row["id"].get<std::string>(), std::move(entry)).second) {
            throw std::runtime_error(where + ": duplicate id \"" + row["id"].get<std::string>() +
                                     "\"");
        }
    }
    return result;
}

/// Tags tokens by Viterbi-decoding externally supplied emission scores.
class EmissionTagger : public Tagger {
public:
    EmissionTagger(ViterbiModel model, std::map<std::string, MessageEmissions> by_id)
        : model_(std::move(model)), by_id_(std::move(by_id)) {
        model_.validate();
    }

    void tag(std::vector<Token>& tokens, std::string_view message_id) const override {
        if (tokens.empty()) {
            return;
        }
        auto it = by_id_.find(std::string(message_id));
        if (it == by_id_.end()) {
            throw std::invalid_argument("no external emissions for message \"" +
                                        std::string(message_id) + "\"");
        }
        const MessageEmissions& entry = it->second;
        if (entry.emissions.size() != tokens.size()) {
            throw std::invalid_argument("external emissions for message \"" +
                                        std::string(message_id) + "\" have " +
                                        std::to_string(entry.emissions.size()) + " rows for " +
                                        std::to_string(tokens.size()) + " tokens");
        }
        if (entry.tags.size() != model_.tag_count()) {
            throw std::invalid_argument("external emissions for message \"" +
                                        std::string(message_id) + "\" use " +
                                        std::to_string(entry.tags.size()) +
                                        " tags, model expects " +
                                        std::to_string(model_.tag_count()));
        }
        const auto path = viterbi_decode(entry.emissions, model_);
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            tokens[i].tag = parse_pos_tag(entry.tags[path[i]]);
        }
    }

private:
    ViterbiModel model_;
    std::map<std::string, MessageEmissions> by_id_;
};

// ---------------------------------------------------------------------------
// keyword extraction
// ---------------------------------------------------------------------------

/// Tags a token sequence in place and returns it (convenience wrapper).
inline std::vector<Token> tag_tokens(std::vector<Token> tokens, const Tagger& tagger,
                                     std::string_view message_id = "") {
    tagger.tag(tokens, message_id);
    return tokens;
}

/// Tokenize, tag, and keep nouns, proper nouns, and verbs in order. If that
/// filter empties a non-empty token sequence, all tokens are kept instead so
/// downstream scoring never sees an artificially empty message.
inline KeywordSequence extract_keywords(std::string_view text, const Tagger& tagger,
                                        std::string_view source_id = "") {
    KeywordSequence seq;
    seq.source_id = std::string(source_id);
    std::vector<Token> tokens = tokenize(text);
    tagger.tag(tokens, source_id);
    for (const auto& token : tokens) {
        if (token.tag && is_keyword_tag(*token.tag)) {
            seq.keywords.push_back(token);
        }
    }
    if (seq.keywords.empty() && !tokens.empty()) {
        seq.keywords = std::move(tokens);
    }
    return seq;
}

inline KeywordSequence extract_keywords(const SmsMessage& message, const Tagger& tagger) {
    return extract_keywords(message.text, tagger, message.id);
}

} // namespace smssim
