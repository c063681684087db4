// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 smssim contributors
#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "smssim/common.hpp"

namespace smssim {

/// One SMS. The label is the user-assigned category, when known.
struct SmsMessage {
    std::string id;
    std::string text;
    std::optional<std::string> label;
};

/// A set of messages plus the label names occurring in them.
struct LabeledCorpus {
    std::vector<SmsMessage> messages;
    std::set<std::string> labels;
};

/// One annotator's message-id -> label assignments.
struct AnnotationSet {
    std::string annotator;
    std::map<std::string, std::string> assignments;
};

/// Inter-annotator agreement: observed agreement, chance agreement, and the
/// chance-corrected kappa (absent when p_e = 1 makes it undefined).
struct KappaReport {
    double p_a = 0.0;
    double p_e = 0.0;
    std::optional<double> omega;
};

// ---------------------------------------------------------------------------
// corpus file I/O (JSON Lines: {"id": ..., "text": ..., "label": ...|null})
// ---------------------------------------------------------------------------

inline LabeledCorpus load_corpus(std::istream& in, const std::string& source_name = "<stream>") {
    LabeledCorpus corpus;
    std::set<std::string> seen_ids;
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
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(source_name + " line " + std::to_string(line_no) +
                                     ": malformed JSON (" + e.what() + ")");
        }
        if (!row.is_object() || !row.contains("id") || !row["id"].is_string() ||
            row["id"].get<std::string>().empty()) {
            throw std::runtime_error(source_name + " line " + std::to_string(line_no) +
                                     ": missing or invalid \"id\"");
        }
        if (!row.contains("text") || !row["text"].is_string() ||
            row["text"].get<std::string>().empty()) {
            throw std::runtime_error(source_name + " line " + std::to_string(line_no) +
                                     ": missing or invalid \"text\"");
        }
        SmsMessage msg;
        msg.id = row["id"].get<std::string>();
        msg.text = row["text"].get<std::string>();
        if (row.contains("label") && !row["label"].is_null()) {
            if (!row["label"].is_string() || row["label"].get<std::string>().empty()) {
                throw std::runtime_error(source_name + " line " + std::to_string(line_no) +
                                         ": invalid \"label\"");
            }
            msg.label = row["label"].get<std::string>();
        }
        if (!seen_ids.insert(msg.id).second) {
            throw std::runtime_error(source_name + " line " + std::to_string(line_no) +
                                     ": duplicate id \"" + msg.id + "\"");
        }
        if (msg.label) {
            corpus.labels.insert(*msg.label);
        }
        corpus.messages.push_back(std::move(msg));
    }
    return corpus;
}

inline LabeledCorpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open corpus file: " + path.string());
    }
    return load_corpus(in, path.string());
}

inline void save_corpus(const LabeledCorpus& corpus, std::ostream& out) {
    for (const auto& msg : corpus.messages) {
        nlohmann::json row;
        row["id"] = msg.id;
        row["text"] = msg.text;
        row["label"] = msg.label ? nlohmann::json(*msg.label) : nlohmann::json(nullptr);
        out << row.dump() << '\n';
    }
}

inline void save_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write corpus file: " + path.string());
    }
    save_corpus(corpus, out);
}

// ---------------------------------------------------------------------------
// synthetic corpus generation
// ---------------------------------------------------------------------------

namespace detail {

// All randomness below uses raw mt19937 draws with modulo so that generated
// corpora are byte-identical across standard library implementations.
inline std::uint32_t draw(std::mt19937& rng, std::uint32_t n) {
    return static_cast<std::uint32_t>(rng() % n);
}

inline std::string pick(std::mt19937& rng, const std::vector<std::string>& choices) {
    return choices[draw(rng, static_cast<std::uint32_t>(choices.size()))];
}

inline std::string fill_template(const std::string& tmpl, const std::string& label,
                                 std::mt19937& rng) {
    static const std::vector<std::string> vendors = {"Zentra",    "Quickora", "NovaAir",
                                                     "PayOrbit",  "Snackly",  "Roomloft",
                                                     "Vistabank", "Kartzo",   "Fundsy",
                                                     "Mealdash"};
    static const std::vector<std::string> cities = {"Mumbai", "Delhi",  "Chennai",
                                                    "Pune",   "Jaipur", "Kochi"};
    static const std::vector<std::string> promos = {"FLAT50", "WELCOME", "SAVEBIG", "FESTOFF",
                                                    "TREAT20"};
    static const std::vector<std::string> verbs = {"get", "grab", "enjoy", "avail"};
    static const std::vector<std::string> months = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                    "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    static const std::vector<std::string> minutes = {"5", "10", "15", "30"};
    static const std::vector<std::string> percents = {"10", "15", "20", "25", "30", "40", "50"};

    std::string out;
    out.reserve(tmpl.size() + 32);
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        if (tmpl[pos] != '{') {
            out.push_back(tmpl[pos++]);
            continue;
        }
        std::size_t end = tmpl.find('}', pos);
        std::string slot = tmpl.substr(pos + 1, end - pos - 1);
        pos = end + 1;
        if (slot == "vendor" || slot == "vendor2") {
            out += pick(rng, vendors);
        } else if (slot == "city") {
            out += pick(rng, cities);
        } else if (slot == "promo") {
            out += pick(rng, promos);
        } else if (slot == "get") {
            out += pick(rng, verbs);
        } else if (slot == "month") {
            out += pick(rng, months);
        } else if (slot == "mins") {
            out += pick(rng, minutes);
        } else if (slot == "pct") {
            out += pick(rng, percents);
        } else if (slot == "amount") {
            out += std::to_string(100 + draw(rng, 9900));
        } else if (slot == "bal") {
            out += std::to_string(1000 + draw(rng, 90000));
        } else if (slot == "digits") {
            out += std::to_string(1000 + draw(rng, 9000));
        } else if (slot == "otp") {
            out += std::to_string(100000 + draw(rng, 900000));
        } else if (slot == "day") {
            out += std::to_string(1 + draw(rng, 28));
        } else if (slot == "time") {
            out += std::to_string(7 + draw(rng, 14));
            out += ':';
            out += pick(rng, {"00", "15", "30", "45"});
        } else if (slot == "code") {
            out.push_back(static_cast<char>('A' + draw(rng, 26)));
            out.push_back(static_cast<char>('A' + draw(rng, 26)));
            out += std::to_string(100 + draw(rng, 900));
        } else if (slot == "pnr") {
            for (int i = 0; i < 3; ++i) {
                out.push_back(static_cast<char>('A' + draw(rng, 26)));
            }
            out += std::to_string(1000 + draw(rng, 9000));
        } else if (slot == "label") {
            out += label;
        } else {
            throw std::logic_error("unknown template slot: " + slot);
        }
    }
    return out;
}

inline const std::vector<std::string>& templates_for(const std::string& label) {
    static const std::map<std::string, std::vector<std::string>> bank = {
        {"Flight Travel",
         {"Your flight to {city} with {vendor} is confirmed for {day} {month}. Ticket {pnr}.",
          "{vendor}: flight {code} departs {city} airport at {time}. Have a safe travel.",
          "Web checkin is open for your {vendor} flight to {city}. Select your seat now.",
          "Ticket {pnr} booked. Flight {code} boarding starts {time} at {city} airport."}},
        {"Debit Transaction",
         {"Rs.{amount} debited from your {vendor} account ending {digits} at {vendor2}. "
          "Available balance Rs.{bal}.",
          "Alert: Rs.{amount} debited via card at {vendor2} on {day} {month}. Balance Rs.{bal}.",
          "Rs.{amount} was debited from account {digits} for {vendor2} payment. Updated balance "
          "Rs.{bal}."}},
        {"Credit Transaction",
         {"Rs.{amount} credited to your {vendor} account {digits}. Updated balance Rs.{bal}.",
          "{vendor}: salary of Rs.{amount} credited on {day} {month}. Available balance Rs.{bal}.",
          "Payment received: Rs.{amount} credited to account ending {digits} from {vendor2}."}},
        {"Food Offer",
         {"{get} {pct} percent off on your first pizza order from {vendor}. Use code {promo}.",
          "Hungry? {vendor} serves a free burger meal on orders above Rs.{amount}. Order now.",
          "{vendor} food fest: flat Rs.{amount} cashback on every meal you order today. Code "
          "{promo}. TnC URL."}},
        {"Hotel Offer",
         {"Book a room with {vendor} and {get} {pct} percent off on your hotel stay in {city}.",
          "{vendor} weekend deal: luxury hotel stay at Rs.{amount} per night in {city}. Book now.",
          "Flat {pct} percent off on hotel booking in {city}. Limited rooms. Reserve with {vendor} "
          "today. Details URL."}},
        {"Login OTP",
         {"{otp} is your OTP for {vendor} login. Do not share it with anyone.",
          "Use {otp} as your one time password to sign in to your {vendor} account.",
          "{vendor} security code {otp} for login. Valid for {mins} minutes."}},
        {"Transaction OTP",
         {"{otp} is the OTP for your card payment of Rs.{amount} at {vendor}. Do not share.",
          "Enter OTP {otp} to authorise the payment of Rs.{amount} to {vendor2}.",
          "{vendor}: use OTP {otp} to complete your purchase of Rs.{amount}."}},
    };
    static const std::vector<std::string> generic = {
        "{vendor} update for your {label} request. Reference {digits}.",
        "Your {label} request with {vendor} is confirmed. Reference {digits}.",
        "{vendor}: new {label} notification. Use code {promo} for details."};
    auto it = bank.find(label);
    return it != bank.end() ? it->second : generic;
}

inline std::string label_slug(const std::string& label) {
    std::string slug;
    for (char c : ascii_lower(label)) {
        slug.push_back((std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '-');
    }
    return slug;
}

} // namespace detail

/// The seven default labels used throughout the docs and demos.
inline const std::set<std::string>& default_labels() {
    static const std::set<std::string> labels = {
        "Flight Travel", "Debit Transaction", "Credit Transaction", "Food Offer",
        "Hotel Offer",   "Login OTP",         "Transaction OTP"};
    return labels;
}

/// Deterministically generates per_label templated messages for each label.
/// Vendor names are intentionally out-of-vocabulary-looking tokens; amounts
/// and paraphrase slots vary so clustering and sequence matching see both
/// repeated and fresh vocabulary.
inline LabeledCorpus generate_synthetic_corpus(const std::set<std::string>& labels, int per_label,
                                               std::uint32_t seed) {
    if (labels.empty()) {
        throw std::invalid_argument("generate_synthetic_corpus: empty label set");
    }
    if (per_label < 1) {
        throw std::invalid_argument("generate_synthetic_corpus: per_label must be >= 1");
    }
    std::mt19937 rng(seed);
    LabeledCorpus corpus;
    corpus.labels = labels;
    for (const auto& label : labels) { // std::set iterates labels in sorted order
        const auto& templates = detail::templates_for(label);
        for (int i = 0; i < per_label; ++i) {
            const auto& tmpl = templates[detail::draw(
                rng, static_cast<std::uint32_t>(templates.size()))];
            SmsMessage msg;
            std::ostringstream id;
            id << detail::label_slug(label) << '-' << std::setw(3) << std::setfill('0') << i;
            msg.id = id.str();
            msg.text = detail::fill_template(tmpl, label, rng);
            msg.label = label;
            corpus.messages.push_back(std::move(msg));
        }
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// annotations and kappa
// ---------------------------------------------------------------------------

inline std::vector<AnnotationSet> load_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open annotation file: " + path.string());
    }
    std::vector<AnnotationSet> sets;
    std::map<std::string, std::size_t> index_of;
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
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                     ": malformed JSON (" + e.what() + ")");
        }
        for (const char* field : {"id", "annotator", "label"}) {
            if (!row.contains(field) || !row[field].is_string() ||
                row[field].get<std::string>().empty()) {
                throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                         ": missing or invalid \"" + field + "\"");
            }
        }
        const auto annotator = row["annotator"].get<std::string>();
        const auto id = row["id"].get<std::string>();
        auto [it, fresh] = index_of.try_emplace(annotator, sets.size());
        if (fresh) {
            sets.push_back(AnnotationSet{annotator, {}});
        }
        auto& assignments = sets[it->second].assignments;
        if (!assignments.emplace(id, row["label"].get<std::string>()).second) {
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                     ": message \"" + id + "\" annotated twice by \"" + annotator +
                                     "\"");
        }
    }
    return sets;
}

/// Builds a KappaReport from already-computed agreement rates.
inline KappaReport kappa_from_agreement(double p_a, double p_e) {
    if (p_a < 0.0 || p_a > 1.0 || p_e < 0.0 || p_e > 1.0) {
        throw std::invalid_argument("kappa_from_agreement: agreement rates must lie in [0,1]");
    }
    KappaReport report{p_a, p_e, std::nullopt};
    if (p_e < 1.0) {
        report.omega = (p_a - p_e) / (1.0 - p_e);
    }
    return report;
}

/// Chance-corrected agreement between two annotators over the same ids.
/// P_a is the fraction of identical assignments; P_e sums the squared
/// averaged marginals ((c_j/2)/n)^2 with c_j the pooled count of label j
/// across both annotators.
inline KappaReport compute_kappa(const AnnotationSet& a1, const AnnotationSet& a2,
                                 const std::set<std::string>& labels) {
    if (a1.assignments.size() != a2.assignments.size()) {
        throw std::invalid_argument("compute_kappa: annotators cover different message sets");
    }
    if (a1.assignments.empty()) {
        throw std::invalid_argument("compute_kappa: no co-annotated messages");
    }
    std::map<std::string, std::size_t> pooled;
    std::size_t agreements = 0;
    auto it2 = a2.assignments.begin();
    for (auto it1 = a1.assignments.begin(); it1 != a1.assignments.end(); ++it1, ++it2) {
        if (it1->first != it2->first) {
            throw std::invalid_argument("compute_kappa: annotators cover different message sets "
                                        "(mismatch at \"" +
                                        it1->first + "\" vs \"" + it2->first + "\")");
        }
        for (const auto& label : {it1->second, it2->second}) {
            if (labels.find(label) == labels.end()) {
                throw std::invalid_argument("compute_kappa: label \"" + label +
                                            "\" not in the label set");
            }
            ++pooled[label];
        }
        if (it1->second == it2->second) {
            ++agreements;
        }
    }
    const double n = static_cast<double>(a1.assignments.size());
    const double p_a = static_cast<double>(agreements) / n;
    double p_e = 0.0;
    for (const auto& [label, count] : pooled) {
        const double share = (static_cast<double>(count) / 2.0) / n;
        p_e += share * share;
    }
    return kappa_from_agreement(p_a, p_e);
}

} // namespace smssim
