// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 smssim contributors
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "smssim/common.hpp"

namespace smssim {

/// A dense word embedding, or the distinguished null marker for words that
/// have no embedding. Null carries no components; all non-null vectors in a
/// table share one dimension.
class WordVector {
public:
    WordVector() = default; // null

    explicit WordVector(std::vector<double> components) : components_(std::move(components)) {
        if (components_.empty()) {
            throw std::invalid_argument("WordVector: a non-null vector needs >= 1 component");
        }
    }

    static WordVector null() { return WordVector{}; }

    bool is_null() const { return components_.empty(); }
    std::size_t dimension() const { return components_.size(); }
    const std::vector<double>& components() const { return components_; }

    friend bool operator==(const WordVector&, const WordVector&) = default;

private:
    std::vector<double> components_;
};

/// Cosine of the angle between u and v, clamped into [-1, 1].
inline double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(u.size()) +
                                    " vs " + std::to_string(v.size()) + ")");
    }
    if (u.empty()) {
        throw std::invalid_argument("cosine: empty vectors");
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        throw std::invalid_argument("cosine: zero-norm input");
    }
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

inline double cosine(const WordVector& u, const WordVector& v) {
    return cosine(std::span<const double>(u.components()), std::span<const double>(v.components()));
}

/// Similarity of two words given their (possibly null) vectors: cosine when
/// both are embedded, otherwise 1.0 on case-normalized string equality and
/// 0.0 otherwise. Total over all inputs.
inline double word_similarity(std::string_view w1, const WordVector& v1, std::string_view w2,
                              const WordVector& v2) {
    if (!v1.is_null() && !v2.is_null()) {
        return cosine(v1, v2);
    }
    return ascii_lower(w1) == ascii_lower(w2) ? 1.0 : 0.0;
}

/// Immutable word -> vector store. Keys are case-normalized; lookups of
/// missing words yield the null vector, never an error.
class EmbeddingTable {
public:
    explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {
        if (dimension_ == 0) {
            throw std::invalid_argument("EmbeddingTable: dimension must be >= 1");
        }
    }

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return entries_.size(); }

    void insert(std::string_view word, std::vector<double> components) {
        if (components.size() != dimension_) {
            throw std::invalid_argument("EmbeddingTable: vector for '" + std::string(word) +
                                        "' has " + std::to_string(components.size()) +
                                        " components, table dimension is " +
                                        std::to_string(dimension_));
        }
        entries_[ascii_lower(word)] = std::move(components);
    }

    bool contains(std::string_view word) const {
        return entries_.find(ascii_lower(word)) != entries_.end();
    }

    WordVector lookup(std::string_view word) const {
        auto it = entries_.find(ascii_lower(word));
        if (it == entries_.end()) {
            return WordVector::null();
        }
        return WordVector(it->second);
    }

private:
    std::size_t dimension_;
    std::unordered_map<std::string, std::vector<double>> entries_;
};

namespace detail {

inline double parse_component(std::string_view field, std::size_t line_no) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || field.empty()) {
        throw std::runtime_error("embedding file line " + std::to_string(line_no) +
                                 ": unparseable number '" + std::string(field) + "'");
    }
    return value;
}

} // namespace detail

/// Loads a table from text lines of the form "token c1 c2 ... cD" (single
/// spaces, no header). The first entry fixes D unless expected_dim is given.
inline EmbeddingTable load_embedding_table(const std::filesystem::path& source,
                                           std::optional<std::size_t> expected_dim = std::nullopt) {
    std::ifstream in(source);
    if (!in) {
        throw std::runtime_error("cannot open embedding file: " + source.string());
    }
    std::optional<EmbeddingTable> table;
    if (expected_dim) {
        table.emplace(*expected_dim);
    }
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
        std::vector<std::string_view> fields;
        std::string_view rest = line;
        while (true) {
            std::size_t sp = rest.find(' ');
            if (sp == std::string_view::npos) {
                fields.push_back(rest);
                break;
            }
            fields.push_back(rest.substr(0, sp));
            rest = rest.substr(sp + 1);
        }
        if (fields.size() < 2) {
            throw std::runtime_error("embedding file line " + std::to_string(line_no) +
                                     ": expected a token and >= 1 component");
        }
        const std::size_t width = fields.size() - 1;
        if (!table) {
            table.emplace(width);
        }
        if (width != table->dimension()) {
            throw std::runtime_error("embedding file line " + std::to_string(line_no) +
                                     ": dimension mismatch (expected " +
                                     std::to_string(table->dimension()) + ", got " +
                                     std::to_string(width) + ")");
        }
        std::vector<double> components;
        components.reserve(width);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            components.push_back(detail::parse_component(fields[i], line_no));
        }
        table->insert(fields[0], std::move(components));
    }
    if (!table || table->size() == 0) {
        throw std::runtime_error("empty embedding file: " + source.string());
    }
    return *std::move(table);
}

} // namespace smssim
