// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 smssim contributors
#pragma once

#include <string>
#include <string_view>

namespace smssim {

/// Lowercases ASCII A-Z only; bytes outside that range pass through untouched.
inline std::string ascii_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
    }
    return out;
}

/// A score in [0,1] plus a flag for degenerate inputs (empty sequence, empty
/// model, ...) where the value is a defined fallback rather than a measurement.
struct ScoreResult {
    double value = 0.0;
    bool degenerate = false;
};

} // namespace smssim
