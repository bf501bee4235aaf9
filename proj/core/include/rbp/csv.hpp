// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator
// Locale-free, shortest-round-trip number formatting so exported artifacts
// are byte-identical across runs.

#pragma once

#include <charconv>
#include <string>

namespace rbp {

inline std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

}  // namespace rbp
