// Copyright 2026 The qblock authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qblock/errors.hpp"

namespace qblock {

/// Fixed-width bit string over a little-endian basis index: qubit 1 is the
/// least significant bit. Qubit indices are 1-based at every public interface.
struct BitStr {
    std::uint64_t value = 0;
    std::size_t nbits = 1;

    static constexpr std::size_t max_bits = 63;

    BitStr() = default;
    BitStr(std::uint64_t value_, std::size_t nbits_) : value(value_), nbits(nbits_) {
        if (nbits == 0 || nbits > max_bits) {
            throw ValidationError("BitStr width must be in 1.." + std::to_string(max_bits));
        }
        if (value >> nbits) {
            throw ValidationError("BitStr value does not fit in " + std::to_string(nbits) + " bits");
        }
    }

    friend bool operator==(const BitStr&, const BitStr&) = default;
};

/// Bit of qubit `i` (1-based).
inline int bit_at(const BitStr& b, std::size_t i) {
    if (i < 1 || i > b.nbits) {
        throw RangeError("bit index " + std::to_string(i) + " out of range 1.." + std::to_string(b.nbits));
    }
    return static_cast<int>((b.value >> (i - 1)) & 1u);
}

/// Bits in qubit order, qubit 1 first.
inline std::vector<int> to_bits(const BitStr& b) {
    std::vector<int> bits(b.nbits);
    for (std::size_t i = 1; i <= b.nbits; ++i) {
        bits[i - 1] = bit_at(b, i);
    }
    return bits;
}

/// Inverse of to_bits.
inline BitStr from_bits(std::span<const int> bits) {
    if (bits.empty()) {
        throw ValidationError("from_bits: empty bit list");
    }
    if (bits.size() > BitStr::max_bits) {
        throw ValidationError("from_bits: too many bits");
    }
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != 0 && bits[i] != 1) {
            throw ValidationError("from_bits: entry " + std::to_string(i + 1) + " is not 0 or 1");
        }
        value |= static_cast<std::uint64_t>(bits[i]) << i;
    }
    return BitStr(value, bits.size());
}

inline BitStr from_bits(std::initializer_list<int> bits) {
    return from_bits(std::span<const int>(bits.begin(), bits.size()));
}

/// True iff every control qubit of `index` matches its configuration bit
/// (1 for control, 0 for inverse control). Empty controls always match.
inline bool ctrl_match(std::uint64_t index, std::span<const std::size_t> ctrl_locs,
                       std::span<const int> ctrl_config) {
    if (ctrl_locs.size() != ctrl_config.size()) {
        throw ValidationError("ctrl_match: control locations and configuration differ in length");
    }
    for (std::size_t k = 0; k < ctrl_locs.size(); ++k) {
        if (static_cast<int>((index >> (ctrl_locs[k] - 1)) & 1u) != ctrl_config[k]) {
            return false;
        }
    }
    return true;
}

/// Text form used by the CLI: qubit 1 is the rightmost character,
/// e.g. BitStr(2, 4) renders as "0010 (2)".
inline std::string to_text(const BitStr& b) {
    std::string s(b.nbits, '0');
    for (std::size_t i = 1; i <= b.nbits; ++i) {
        if (bit_at(b, i)) {
            s[b.nbits - i] = '1';
        }
    }
    return s + " (2)";
}

/// Bare binary digits, qubit 1 rightmost (the JSON "sample" field).
inline std::string to_binary(const BitStr& b) {
    std::string s(b.nbits, '0');
    for (std::size_t i = 1; i <= b.nbits; ++i) {
        if (bit_at(b, i)) {
            s[b.nbits - i] = '1';
        }
    }
    return s;
}

/// Parses "0010" (qubit 1 rightmost) into a BitStr.
inline BitStr bits_from_text(const std::string& text) {
    if (text.empty()) {
        throw ValidationError("empty bit string");
    }
    std::vector<int> bits(text.size());
    for (std::size_t k = 0; k < text.size(); ++k) {
        char c = text[text.size() - 1 - k];
        if (c != '0' && c != '1') {
            throw ValidationError("bit string may contain only 0 and 1");
        }
        bits[k] = c - '0';
    }
    return from_bits(bits);
}

}  // namespace qblock
