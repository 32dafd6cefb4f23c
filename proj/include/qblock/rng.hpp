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

#include <cstdint>
#include <random>
#include <string_view>

namespace qblock {

/// Seedable, splittable random source. Splitting derives an independent
/// stream from a label, so parallel consumers stay reproducible.
class Rng {
   public:
    explicit Rng(std::uint64_t seed = 42) : state_(mix(seed)), engine_(mix(seed)) {}

    /// Independent stream derived from this generator's seed and a label.
    Rng split(std::string_view label) const {
        std::uint64_t h = state_;
        for (char c : label) {
            h = mix(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
        }
        return Rng(h);
    }

    Rng split(std::uint64_t salt) const { return Rng(mix(state_ ^ salt)); }

    std::mt19937_64& engine() { return engine_; }

    /// Uniform double in [0, 1).
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    /// Standard normal deviate.
    double gauss() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

    std::uint64_t bits() { return engine_(); }

   private:
    // SplitMix64 finalizer; decorrelates nearby seeds.
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t state_;
    std::mt19937_64 engine_;
};

}  // namespace qblock
