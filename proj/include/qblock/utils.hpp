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

#include <atomic>
#include <charconv>
#include <cstddef>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace qblock {

/// Process-wide worker count for column-parallel kernels. 1 means serial.
inline std::atomic<unsigned>& thread_count() {
    static std::atomic<unsigned> n{1};
    return n;
}

inline void set_thread_count(unsigned n) { thread_count().store(n == 0 ? 1u : n); }

/// Runs f(i) for i in [0, n). Work is sharded over disjoint index ranges, so
/// results match the serial order whenever the iterations are independent.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
    unsigned workers = thread_count().load();
    if (workers <= 1 || n < 2 * workers) {
        for (std::size_t i = 0; i < n; ++i) {
            f(i);
        }
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = lo + chunk < n ? lo + chunk : n;
        if (lo >= hi) {
            break;
        }
        pool.emplace_back([lo, hi, &f] {
            for (std::size_t i = lo; i < hi; ++i) {
                f(i);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
}

/// Shortest round-trip decimal form of a double ("1.5707963267948966").
inline std::string format_double(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

/// Fixed significant-digit form used by the script emitter.
inline std::string format_double(double x, int significant) {
    char buf[64];
    int n = std::snprintf(buf, sizeof(buf), "%.*g", significant, x);
    return std::string(buf, n > 0 ? static_cast<std::size_t>(n) : 0);
}

}  // namespace qblock
