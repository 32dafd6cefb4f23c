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
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "qblock/bits.hpp"
#include "qblock/errors.hpp"
#include "qblock/gates.hpp"
#include "qblock/matrix.hpp"
#include "qblock/rng.hpp"
#include "qblock/utils.hpp"

namespace qblock {

/// Default limit on addressable qubits; 2^30 amplitudes is 16 GiB and past
/// desk scale. Override with set_qubit_cap.
inline std::atomic<std::size_t>& qubit_cap() {
    static std::atomic<std::size_t> cap{30};
    return cap;
}

inline void set_qubit_cap(std::size_t n) { qubit_cap().store(n); }

/// Counts full-state buffer allocations; the AD tests assert this stays
/// constant in circuit depth.
inline std::atomic<std::uint64_t>& state_alloc_counter() {
    static std::atomic<std::uint64_t> n{0};
    return n;
}

struct MeasureOutcome {
    std::vector<BitStr> samples;
};

/// Contiguous complex state storage of shape 2^a x (2^r * B): a active
/// qubits along rows, r environment qubits and B batch replicas along
/// columns, batch slowest. Each batch occupies one contiguous slice of
/// 2^(a+r) amplitudes.
class Register {
   public:
    Register(std::size_t nqubits, std::size_t nbatch, std::uint64_t seed)
        : nqubits_(nqubits), nactive_(nqubits), nbatch_(nbatch), rng_(seed) {
        if (nqubits < 1) throw ValidationError("Register: need at least one qubit");
        if (nqubits > qubit_cap().load()) {
            throw ResourceError("Register: " + std::to_string(nqubits) + " qubits exceeds the cap of " +
                                std::to_string(qubit_cap().load()));
        }
        if (nbatch < 1) throw ValidationError("Register: batch count must be positive");
        buf_.assign((std::size_t{1} << nqubits) * nbatch, cplx(0.0));
        state_alloc_counter().fetch_add(1);
    }

    Register(const Register& other)
        : buf_(other.buf_),
          nqubits_(other.nqubits_),
          nactive_(other.nactive_),
          nbatch_(other.nbatch_),
          focus_stack_(other.focus_stack_),
          rng_(other.rng_) {
        state_alloc_counter().fetch_add(1);
    }

    Register& operator=(const Register& other) {
        if (this != &other) {
            if (buf_.size() != other.buf_.size()) state_alloc_counter().fetch_add(1);
            buf_ = other.buf_;
            nqubits_ = other.nqubits_;
            nactive_ = other.nactive_;
            nbatch_ = other.nbatch_;
            focus_stack_ = other.focus_stack_;
            rng_ = other.rng_;
        }
        return *this;
    }

    Register(Register&&) = default;
    Register& operator=(Register&&) = default;

    std::size_t nqubits() const { return nqubits_; }
    std::size_t nactive() const { return nactive_; }
    std::size_t nremain() const { return nqubits_ - nactive_; }
    std::size_t nbatch() const { return nbatch_; }
    std::size_t nrows() const { return std::size_t{1} << nactive_; }
    std::size_t ncols() const { return (std::size_t{1} << nremain()) * nbatch_; }

    std::span<cplx> amplitudes() { return buf_; }
    std::span<const cplx> amplitudes() const { return buf_; }

    /// Contiguous 2^nqubits slice of one batch.
    std::span<cplx> batch(std::size_t b) {
        std::size_t len = std::size_t{1} << nqubits_;
        return std::span<cplx>(buf_.data() + b * len, len);
    }
    std::span<const cplx> batch(std::size_t b) const {
        std::size_t len = std::size_t{1} << nqubits_;
        return std::span<const cplx>(buf_.data() + b * len, len);
    }

    Rng& rng() { return rng_; }

    double norm(std::size_t b) const {
        double s = 0.0;
        for (cplx v : batch(b)) s += std::norm(v);
        return std::sqrt(s);
    }

    void scale(cplx factor) {
        for (auto& v : buf_) v *= factor;
    }

    void add_scaled(const Register& other, cplx factor = cplx(1.0)) {
        if (other.buf_.size() != buf_.size()) throw ShapeError("Register::add_scaled: shape mismatch");
        for (std::size_t i = 0; i < buf_.size(); ++i) buf_[i] += factor * other.buf_[i];
    }

    /// Per-batch inner product <this|other>.
    std::vector<cplx> inner(const Register& other) const {
        if (other.buf_.size() != buf_.size() || other.nbatch_ != nbatch_) {
            throw ShapeError("Register::inner: shape mismatch");
        }
        std::vector<cplx> out(nbatch_, cplx(0.0));
        std::size_t len = std::size_t{1} << nqubits_;
        for (std::size_t b = 0; b < nbatch_; ++b) {
            const cplx* x = buf_.data() + b * len;
            const cplx* y = other.buf_.data() + b * len;
            cplx s(0.0);
            for (std::size_t i = 0; i < len; ++i) s += std::conj(x[i]) * y[i];
            out[b] = s;
        }
        return out;
    }

    // --- focus / relax -----------------------------------------------------

    /// Makes `locs` (1-based positions in the current layout) the active
    /// qubits, in the given order; the rest move behind them unchanged.
    void focus(std::span<const std::size_t> locs) {
        auto src = focus_sources(locs);
        permute_positions(src);
        focus_stack_.emplace_back(locs.begin(), locs.end());
        nactive_ = locs.size();
    }

    /// Inverse of the matching focus call.
    void relax(std::span<const std::size_t> locs, std::size_t to_nactive) {
        if (focus_stack_.empty()) throw ValidationError("relax: no focus to undo");
        const auto& top = focus_stack_.back();
        if (!std::equal(top.begin(), top.end(), locs.begin(), locs.end())) {
            throw ValidationError("relax: locations do not match the previous focus");
        }
        if (to_nactive > nqubits_) throw ValidationError("relax: to_nactive exceeds qubit count");
        auto src = focus_sources(locs);
        std::vector<std::size_t> inv(src.size());
        for (std::size_t k = 0; k < src.size(); ++k) inv[src[k]] = k;
        permute_positions(inv);
        focus_stack_.pop_back();
        nactive_ = to_nactive;
    }

    // --- persistence -------------------------------------------------------

    void save(std::ostream& os) const {
        const char magic[8] = {'Q', 'B', 'R', 'E', 'G', '1', 0, 0};
        os.write(magic, 8);
        std::uint64_t hdr[3] = {nqubits_, nactive_, nbatch_};
        os.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
        os.write(reinterpret_cast<const char*>(buf_.data()),
                 static_cast<std::streamsize>(buf_.size() * sizeof(cplx)));
    }

    static Register load(std::istream& is, std::uint64_t seed = 42) {
        char magic[8];
        is.read(magic, 8);
        if (!is || std::memcmp(magic, "QBREG1\0\0", 8) != 0) {
            throw SerializationError("state file: bad magic");
        }
        std::uint64_t hdr[3];
        is.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
        if (!is || hdr[0] < 1 || hdr[1] > hdr[0]) throw SerializationError("state file: bad header");
        Register reg(hdr[0], hdr[2], seed);
        reg.nactive_ = hdr[1];
        is.read(reinterpret_cast<char*>(reg.buf_.data()),
                static_cast<std::streamsize>(reg.buf_.size() * sizeof(cplx)));
        if (!is) throw SerializationError("state file: truncated amplitudes");
        return reg;
    }

   private:
    // Position (0-based) each new layout slot reads from.
    std::vector<std::size_t> focus_sources(std::span<const std::size_t> locs) const {
        if (locs.empty()) throw ValidationError("focus: need at least one location");
        std::vector<bool> used(nqubits_, false);
        std::vector<std::size_t> src;
        src.reserve(nqubits_);
        for (std::size_t l : locs) {
            if (l < 1 || l > nqubits_) throw RangeError("focus: location out of range");
            if (used[l - 1]) throw ValidationError("focus: duplicate location");
            used[l - 1] = true;
            src.push_back(l - 1);
        }
        for (std::size_t p = 0; p < nqubits_; ++p) {
            if (!used[p]) src.push_back(p);
        }
        return src;
    }

    void permute_positions(const std::vector<std::size_t>& src) {
        bool identity = true;
        for (std::size_t k = 0; k < src.size(); ++k) {
            if (src[k] != k) {
                identity = false;
                break;
            }
        }
        if (identity) return;
        std::size_t len = std::size_t{1} << nqubits_;
        std::vector<cplx> scratch(len);
        for (std::size_t b = 0; b < nbatch_; ++b) {
            cplx* slice = buf_.data() + b * len;
            for (std::size_t g = 0; g < len; ++g) {
                std::size_t ng = 0;
                for (std::size_t k = 0; k < src.size(); ++k) {
                    ng |= ((g >> src[k]) & 1u) << k;
                }
                scratch[ng] = slice[g];
            }
            std::copy(scratch.begin(), scratch.end(), slice);
        }
    }

    std::vector<cplx> buf_;
    std::size_t nqubits_;
    std::size_t nactive_;
    std::size_t nbatch_;
    std::vector<std::vector<std::size_t>> focus_stack_;
    Rng rng_;
};

// --- constructors ----------------------------------------------------------

inline Register zero_state(std::size_t n, std::size_t nbatch = 1, std::uint64_t seed = 42) {
    Register reg(n, nbatch, seed);
    for (std::size_t b = 0; b < nbatch; ++b) reg.batch(b)[0] = cplx(1.0);
    return reg;
}

inline Register rand_state(std::size_t n, std::size_t nbatch = 1, std::uint64_t seed = 42) {
    Register reg(n, nbatch, seed);
    Rng gen = Rng(seed).split("rand_state");
    for (std::size_t b = 0; b < nbatch; ++b) {
        auto slice = reg.batch(b);
        double nrm2 = 0.0;
        for (auto& v : slice) {
            v = cplx(gen.gauss(), gen.gauss());
            nrm2 += std::norm(v);
        }
        double inv = 1.0 / std::sqrt(nrm2);
        for (auto& v : slice) v *= inv;
    }
    return reg;
}

inline Register product_state(const BitStr& b, std::size_t nbatch = 1, std::uint64_t seed = 42) {
    Register reg(b.nbits, nbatch, seed);
    for (std::size_t k = 0; k < nbatch; ++k) reg.batch(k)[b.value] = cplx(1.0);
    return reg;
}

// --- gate instruction ------------------------------------------------------

namespace detail {

struct KernelPlan {
    std::size_t t = 0;                  // target qubit count
    std::uint64_t free_mask = 0;        // bits the kernel iterates over
    std::uint64_t ctrl_val = 0;         // required control bit pattern
    std::vector<std::uint64_t> offset;  // scatter of the 2^t sub-indices
};

inline KernelPlan make_plan(std::size_t nactive, std::span<const std::size_t> locs,
                            std::span<const std::size_t> ctrl_locs, std::span<const int> ctrl_config) {
    if (locs.empty()) throw ValidationError("instruct: need at least one target qubit");
    if (ctrl_locs.size() != ctrl_config.size()) {
        throw ValidationError("instruct: control locations and configuration differ in length");
    }
    std::uint64_t loc_mask = 0, ctrl_mask = 0, ctrl_val = 0;
    for (std::size_t l : locs) {
        if (l < 1 || l > nactive) throw RangeError("instruct: target qubit out of range");
        std::uint64_t bit = std::uint64_t{1} << (l - 1);
        if (loc_mask & bit) throw ValidationError("instruct: duplicate target qubit");
        loc_mask |= bit;
    }
    for (std::size_t k = 0; k < ctrl_locs.size(); ++k) {
        std::size_t l = ctrl_locs[k];
        if (l < 1 || l > nactive) throw RangeError("instruct: control qubit out of range");
        if (ctrl_config[k] != 0 && ctrl_config[k] != 1) {
            throw ValidationError("instruct: control configuration must be 0 or 1");
        }
        std::uint64_t bit = std::uint64_t{1} << (l - 1);
        if ((loc_mask | ctrl_mask) & bit) {
            throw ValidationError("instruct: control qubit overlaps another location");
        }
        ctrl_mask |= bit;
        if (ctrl_config[k]) ctrl_val |= bit;
    }
    KernelPlan plan;
    plan.t = locs.size();
    std::uint64_t full = nactive >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << nactive) - 1;
    plan.free_mask = full & ~(loc_mask | ctrl_mask);
    plan.ctrl_val = ctrl_val;
    plan.offset.assign(std::size_t{1} << plan.t, 0);
    for (std::uint64_t k = 0; k < plan.offset.size(); ++k) {
        std::uint64_t off = 0;
        for (std::size_t q = 0; q < plan.t; ++q) {
            off |= ((k >> q) & 1u) << (locs[q] - 1);
        }
        plan.offset[k] = off;
    }
    return plan;
}

// Walks every base index (free bits enumerated, control bits fixed) of one
// column and hands it to fn.
template <typename F>
inline void for_each_base(const KernelPlan& plan, F&& fn) {
    std::uint64_t s = 0;
    do {
        fn(s | plan.ctrl_val);
        s = (s - plan.free_mask) & plan.free_mask;
    } while (s != 0);
}

inline void apply_gate_column(cplx* col, const MatrixRepr& gate, const KernelPlan& plan) {
    std::size_t sub = std::size_t{1} << plan.t;
    if (std::holds_alternative<Identity>(gate)) return;
    if (const auto* dg = std::get_if<Diagonal>(&gate)) {
        for_each_base(plan, [&](std::uint64_t base) {
            for (std::size_t k = 0; k < sub; ++k) col[base + plan.offset[k]] *= dg->diag[k];
        });
        return;
    }
    if (const auto* p = std::get_if<Permutation>(&gate)) {
        std::vector<cplx> x(sub);
        for_each_base(plan, [&](std::uint64_t base) {
            for (std::size_t k = 0; k < sub; ++k) x[k] = col[base + plan.offset[k]];
            for (std::size_t k = 0; k < sub; ++k) {
                col[base + plan.offset[k]] = p->vals[k] * x[p->perm[k]];
            }
        });
        return;
    }
    // Generic fallback: dense multiply on the gathered sub-vector.
    Dense dn = std::holds_alternative<Dense>(gate) ? std::get<Dense>(gate) : to_dense(gate);
    std::vector<cplx> x(sub), y(sub);
    for_each_base(plan, [&](std::uint64_t base) {
        for (std::size_t k = 0; k < sub; ++k) x[k] = col[base + plan.offset[k]];
        std::fill(y.begin(), y.end(), cplx(0.0));
        for (std::size_t j = 0; j < sub; ++j) {
            cplx xv = x[j];
            if (xv == cplx(0.0)) continue;
            const cplx* mcol = dn.a.data() + j * sub;
            for (std::size_t i = 0; i < sub; ++i) y[i] += mcol[i] * xv;
        }
        for (std::size_t k = 0; k < sub; ++k) col[base + plan.offset[k]] = y[k];
    });
}

}  // namespace detail

/// Applies a 2^|locs|-dimensional gate to the chosen active qubits of every
/// column, restricted to basis states whose control qubits match the
/// configuration. Environment and batch columns are treated uniformly.
inline void instruct(Register& reg, const MatrixRepr& gate, std::span<const std::size_t> locs,
                     std::span<const std::size_t> ctrl_locs = {},
                     std::span<const int> ctrl_config = {}) {
    detail::KernelPlan plan = detail::make_plan(reg.nactive(), locs, ctrl_locs, ctrl_config);
    if (mat_dim(gate) != (std::size_t{1} << plan.t)) {
        throw ShapeError("instruct: gate dimension does not match target count");
    }
    std::size_t rows = reg.nrows(), cols = reg.ncols();
    cplx* base = reg.amplitudes().data();
    parallel_for(cols, [&](std::size_t c) { detail::apply_gate_column(base + c * rows, gate, plan); });
}

inline void instruct(Register& reg, const std::string& tag, std::span<const std::size_t> locs,
                     std::span<const std::size_t> ctrl_locs = {}, std::span<const int> ctrl_config = {},
                     std::span<const double> params = {}) {
    instruct(reg, gate_by_tag(tag, params), locs, ctrl_locs, ctrl_config);
}

// --- measurement -----------------------------------------------------------

/// Probabilities of the active-qubit outcomes for one batch: |amplitude|^2
/// summed over the environment columns.
inline std::vector<double> probabilities(const Register& reg, std::size_t b) {
    std::size_t rows = reg.nrows();
    std::size_t env = std::size_t{1} << reg.nremain();
    std::vector<double> p(rows, 0.0);
    auto slice = reg.batch(b);
    for (std::size_t e = 0; e < env; ++e) {
        const cplx* col = slice.data() + e * rows;
        for (std::size_t i = 0; i < rows; ++i) p[i] += std::norm(col[i]);
    }
    return p;
}

namespace detail {

inline std::size_t sample_index(const std::vector<double>& cumulative, double u) {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u * cumulative.back());
    std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
    return idx < cumulative.size() ? idx : cumulative.size() - 1;
}

}  // namespace detail

/// Draws nshots samples per batch without disturbing the state. Samples are
/// grouped by batch: all shots of batch 0 first, then batch 1, and so on.
inline MeasureOutcome measure(const Register& reg, std::size_t nshots, Rng& rng) {
    if (nshots < 1) throw ValidationError("measure: nshots must be positive");
    MeasureOutcome out;
    out.samples.reserve(nshots * reg.nbatch());
    for (std::size_t b = 0; b < reg.nbatch(); ++b) {
        auto p = probabilities(reg, b);
        std::vector<double> cum(p.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            acc += p[i];
            cum[i] = acc;
        }
        for (std::size_t s = 0; s < nshots; ++s) {
            out.samples.emplace_back(detail::sample_index(cum, rng.uniform()), reg.nactive());
        }
    }
    return out;
}

inline MeasureOutcome measure(Register& reg, std::size_t nshots = 1) {
    return measure(reg, nshots, reg.rng());
}

/// Samples one outcome per batch and collapses that batch onto it.
inline MeasureOutcome measure_collapse(Register& reg, Rng& rng) {
    MeasureOutcome out;
    out.samples.reserve(reg.nbatch());
    std::size_t rows = reg.nrows();
    std::size_t env = std::size_t{1} << reg.nremain();
    for (std::size_t b = 0; b < reg.nbatch(); ++b) {
        auto p = probabilities(reg, b);
        std::vector<double> cum(p.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            acc += p[i];
            cum[i] = acc;
        }
        std::size_t hit = detail::sample_index(cum, rng.uniform());
        double prob = p[hit];
        if (prob <= 1e-300) {
            throw RenormalizationError("measure!: outcome has numerically zero probability");
        }
        double inv = 1.0 / std::sqrt(prob);
        auto slice = reg.batch(b);
        for (std::size_t e = 0; e < env; ++e) {
            cplx* col = slice.data() + e * rows;
            for (std::size_t i = 0; i < rows; ++i) {
                col[i] = i == hit ? col[i] * inv : cplx(0.0);
            }
        }
        out.samples.emplace_back(hit, reg.nactive());
    }
    return out;
}

inline MeasureOutcome measure_collapse(Register& reg) { return measure_collapse(reg, reg.rng()); }

}  // namespace qblock
