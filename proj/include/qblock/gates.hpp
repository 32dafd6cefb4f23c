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

#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string>

#include "qblock/matrix.hpp"

namespace qblock {

// Builtin gate matrices over the little-endian basis (qubit 1 is the least
// significant bit). Matrix classes follow the gate table: Z/S/T/shift are
// diagonal, X/Y/CNOT/CZ/SWAP are permutations, projectors are sparse columns,
// H and the x/y rotations are dense.

namespace gatemat {

inline const cplx i1{0.0, 1.0};

inline MatrixRepr x() { return Permutation({1, 0}, {1.0, 1.0}); }
inline MatrixRepr y() { return Permutation({1, 0}, {-i1, i1}); }
inline MatrixRepr z() { return Diagonal({1.0, -1.0}); }
inline MatrixRepr h() {
    double s = 1.0 / std::numbers::sqrt2;
    return Dense(2, {s, s, s, -s});
}
inline MatrixRepr i2() { return Identity(2); }
inline MatrixRepr s() { return Diagonal({1.0, i1}); }
inline MatrixRepr sdag() { return Diagonal({1.0, -i1}); }
inline MatrixRepr t() { return Diagonal({1.0, std::polar(1.0, std::numbers::pi / 4)}); }
inline MatrixRepr tdag() { return Diagonal({1.0, std::polar(1.0, -std::numbers::pi / 4)}); }
inline MatrixRepr swap() { return Permutation({0, 2, 1, 3}, {1.0, 1.0, 1.0, 1.0}); }
// Control on qubit 2, X on qubit 1.
inline MatrixRepr cnot() { return Permutation({0, 1, 3, 2}, {1.0, 1.0, 1.0, 1.0}); }
inline MatrixRepr cz() { return Permutation({0, 1, 2, 3}, {1.0, 1.0, 1.0, -1.0}); }
// Controls on qubits 2 and 3, X on qubit 1.
inline MatrixRepr toffoli() {
    return Permutation({0, 1, 2, 3, 4, 5, 7, 6}, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0});
}
inline MatrixRepr p0() { return SparseColumns(2, {0, 1, 1}, {0}, {1.0}); }
inline MatrixRepr p1() { return SparseColumns(2, {0, 0, 1}, {1}, {1.0}); }
inline MatrixRepr pu() { return SparseColumns(2, {0, 0, 1}, {0}, {1.0}); }
inline MatrixRepr pd() { return SparseColumns(2, {0, 1, 1}, {1}, {1.0}); }

inline MatrixRepr rx(double theta) {
    cplx c = std::cos(theta / 2), ms = -i1 * std::sin(theta / 2);
    return Dense(2, {c, ms, ms, c});
}
inline MatrixRepr ry(double theta) {
    double c = std::cos(theta / 2), s = std::sin(theta / 2);
    return Dense(2, {c, s, -s, c});
}
inline MatrixRepr rz(double theta) {
    return Diagonal({std::polar(1.0, -theta / 2), std::polar(1.0, theta / 2)});
}
inline MatrixRepr shift(double theta) { return Diagonal({1.0, std::polar(1.0, theta)}); }
inline MatrixRepr global_phase(double theta, std::size_t dim = 2) {
    return Diagonal(std::vector<cplx>(dim, std::polar(1.0, theta)));
}

/// e^{-i*G*theta/2} = cos(theta/2) I - i sin(theta/2) G for a reflexive
/// generator. Diagonal generators stay diagonal; others densify.
inline MatrixRepr rot(const MatrixRepr& generator, double theta) {
    std::size_t d = mat_dim(generator);
    double c = std::cos(theta / 2), s = std::sin(theta / 2);
    MatKind k = kind_of(generator);
    if (k == MatKind::I || k == MatKind::D) {
        auto diag = diag_view(generator);
        for (auto& g : diag) g = cplx(c) - i1 * cplx(s) * g;
        return Diagonal(std::move(diag));
    }
    Dense out = to_dense(generator);
    for (auto& v : out.a) v *= -i1 * s;
    for (std::size_t r = 0; r < d; ++r) out.at(r, r) += c;
    return out;
}

}  // namespace gatemat

/// A registered constant gate: its matrix and precomputed properties.
struct ConstGateDef {
    MatrixRepr mat;
    OpProps props;
    std::size_t nqubits;
};

inline std::map<std::string, ConstGateDef>& gate_registry() {
    static std::map<std::string, ConstGateDef> reg = [] {
        std::map<std::string, ConstGateDef> r;
        auto put = [&r](const std::string& name, MatrixRepr m) {
            std::size_t d = mat_dim(m);
            std::size_t nq = 0;
            while ((std::size_t{1} << nq) < d) ++nq;
            r.emplace(name, ConstGateDef{m, props(m), nq});
        };
        put("X", gatemat::x());
        put("Y", gatemat::y());
        put("Z", gatemat::z());
        put("H", gatemat::h());
        put("I2", gatemat::i2());
        put("S", gatemat::s());
        put("Sdag", gatemat::sdag());
        put("T", gatemat::t());
        put("Tdag", gatemat::tdag());
        put("SWAP", gatemat::swap());
        put("CNOT", gatemat::cnot());
        put("CZ", gatemat::cz());
        put("Toffoli", gatemat::toffoli());
        put("P0", gatemat::p0());
        put("P1", gatemat::p1());
        put("Pu", gatemat::pu());
        put("Pd", gatemat::pd());
        return r;
    }();
    return reg;
}

/// Registers a named constant gate usable in circuits, scripts and instruct.
/// The dimension must be a power of two; properties are computed eagerly.
inline const ConstGateDef& define_const_gate(const std::string& name, const MatrixRepr& m) {
    std::size_t d = mat_dim(m);
    if (d < 2 || (d & (d - 1)) != 0) {
        throw ValidationError("define_const_gate: dimension must be a power of 2, got " +
                              std::to_string(d));
    }
    std::size_t nq = 0;
    while ((std::size_t{1} << nq) < d) ++nq;
    auto& reg = gate_registry();
    reg.erase(name);
    return reg.emplace(name, ConstGateDef{m, props(m), nq}).first->second;
}

inline const ConstGateDef* find_gate(const std::string& name) {
    auto& reg = gate_registry();
    auto it = reg.find(name);
    return it == reg.end() ? nullptr : &it->second;
}

/// Resolves a gate tag plus optional parameters to a matrix.
inline MatrixRepr gate_by_tag(const std::string& tag, std::span<const double> params = {}) {
    if (tag == "Rx" || tag == "Ry" || tag == "Rz" || tag == "shift" || tag == "phase") {
        if (params.size() != 1) {
            throw DispatchError("gate " + tag + " expects one parameter");
        }
        double th = params[0];
        if (tag == "Rx") return gatemat::rx(th);
        if (tag == "Ry") return gatemat::ry(th);
        if (tag == "Rz") return gatemat::rz(th);
        if (tag == "shift") return gatemat::shift(th);
        return gatemat::global_phase(th);
    }
    if (const ConstGateDef* def = find_gate(tag)) {
        if (!params.empty()) {
            throw DispatchError("gate " + tag + " takes no parameters");
        }
        return def->mat;
    }
    throw DispatchError("unknown gate tag: " + tag);
}

}  // namespace qblock
