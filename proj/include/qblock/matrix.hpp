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

#include <algorithm>
#include <complex>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qblock/errors.hpp"
#include "qblock/utils.hpp"

namespace qblock {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Matrix formats. Gate matrices live in the most specific class that can hold
// them, and the binary operations below promote classes by the fixed tables
// in promo_mul/promo_kron/promo_add/promo_had.
// ---------------------------------------------------------------------------

/// Identity of a given dimension; stores nothing else.
struct Identity {
    std::size_t dim = 0;
    explicit Identity(std::size_t d) : dim(d) {
        if (d == 0) throw ShapeError("Identity: dimension must be positive");
    }
};

struct Diagonal {
    std::vector<cplx> diag;
    explicit Diagonal(std::vector<cplx> d) : diag(std::move(d)) {
        if (diag.empty()) throw ShapeError("Diagonal: dimension must be positive");
    }
};

/// Generalized permutation matrix: row i holds its only entry vals[i] at
/// column perm[i]. Column indices are 0-based in memory; the text dump and
/// the CLI render them 1-based.
struct Permutation {
    std::vector<std::size_t> perm;
    std::vector<cplx> vals;
    Permutation(std::vector<std::size_t> p, std::vector<cplx> v)
        : perm(std::move(p)), vals(std::move(v)) {
        if (perm.empty() || perm.size() != vals.size()) {
            throw ShapeError("Permutation: perm and vals must be non-empty and equal length");
        }
        std::vector<bool> seen(perm.size(), false);
        for (std::size_t c : perm) {
            if (c >= perm.size() || seen[c]) {
                throw ValidationError("Permutation: column indices must form a permutation");
            }
            seen[c] = true;
        }
    }
};

/// Compressed sparse columns; rows are sorted within each column.
struct SparseColumns {
    std::size_t dim = 0;
    std::vector<std::size_t> colptr;  // size dim+1, monotone
    std::vector<std::size_t> rows;
    std::vector<cplx> vals;

    SparseColumns(std::size_t d, std::vector<std::size_t> cp, std::vector<std::size_t> r,
                  std::vector<cplx> v)
        : dim(d), colptr(std::move(cp)), rows(std::move(r)), vals(std::move(v)) {
        if (dim == 0 || colptr.size() != dim + 1 || colptr.front() != 0 ||
            colptr.back() != rows.size() || rows.size() != vals.size()) {
            throw ShapeError("SparseColumns: inconsistent structure");
        }
        for (std::size_t c = 0; c < dim; ++c) {
            if (colptr[c] > colptr[c + 1]) throw ShapeError("SparseColumns: column pointers not monotone");
            for (std::size_t k = colptr[c]; k + 1 < colptr[c + 1]; ++k) {
                if (rows[k] >= rows[k + 1]) throw ValidationError("SparseColumns: rows must be sorted and unique");
            }
            if (colptr[c] < colptr[c + 1] && rows[colptr[c + 1] - 1] >= dim) {
                throw RangeError("SparseColumns: row index out of range");
            }
        }
    }
};

/// Column-major dense square matrix.
struct Dense {
    std::size_t dim = 0;
    std::vector<cplx> a;  // a[c*dim + r]
    Dense(std::size_t d, std::vector<cplx> data) : dim(d), a(std::move(data)) {
        if (dim == 0 || a.size() != dim * dim) throw ShapeError("Dense: data size must be dim^2");
    }
    explicit Dense(std::size_t d) : dim(d), a(d * d, cplx(0.0)) {
        if (dim == 0) throw ShapeError("Dense: dimension must be positive");
    }
    cplx& at(std::size_t r, std::size_t c) { return a[c * dim + r]; }
    const cplx& at(std::size_t r, std::size_t c) const { return a[c * dim + r]; }
};

/// Rank-one matrix left*right (right is a row vector, stored as given, not
/// conjugated). Never materialized; matvec applies left*(right . x).
struct OuterProduct {
    std::vector<cplx> left;
    std::vector<cplx> right;
    OuterProduct(std::vector<cplx> l, std::vector<cplx> r) : left(std::move(l)), right(std::move(r)) {
        if (left.empty() || left.size() != right.size()) {
            throw ShapeError("OuterProduct: vectors must be non-empty and equal length");
        }
    }
};

using MatrixRepr = std::variant<Identity, Diagonal, Permutation, SparseColumns, Dense, OuterProduct>;

enum class MatKind : int { I = 0, D = 1, P = 2, S = 3, M = 4, Outer = 5 };

inline MatKind kind_of(const MatrixRepr& m) { return static_cast<MatKind>(m.index()); }

inline const char* kind_name(MatKind k) {
    switch (k) {
        case MatKind::I: return "identity";
        case MatKind::D: return "diagonal";
        case MatKind::P: return "permutation";
        case MatKind::S: return "sparse";
        case MatKind::M: return "dense";
        case MatKind::Outer: return "outer";
    }
    return "?";
}

inline std::size_t mat_dim(const MatrixRepr& m) {
    return std::visit(
        [](const auto& x) -> std::size_t {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Identity>) return x.dim;
            else if constexpr (std::is_same_v<T, Diagonal>) return x.diag.size();
            else if constexpr (std::is_same_v<T, Permutation>) return x.perm.size();
            else if constexpr (std::is_same_v<T, SparseColumns>) return x.dim;
            else if constexpr (std::is_same_v<T, Dense>) return x.dim;
            else return x.left.size();
        },
        m);
}

// ---------------------------------------------------------------------------
// Entry access and conversions.
// ---------------------------------------------------------------------------

inline cplx mat_entry(const MatrixRepr& m, std::size_t r, std::size_t c) {
    return std::visit(
        [&](const auto& x) -> cplx {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Identity>) {
                return r == c ? cplx(1.0) : cplx(0.0);
            } else if constexpr (std::is_same_v<T, Diagonal>) {
                return r == c ? x.diag[r] : cplx(0.0);
            } else if constexpr (std::is_same_v<T, Permutation>) {
                return x.perm[r] == c ? x.vals[r] : cplx(0.0);
            } else if constexpr (std::is_same_v<T, SparseColumns>) {
                auto lo = x.rows.begin() + static_cast<std::ptrdiff_t>(x.colptr[c]);
                auto hi = x.rows.begin() + static_cast<std::ptrdiff_t>(x.colptr[c + 1]);
                auto it = std::lower_bound(lo, hi, r);
                if (it != hi && *it == r) {
                    return x.vals[static_cast<std::size_t>(it - x.rows.begin())];
                }
                return cplx(0.0);
            } else if constexpr (std::is_same_v<T, Dense>) {
                return x.at(r, c);
            } else {
                return x.left[r] * x.right[c];
            }
        },
        m);
}

/// Calls f(row, col, value) for every structural nonzero.
template <typename F>
void for_each_entry(const MatrixRepr& m, F&& f) {
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Identity>) {
                for (std::size_t i = 0; i < x.dim; ++i) f(i, i, cplx(1.0));
            } else if constexpr (std::is_same_v<T, Diagonal>) {
                for (std::size_t i = 0; i < x.diag.size(); ++i) f(i, i, x.diag[i]);
            } else if constexpr (std::is_same_v<T, Permutation>) {
                for (std::size_t i = 0; i < x.perm.size(); ++i) f(i, x.perm[i], x.vals[i]);
            } else if constexpr (std::is_same_v<T, SparseColumns>) {
                for (std::size_t c = 0; c < x.dim; ++c) {
                    for (std::size_t k = x.colptr[c]; k < x.colptr[c + 1]; ++k) {
                        f(x.rows[k], c, x.vals[k]);
                    }
                }
            } else if constexpr (std::is_same_v<T, Dense>) {
                for (std::size_t c = 0; c < x.dim; ++c) {
                    for (std::size_t r = 0; r < x.dim; ++r) f(r, c, x.at(r, c));
                }
            } else {
                for (std::size_t c = 0; c < x.right.size(); ++c) {
                    for (std::size_t r = 0; r < x.left.size(); ++r) f(r, c, x.left[r] * x.right[c]);
                }
            }
        },
        m);
}

inline std::size_t mat_nnz(const MatrixRepr& m) {
    std::size_t n = 0;
    for_each_entry(m, [&](std::size_t, std::size_t, cplx) { ++n; });
    return n;
}

inline Dense to_dense(const MatrixRepr& m) {
    Dense out(mat_dim(m));
    for_each_entry(m, [&](std::size_t r, std::size_t c, cplx v) { out.at(r, c) += v; });
    return out;
}

inline SparseColumns to_sparse(const MatrixRepr& m) {
    std::size_t d = mat_dim(m);
    std::vector<std::size_t> counts(d + 1, 0);
    for_each_entry(m, [&](std::size_t, std::size_t c, cplx) { ++counts[c + 1]; });
    for (std::size_t c = 0; c < d; ++c) counts[c + 1] += counts[c];
    std::vector<std::size_t> colptr = counts;
    std::vector<std::size_t> rows(colptr[d]);
    std::vector<cplx> vals(colptr[d]);
    std::vector<std::size_t> cursor(colptr.begin(), colptr.end() - 1);
    for_each_entry(m, [&](std::size_t r, std::size_t c, cplx v) {
        rows[cursor[c]] = r;
        vals[cursor[c]] = v;
        ++cursor[c];
    });
    // for_each_entry emits rows in order for every format except Permutation.
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t k = colptr[c] + 1; k < colptr[c + 1]; ++k) {
            if (rows[k - 1] > rows[k]) {
                std::swap(rows[k - 1], rows[k]);
                std::swap(vals[k - 1], vals[k]);
                k = colptr[c];  // restart this column's pass
            }
        }
    }
    return SparseColumns(d, std::move(colptr), std::move(rows), std::move(vals));
}

// Generalized-permutation view of I/D/P operands.
struct PermView {
    std::vector<std::size_t> perm;
    std::vector<cplx> vals;
};

inline PermView perm_view(const MatrixRepr& m) {
    std::size_t d = mat_dim(m);
    PermView pv;
    pv.perm.resize(d);
    pv.vals.assign(d, cplx(1.0));
    if (const auto* p = std::get_if<Permutation>(&m)) {
        pv.perm = p->perm;
        pv.vals = p->vals;
    } else if (const auto* dg = std::get_if<Diagonal>(&m)) {
        for (std::size_t i = 0; i < d; ++i) pv.perm[i] = i;
        pv.vals = dg->diag;
    } else if (std::holds_alternative<Identity>(m)) {
        for (std::size_t i = 0; i < d; ++i) pv.perm[i] = i;
    } else {
        throw ShapeError("perm_view: operand is not identity/diagonal/permutation");
    }
    return pv;
}

inline std::vector<cplx> diag_view(const MatrixRepr& m) {
    std::size_t d = mat_dim(m);
    std::vector<cplx> out(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = mat_entry(m, i, i);
    return out;
}

// ---------------------------------------------------------------------------
// Promotion tables. Rows index the left operand, columns the right, both in
// the order I, D, P, S, M. Entries are the result class.
// ---------------------------------------------------------------------------

namespace promo {
constexpr MatKind I = MatKind::I, D = MatKind::D, P = MatKind::P, S = MatKind::S, M = MatKind::M;

constexpr MatKind mul[5][5] = {
    {I, D, P, S, M},
    {D, D, P, S, M},
    {P, P, P, S, M},
    {S, S, S, S, M},
    {M, M, M, M, M},
};
constexpr MatKind kron[5][5] = {
    {I, D, P, S, S},
    {D, D, P, S, S},
    {P, P, P, S, S},
    {S, S, S, S, S},
    {S, S, S, S, S},
};
constexpr MatKind add[5][5] = {
    {D, D, S, S, M},
    {D, D, S, S, M},
    {S, S, S, S, M},
    {S, S, S, S, M},
    {M, M, M, M, M},
};
constexpr MatKind had[5][5] = {
    {I, D, D, D, D},
    {D, D, D, D, D},
    {D, D, P, P, P},
    {D, D, P, S, S},
    {D, D, P, S, M},
};
}  // namespace promo

inline MatKind table_kind(const MatKind table[5][5], const MatrixRepr& a, const MatrixRepr& b) {
    MatKind ka = kind_of(a), kb = kind_of(b);
    if (ka == MatKind::Outer || kb == MatKind::Outer) {
        throw UnsupportedError("outer-product matrices do not participate in matrix arithmetic");
    }
    return table[static_cast<int>(ka)][static_cast<int>(kb)];
}

// ---------------------------------------------------------------------------
// mul
// ---------------------------------------------------------------------------

namespace detail {

inline SparseColumns sparse_mul(const SparseColumns& a, const SparseColumns& b) {
    std::size_t d = a.dim;
    std::vector<std::size_t> colptr(d + 1, 0);
    std::vector<std::size_t> rows;
    std::vector<cplx> vals;
    std::vector<cplx> acc(d, cplx(0.0));
    std::vector<bool> seen(d, false);
    std::vector<std::size_t> touched;
    touched.reserve(64);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t kb = b.colptr[j]; kb < b.colptr[j + 1]; ++kb) {
            std::size_t k = b.rows[kb];
            cplx bv = b.vals[kb];
            for (std::size_t ka = a.colptr[k]; ka < a.colptr[k + 1]; ++ka) {
                std::size_t r = a.rows[ka];
                if (!seen[r]) {
                    seen[r] = true;
                    touched.push_back(r);
                }
                acc[r] += a.vals[ka] * bv;
            }
        }
        std::sort(touched.begin(), touched.end());
        for (std::size_t r : touched) {
            rows.push_back(r);
            vals.push_back(acc[r]);
            acc[r] = cplx(0.0);
            seen[r] = false;
        }
        touched.clear();
        colptr[j + 1] = rows.size();
    }
    return SparseColumns(d, std::move(colptr), std::move(rows), std::move(vals));
}

inline Dense dense_mul(const MatrixRepr& a, const MatrixRepr& b) {
    std::size_t d = mat_dim(a);
    Dense out(d);
    if (kind_of(a) == MatKind::M) {
        const Dense& da = std::get<Dense>(a);
        // out[:, j] += A[:, k] * B[k, j] over B's nonzeros
        for_each_entry(b, [&](std::size_t k, std::size_t j, cplx bv) {
            const cplx* acol = da.a.data() + k * d;
            cplx* ocol = out.a.data() + j * d;
            for (std::size_t r = 0; r < d; ++r) ocol[r] += acol[r] * bv;
        });
    } else {
        Dense db = kind_of(b) == MatKind::M ? std::get<Dense>(b) : to_dense(b);
        for_each_entry(a, [&](std::size_t r, std::size_t k, cplx av) {
            for (std::size_t j = 0; j < d; ++j) out.at(r, j) += av * db.at(k, j);
        });
    }
    return out;
}

}  // namespace detail

/// Matrix product A*B in the class given by the multiplication table.
inline MatrixRepr mul(const MatrixRepr& a, const MatrixRepr& b) {
    if (mat_dim(a) != mat_dim(b)) throw ShapeError("mul: dimension mismatch");
    switch (table_kind(promo::mul, a, b)) {
        case MatKind::I:
            return Identity(mat_dim(a));
        case MatKind::D: {
            auto da = diag_view(a);
            auto db = diag_view(b);
            for (std::size_t i = 0; i < da.size(); ++i) da[i] *= db[i];
            return Diagonal(std::move(da));
        }
        case MatKind::P: {
            auto pa = perm_view(a);
            auto pb = perm_view(b);
            std::size_t d = pa.perm.size();
            std::vector<std::size_t> perm(d);
            std::vector<cplx> vals(d);
            for (std::size_t i = 0; i < d; ++i) {
                perm[i] = pb.perm[pa.perm[i]];
                vals[i] = pa.vals[i] * pb.vals[pa.perm[i]];
            }
            return Permutation(std::move(perm), std::move(vals));
        }
        case MatKind::S:
            return detail::sparse_mul(to_sparse(a), to_sparse(b));
        default:
            return detail::dense_mul(a, b);
    }
}

// ---------------------------------------------------------------------------
// kron; the left operand indexes the slower-varying axis.
// ---------------------------------------------------------------------------

inline MatrixRepr kron(const MatrixRepr& a, const MatrixRepr& b) {
    std::size_t da = mat_dim(a), db = mat_dim(b);
    switch (table_kind(promo::kron, a, b)) {
        case MatKind::I:
            return Identity(da * db);
        case MatKind::D: {
            auto va = diag_view(a);
            auto vb = diag_view(b);
            std::vector<cplx> diag(da * db);
            for (std::size_t i = 0; i < da; ++i) {
                for (std::size_t j = 0; j < db; ++j) diag[i * db + j] = va[i] * vb[j];
            }
            return Diagonal(std::move(diag));
        }
        case MatKind::P: {
            auto pa = perm_view(a);
            auto pb = perm_view(b);
            std::vector<std::size_t> perm(da * db);
            std::vector<cplx> vals(da * db);
            for (std::size_t i = 0; i < da; ++i) {
                for (std::size_t j = 0; j < db; ++j) {
                    perm[i * db + j] = pa.perm[i] * db + pb.perm[j];
                    vals[i * db + j] = pa.vals[i] * pb.vals[j];
                }
            }
            return Permutation(std::move(perm), std::move(vals));
        }
        default: {
            SparseColumns sa = to_sparse(a);
            SparseColumns sb = to_sparse(b);
            std::size_t d = da * db;
            std::vector<std::size_t> colptr(d + 1, 0);
            std::vector<std::size_t> rows;
            std::vector<cplx> vals;
            rows.reserve(sa.rows.size() * sb.rows.size());
            vals.reserve(sa.rows.size() * sb.rows.size());
            for (std::size_t ca = 0; ca < da; ++ca) {
                for (std::size_t cb = 0; cb < db; ++cb) {
                    for (std::size_t ka = sa.colptr[ca]; ka < sa.colptr[ca + 1]; ++ka) {
                        for (std::size_t kb = sb.colptr[cb]; kb < sb.colptr[cb + 1]; ++kb) {
                            rows.push_back(sa.rows[ka] * db + sb.rows[kb]);
                            vals.push_back(sa.vals[ka] * sb.vals[kb]);
                        }
                    }
                    colptr[ca * db + cb + 1] = rows.size();
                }
            }
            return SparseColumns(d, std::move(colptr), std::move(rows), std::move(vals));
        }
    }
}

// ---------------------------------------------------------------------------
// add and hadamard
// ---------------------------------------------------------------------------

namespace detail {

inline SparseColumns sparse_add(const SparseColumns& a, const SparseColumns& b) {
    std::size_t d = a.dim;
    std::vector<std::size_t> colptr(d + 1, 0);
    std::vector<std::size_t> rows;
    std::vector<cplx> vals;
    for (std::size_t c = 0; c < d; ++c) {
        std::size_t ka = a.colptr[c], kb = b.colptr[c];
        while (ka < a.colptr[c + 1] || kb < b.colptr[c + 1]) {
            std::size_t ra = ka < a.colptr[c + 1] ? a.rows[ka] : d;
            std::size_t rb = kb < b.colptr[c + 1] ? b.rows[kb] : d;
            if (ra < rb) {
                rows.push_back(ra);
                vals.push_back(a.vals[ka++]);
            } else if (rb < ra) {
                rows.push_back(rb);
                vals.push_back(b.vals[kb++]);
            } else {
                rows.push_back(ra);
                vals.push_back(a.vals[ka++] + b.vals[kb++]);
            }
        }
        colptr[c + 1] = rows.size();
    }
    return SparseColumns(d, std::move(colptr), std::move(rows), std::move(vals));
}

}  // namespace detail

/// Sum A+B in the class given by the addition table.
inline MatrixRepr add(const MatrixRepr& a, const MatrixRepr& b) {
    if (mat_dim(a) != mat_dim(b)) throw ShapeError("add: dimension mismatch");
    switch (table_kind(promo::add, a, b)) {
        case MatKind::D: {
            auto da = diag_view(a);
            auto db = diag_view(b);
            for (std::size_t i = 0; i < da.size(); ++i) da[i] += db[i];
            return Diagonal(std::move(da));
        }
        case MatKind::S:
            return detail::sparse_add(to_sparse(a), to_sparse(b));
        default: {
            Dense out = to_dense(a);
            for_each_entry(b, [&](std::size_t r, std::size_t c, cplx v) { out.at(r, c) += v; });
            return out;
        }
    }
}

/// Elementwise product A.*B in the class given by the hadamard table.
inline MatrixRepr hadamard(const MatrixRepr& a, const MatrixRepr& b) {
    if (mat_dim(a) != mat_dim(b)) throw ShapeError("hadamard: dimension mismatch");
    std::size_t d = mat_dim(a);
    switch (table_kind(promo::had, a, b)) {
        case MatKind::I:
            return Identity(d);
        case MatKind::D: {
            auto da = diag_view(a);
            auto db = diag_view(b);
            for (std::size_t i = 0; i < d; ++i) da[i] *= db[i];
            return Diagonal(std::move(da));
        }
        case MatKind::P: {
            // Take the structure of the permutation operand; mismatched
            // positions in the other operand contribute zeros.
            const MatrixRepr& pside = kind_of(a) == MatKind::P ? a : b;
            const MatrixRepr& other = kind_of(a) == MatKind::P ? b : a;
            const auto& p = std::get<Permutation>(pside);
            std::vector<cplx> vals(d);
            for (std::size_t i = 0; i < d; ++i) {
                vals[i] = p.vals[i] * mat_entry(other, i, p.perm[i]);
            }
            return Permutation(p.perm, std::move(vals));
        }
        case MatKind::S: {
            const MatrixRepr& sside = kind_of(a) == MatKind::S ? a : b;
            const MatrixRepr& other = kind_of(a) == MatKind::S ? b : a;
            SparseColumns out = std::get<SparseColumns>(sside);
            for (std::size_t c = 0; c < d; ++c) {
                for (std::size_t k = out.colptr[c]; k < out.colptr[c + 1]; ++k) {
                    out.vals[k] *= mat_entry(other, out.rows[k], c);
                }
            }
            return out;
        }
        default: {
            Dense out = std::get<Dense>(a);
            const Dense& db = std::get<Dense>(b);
            for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] *= db.a[i];
            return out;
        }
    }
}

// ---------------------------------------------------------------------------
// adjoint, scaling, matvec
// ---------------------------------------------------------------------------

/// Conjugate transpose, staying within the operand's class.
inline MatrixRepr adjoint_mat(const MatrixRepr& m) {
    return std::visit(
        [](const auto& x) -> MatrixRepr {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Identity>) {
                return x;
            } else if constexpr (std::is_same_v<T, Diagonal>) {
                auto d = x.diag;
                for (auto& v : d) v = std::conj(v);
                return Diagonal(std::move(d));
            } else if constexpr (std::is_same_v<T, Permutation>) {
                std::size_t n = x.perm.size();
                std::vector<std::size_t> perm(n);
                std::vector<cplx> vals(n);
                for (std::size_t i = 0; i < n; ++i) {
                    perm[x.perm[i]] = i;
                    vals[x.perm[i]] = std::conj(x.vals[i]);
                }
                return Permutation(std::move(perm), std::move(vals));
            } else if constexpr (std::is_same_v<T, SparseColumns>) {
                std::size_t d = x.dim;
                std::vector<std::size_t> colptr(d + 1, 0);
                for (std::size_t k = 0; k < x.rows.size(); ++k) ++colptr[x.rows[k] + 1];
                for (std::size_t c = 0; c < d; ++c) colptr[c + 1] += colptr[c];
                std::vector<std::size_t> rows(x.rows.size());
                std::vector<cplx> vals(x.vals.size());
                std::vector<std::size_t> cursor(colptr.begin(), colptr.end() - 1);
                for (std::size_t c = 0; c < d; ++c) {
                    for (std::size_t k = x.colptr[c]; k < x.colptr[c + 1]; ++k) {
                        std::size_t dst = cursor[x.rows[k]]++;
                        rows[dst] = c;
                        vals[dst] = std::conj(x.vals[k]);
                    }
                }
                return SparseColumns(d, std::move(colptr), std::move(rows), std::move(vals));
            } else if constexpr (std::is_same_v<T, Dense>) {
                Dense out(x.dim);
                for (std::size_t c = 0; c < x.dim; ++c) {
                    for (std::size_t r = 0; r < x.dim; ++r) out.at(c, r) = std::conj(x.at(r, c));
                }
                return out;
            } else {
                std::vector<cplx> l(x.right.size()), r(x.left.size());
                for (std::size_t i = 0; i < l.size(); ++i) l[i] = std::conj(x.right[i]);
                for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::conj(x.left[i]);
                return OuterProduct(std::move(l), std::move(r));
            }
        },
        m);
}

/// factor*M. An identity becomes a constant diagonal; other classes keep
/// their structure with scaled values.
inline MatrixRepr scale_mat(cplx factor, const MatrixRepr& m) {
    return std::visit(
        [&](const auto& x) -> MatrixRepr {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Identity>) {
                return Diagonal(std::vector<cplx>(x.dim, factor));
            } else if constexpr (std::is_same_v<T, Diagonal>) {
                auto d = x.diag;
                for (auto& v : d) v *= factor;
                return Diagonal(std::move(d));
            } else if constexpr (std::is_same_v<T, Permutation>) {
                auto v = x.vals;
                for (auto& e : v) e *= factor;
                return Permutation(x.perm, std::move(v));
            } else if constexpr (std::is_same_v<T, SparseColumns>) {
                auto out = x;
                for (auto& e : out.vals) e *= factor;
                return out;
            } else if constexpr (std::is_same_v<T, Dense>) {
                auto out = x;
                for (auto& e : out.a) e *= factor;
                return out;
            } else {
                auto l = x.left;
                for (auto& e : l) e *= factor;
                return OuterProduct(std::move(l), x.right);
            }
        },
        m);
}

/// Applies A to every column of the buffer in place. The buffer holds
/// `ncols` contiguous columns of length mat_dim(A).
inline void matvec_cols(const MatrixRepr& m, std::span<cplx> buffer, std::size_t ncols) {
    std::size_t d = mat_dim(m);
    if (buffer.size() != d * ncols) throw ShapeError("matvec_cols: buffer size mismatch");
    if (std::holds_alternative<Identity>(m)) return;
    if (const auto* dg = std::get_if<Diagonal>(&m)) {
        parallel_for(ncols, [&](std::size_t c) {
            cplx* x = buffer.data() + c * d;
            for (std::size_t i = 0; i < d; ++i) x[i] *= dg->diag[i];
        });
        return;
    }
    if (const auto* op = std::get_if<OuterProduct>(&m)) {
        parallel_for(ncols, [&](std::size_t c) {
            cplx* x = buffer.data() + c * d;
            cplx s(0.0);
            for (std::size_t i = 0; i < d; ++i) s += op->right[i] * x[i];
            for (std::size_t i = 0; i < d; ++i) x[i] = op->left[i] * s;
        });
        return;
    }
    parallel_for(ncols, [&](std::size_t c) {
        std::vector<cplx> scratch(d, cplx(0.0));
        cplx* x = buffer.data() + c * d;
        if (const auto* p = std::get_if<Permutation>(&m)) {
            for (std::size_t i = 0; i < d; ++i) scratch[i] = p->vals[i] * x[p->perm[i]];
        } else if (const auto* s = std::get_if<SparseColumns>(&m)) {
            for (std::size_t j = 0; j < d; ++j) {
                cplx xv = x[j];
                if (xv == cplx(0.0)) continue;
                for (std::size_t k = s->colptr[j]; k < s->colptr[j + 1]; ++k) {
                    scratch[s->rows[k]] += s->vals[k] * xv;
                }
            }
        } else {
            const Dense& dn = std::get<Dense>(m);
            for (std::size_t j = 0; j < d; ++j) {
                cplx xv = x[j];
                if (xv == cplx(0.0)) continue;
                const cplx* col = dn.a.data() + j * d;
                for (std::size_t i = 0; i < d; ++i) scratch[i] += col[i] * xv;
            }
        }
        std::copy(scratch.begin(), scratch.end(), x);
    });
}

// ---------------------------------------------------------------------------
// Operator properties
// ---------------------------------------------------------------------------

struct OpProps {
    std::optional<bool> hermitian;
    std::optional<bool> unitary;
    std::optional<bool> reflexive;
};

inline constexpr double kPropTol = 1e-10;

namespace detail {

inline double max_abs_diff(const MatrixRepr& a, const MatrixRepr& b) {
    double m = 0.0;
    for_each_entry(a, [&](std::size_t r, std::size_t c, cplx v) {
        m = std::max(m, std::abs(v - mat_entry(b, r, c)));
    });
    for_each_entry(b, [&](std::size_t r, std::size_t c, cplx v) {
        m = std::max(m, std::abs(v - mat_entry(a, r, c)));
    });
    return m;
}

inline double dist_to_identity(const MatrixRepr& a) {
    double m = 0.0;
    std::size_t d = mat_dim(a);
    for_each_entry(a, [&](std::size_t r, std::size_t c, cplx v) {
        m = std::max(m, std::abs(v - (r == c ? cplx(1.0) : cplx(0.0))));
    });
    for (std::size_t i = 0; i < d; ++i) {
        m = std::max(m, std::abs(mat_entry(a, i, i) - cplx(1.0)));
    }
    return m;
}

}  // namespace detail

inline bool is_hermitian(const MatrixRepr& m, double tol = kPropTol) {
    return detail::max_abs_diff(m, adjoint_mat(m)) <= tol;
}

inline bool is_unitary(const MatrixRepr& m, double tol = kPropTol) {
    return detail::dist_to_identity(mul(adjoint_mat(m), m)) <= tol;
}

inline bool is_reflexive(const MatrixRepr& m, double tol = kPropTol) {
    return detail::dist_to_identity(mul(m, m)) <= tol;
}

/// Inspects the matrix for hermiticity, unitarity and reflexivity at 1e-10.
inline OpProps props(const MatrixRepr& m) {
    OpProps p;
    p.hermitian = is_hermitian(m);
    p.unitary = is_unitary(m);
    p.reflexive = is_reflexive(m);
    return p;
}

// ---------------------------------------------------------------------------
// Text dump: header "dim format nnz", then one "row col re im" triplet per
// line with 1-based indices.
// ---------------------------------------------------------------------------

inline void write_coo(const MatrixRepr& m, std::ostream& os) {
    os << mat_dim(m) << ' ' << kind_name(kind_of(m)) << ' ' << mat_nnz(m) << '\n';
    for_each_entry(m, [&](std::size_t r, std::size_t c, cplx v) {
        os << (r + 1) << ' ' << (c + 1) << ' ' << format_double(v.real()) << ' '
           << format_double(v.imag()) << '\n';
    });
}

inline MatrixRepr read_coo(std::istream& is) {
    std::size_t dim = 0, nnz = 0;
    std::string tag;
    if (!(is >> dim >> tag >> nnz) || dim == 0) {
        throw SerializationError("matrix dump: bad header");
    }
    std::vector<std::size_t> rr(nnz), cc(nnz);
    std::vector<cplx> vv(nnz);
    for (std::size_t k = 0; k < nnz; ++k) {
        std::size_t r = 0, c = 0;
        double re = 0.0, im = 0.0;
        if (!(is >> r >> c >> re >> im) || r < 1 || c < 1 || r > dim || c > dim) {
            throw SerializationError("matrix dump: bad entry at line " + std::to_string(k + 2));
        }
        rr[k] = r - 1;
        cc[k] = c - 1;
        vv[k] = cplx(re, im);
    }
    if (tag == "identity") return Identity(dim);
    if (tag == "diagonal") {
        std::vector<cplx> diag(dim, cplx(0.0));
        for (std::size_t k = 0; k < nnz; ++k) {
            if (rr[k] != cc[k]) throw SerializationError("matrix dump: off-diagonal entry in diagonal matrix");
            diag[rr[k]] = vv[k];
        }
        return Diagonal(std::move(diag));
    }
    if (tag == "permutation") {
        std::vector<std::size_t> perm(dim, dim);
        std::vector<cplx> vals(dim, cplx(0.0));
        for (std::size_t k = 0; k < nnz; ++k) {
            perm[rr[k]] = cc[k];
            vals[rr[k]] = vv[k];
        }
        for (std::size_t i = 0; i < dim; ++i) {
            if (perm[i] == dim) throw SerializationError("matrix dump: permutation row missing");
        }
        return Permutation(std::move(perm), std::move(vals));
    }
    if (tag == "dense") {
        Dense out(dim);
        for (std::size_t k = 0; k < nnz; ++k) out.at(rr[k], cc[k]) += vv[k];
        return out;
    }
    // "sparse" and "outer" reload as sparse columns.
    std::vector<std::size_t> order(nnz);
    for (std::size_t k = 0; k < nnz; ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return cc[x] != cc[y] ? cc[x] < cc[y] : rr[x] < rr[y];
    });
    std::vector<std::size_t> colptr(dim + 1, 0), rows(nnz);
    std::vector<cplx> vals(nnz);
    for (std::size_t k = 0; k < nnz; ++k) {
        rows[k] = rr[order[k]];
        vals[k] = vv[order[k]];
        ++colptr[cc[order[k]] + 1];
    }
    for (std::size_t c = 0; c < dim; ++c) colptr[c + 1] += colptr[c];
    return SparseColumns(dim, std::move(colptr), std::move(rows), std::move(vals));
}

}  // namespace qblock
