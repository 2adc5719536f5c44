#ifndef OMF_SHORTVEC_HPP
#define OMF_SHORTVEC_HPP

// Short vector enumeration (Fincke-Pohst on an LLL-reduced basis). The tree
// walk prunes with a floating point Cholesky decomposition, padded by a small
// slack so rounding can never exclude a boundary vector; every recorded
// vector is then checked against the exact integer norm. Results are one
// representative per +-pair, sorted by (norm, coordinates) for
// reproducibility.

#include "omf/lll.hpp"

#include <cmath>

namespace omf {

struct ShortVector {
    std::vector<Integer> x;  // coordinates in the input basis
    Integer norm;            // Q(x)

    bool operator==(const ShortVector& o) const { return x == o.x && norm == o.norm; }
};

using ShortVectorList = std::vector<ShortVector>;

namespace svdetail {

// Diagonalization x^T G x = sum_i d_i (x_i + sum_{j>i} u_ij x_j)^2.
struct Quadratic {
    int n;
    std::vector<long double> d;
    std::vector<std::vector<long double>> u;
    std::vector<std::vector<long>> g;  // exact reduced gram
};

inline Quadratic decompose(const IntMat& gram) {
    int n = gram.rows;
    Quadratic q;
    q.n = n;
    q.d.assign(n, 0);
    q.u.assign(n, std::vector<long double>(n, 0));
    q.g.assign(n, std::vector<long>(n, 0));
    std::vector<std::vector<long double>> A(n, std::vector<long double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            q.g[i][j] = gram(i, j).get_si();
            A[i][j] = static_cast<long double>(q.g[i][j]);
        }
    for (int i = 0; i < n; ++i) {
        q.d[i] = A[i][i];
        assert(q.d[i] > 0);
        for (int j = i + 1; j < n; ++j) q.u[i][j] = A[i][j] / q.d[i];
        for (int r = i + 1; r < n; ++r)
            for (int c = r; c < n; ++c) A[r][c] -= A[r][i] * A[i][c] / q.d[i];
        for (int r = i + 1; r < n; ++r)
            for (int c = i + 1; c < r; ++c) A[r][c] = A[c][r];
    }
    return q;
}

struct Enumerator {
    Quadratic q;
    long double budget = 0;  // x^T G x <= budget, already padded
    long exact_cap = 0;      // exact bound on x^T G x
    std::vector<long> x;
    std::vector<ShortVector>* out = nullptr;
    const IntMat* back = nullptr;  // maps reduced coords to input coords

    void record() {
        // exact norm in the reduced basis; reject float-slack overshoots
        long nrm2 = 0;
        for (int i = 0; i < q.n; ++i) {
            if (x[i] == 0) continue;
            long row = 0;
            for (int j = 0; j < q.n; ++j) row += q.g[i][j] * x[j];
            nrm2 += row * x[i];
        }
        if (nrm2 > exact_cap) return;
        assert(nrm2 > 0 && nrm2 % 2 == 0);
        std::vector<Integer> y(q.n, Integer(0));
        for (int i = 0; i < q.n; ++i) {
            if (x[i] == 0) continue;
            for (int r = 0; r < q.n; ++r) y[r] += (*back)(r, i) * x[i];
        }
        out->push_back(ShortVector{std::move(y), Integer(nrm2 / 2)});
    }

    void descend(int i, long double rem, bool all_zero) {
        if (i < 0) {
            if (!all_zero) record();
            return;
        }
        long double c = 0;
        for (int j = i + 1; j < q.n; ++j)
            if (x[j] != 0) c += q.u[i][j] * static_cast<long double>(x[j]);
        auto fits = [&](long t) {
            long double s = static_cast<long double>(t) + c;
            return q.d[i] * s * s <= rem;
        };
        auto step = [&](long t) {
            long double s = static_cast<long double>(t) + c;
            long double cost = q.d[i] * s * s;
            x[i] = t;
            descend(i - 1, rem - cost, all_zero && t == 0);
            x[i] = 0;
        };
        // The admissible t form a contiguous interval whose centre is -c; the
        // integer nearest the centre lies in the interval iff any integer
        // does. With the sign restriction (all_zero) only t >= 0 is allowed.
        long t0 = static_cast<long>(std::llroundl(-c));
        long start = (all_zero && t0 < 0) ? 0 : t0;
        if (!fits(start)) return;
        for (long t = start; fits(t); ++t) step(t);
        for (long t = start - 1; (!all_zero || t >= 0) && fits(t); --t) step(t);
    }
};

} // namespace svdetail

inline ShortVectorList short_vectors(const Lattice& L, const Integer& bound) {
    ShortVectorList out;
    if (bound <= 0) return out;
    auto [red, U] = lll_reduce(L);
    svdetail::Quadratic q = svdetail::decompose(red.gram);
    svdetail::Enumerator e;
    e.q = q;
    long cap = Integer(2 * bound).get_si();
    e.exact_cap = cap;
    e.budget = static_cast<long double>(cap) * (1 + 1e-9L) + 1e-9L;
    e.out = &out;
    e.back = &U;
    e.x.assign(q.n, 0);
    e.descend(q.n - 1, e.budget, true);
    for (auto& sv : out) {
        for (auto& xi : sv.x) {
            if (xi == 0) continue;
            if (xi < 0)
                for (auto& y : sv.x) y = -y;
            break;
        }
    }
    std::sort(out.begin(), out.end(), [](const ShortVector& a, const ShortVector& b) {
        if (a.norm != b.norm) return a.norm < b.norm;
        return a.x < b.x;
    });
    return out;
}

// r_0 = 1 and r_m = number of lattice vectors of norm exactly m.
inline std::vector<Integer> theta1_coeffs(const Lattice& L, const Integer& bound) {
    std::vector<Integer> r(bound.get_ui() + 1, Integer(0));
    r[0] = 1;
    for (const auto& sv : short_vectors(L, bound)) r[sv.norm.get_ui()] += 2;
    return r;
}

} // namespace omf

#endif
