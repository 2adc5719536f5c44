#ifndef OMF_THETA1_HPP
#define OMF_THETA1_HPP

// Genus-1 theta series with a strategy dispatch that keeps large lattices
// tractable: split over orthogonal basis blocks when the Gram matrix is block
// diagonal, otherwise sum over cosets of an orthogonal frame of norm-1
// vectors when one exists, otherwise enumerate short vectors directly.
// All three paths are exact and agree; only their cost differs.

#include "omf/shortvec.hpp"

namespace omf {

namespace th1detail {

inline std::vector<std::vector<int>> gram_components(const IntMat& G) {
    int n = G.rows;
    std::vector<int> comp(n, -1);
    int c = 0;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> stack{s};
        comp[s] = c;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w = 0; w < n; ++w)
                if (comp[w] < 0 && G(v, w) != 0) {
                    comp[w] = c;
                    stack.push_back(w);
                }
        }
        ++c;
    }
    std::vector<std::vector<int>> out(c);
    for (int i = 0; i < n; ++i) out[comp[i]].push_back(i);
    return out;
}

inline void series_mul_trunc(std::vector<Integer>& a, const std::vector<Integer>& b, long bound) {
    std::vector<Integer> r(bound + 1, Integer(0));
    for (long i = 0; i <= bound; ++i) {
        if (a[i] == 0) continue;
        for (long j = 0; i + j <= bound && j < static_cast<long>(b.size()); ++j) {
            if (b[j] == 0) continue;
            r[i + j] += a[i] * b[j];
        }
    }
    a = std::move(r);
}

// sum_{a in Z} q^{a^2 + a b} truncated; b in {-1, 0, 1}.
inline std::vector<Integer> frame_factor(int b, long bound) {
    std::vector<Integer> s(bound + 1, Integer(0));
    for (long a = -bound - 2; a <= bound + 2; ++a) {
        long e = a * a + a * b;
        if (e >= 0 && e <= bound) s[e] += 1;
    }
    return s;
}

// Cosets of the frame sublattice F = <f_1..f_n> in L, via the row HNF of the
// frame coordinates; reps are mixed-radix points below the pivots.
inline std::optional<std::vector<Integer>> theta_by_frame(const Lattice& L, long bound) {
    int n = L.rank();
    auto roots = short_vectors(L, 1);
    std::vector<std::vector<Integer>> frame;
    for (const auto& sv : roots) {
        if (sv.norm != 1) continue;
        bool ok = true;
        for (const auto& f : frame)
            if (L.inner(sv.x, f) != 0) { ok = false; break; }
        if (ok) frame.push_back(sv.x);
        if (static_cast<int>(frame.size()) == n) break;
    }
    if (static_cast<int>(frame.size()) != n) return std::nullopt;

    IntMat rows(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) rows(i, j) = frame[i][j];
    IntMat H = hnf(rows);
    assert(H.rows == n);

    std::vector<Integer> total(bound + 1, Integer(0));
    std::vector<Integer> digits(n, Integer(0));
    std::vector<std::vector<Integer>> factors{frame_factor(-1, bound), frame_factor(0, bound),
                                              frame_factor(1, bound)};
    for (;;) {
        // coset representative, then Babai reduction against the frame
        std::vector<Integer> c(n, Integer(0));
        for (int i = 0; i < n; ++i) c[i] = digits[i];
        for (int i = 0; i < n; ++i) {
            Integer bi = L.inner(c, frame[i]);
            Integer t = llldetail::round_nearest(Rational(bi) / 2);
            if (t != 0)
                for (int j = 0; j < n; ++j) c[j] -= t * frame[i][j];
        }
        Integer qc = L.norm(c);
        if (qc <= bound) {
            long base = qc.get_si();
            std::vector<Integer> prod(bound - base + 1, Integer(0));
            prod[0] = 1;
            for (int i = 0; i < n; ++i) {
                Integer bi = L.inner(c, frame[i]);
                assert(bi >= -1 && bi <= 1);
                series_mul_trunc(prod, factors[bi.get_si() + 1], bound - base);
            }
            for (long e = 0; e + base <= bound; ++e) total[e + base] += prod[e];
        }
        int k = n - 1;
        while (k >= 0) {
            digits[k] += 1;
            if (digits[k] < H(k, k)) break;
            digits[k] = 0;
            --k;
        }
        if (k < 0) break;
    }
    return total;
}

} // namespace th1detail

// theta1(L, bound)[m] = number of x with Q(x) = m, 0 <= m <= bound.
inline std::vector<Integer> theta1(const Lattice& L, long bound) {
    assert(bound >= 0);
    auto comps = th1detail::gram_components(L.gram);
    if (comps.size() > 1) {
        std::vector<Integer> total(bound + 1, Integer(0));
        total[0] = 1;
        for (const auto& idx : comps) {
            int k = static_cast<int>(idx.size());
            IntMat sub(k, k);
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) sub(i, j) = L.gram(idx[i], idx[j]);
            th1detail::series_mul_trunc(total, theta1(Lattice{sub}, bound), bound);
        }
        return total;
    }
    if (L.rank() >= 6)
        if (auto t = th1detail::theta_by_frame(L, bound)) return *t;
    std::vector<Integer> r(bound + 1, Integer(0));
    r[0] = 1;
    for (const auto& sv : short_vectors(L, bound))
        if (sv.norm.fits_slong_p()) r[sv.norm.get_si()] += 2;
    return r;
}

} // namespace omf

#endif
