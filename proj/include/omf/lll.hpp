#ifndef OMF_LLL_HPP
#define OMF_LLL_HPP

// LLL reduction working directly on the Gram matrix with exact rational
// Gram-Schmidt data (delta = 3/4). Returns the reduced lattice together with
// the unimodular transform U satisfying U^T gram U = reduced gram.

#include "omf/lattice.hpp"

namespace omf {

namespace llldetail {

// r(i,j) = b_i . b_j*, mu(i,j) = r(i,j)/r(j,j); recomputed from the current
// Gram matrix. Quadratic-time per call, negligible at the ranks used here.
inline void gso(const RatMat& G, RatMat& r, RatMat& mu) {
    int n = G.rows;
    r = RatMat(n, n);
    mu = RatMat(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            Rational s = G(i, j);
            for (int k = 0; k < j; ++k) s -= mu(j, k) * r(i, k);
            r(i, j) = s;
            if (j < i) mu(i, j) = r(i, j) / r(j, j);
        }
        mu(i, i) = 1;
    }
}

// Nearest integer, ties toward zero, so mu = 1/2 counts as size-reduced and
// already-reduced Gram matrices are fixed points.
inline Integer round_nearest(const Rational& x) {
    Integer num = x.get_num(), den = x.get_den();
    Integer q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    Integer twice = 2 * r;
    if (twice > den || (twice == den && q < 0)) q += 1;
    return q;
}

} // namespace llldetail

// Row operations are applied to V (rows = current basis in the original
// coordinates); the Gram matrix is kept consistent throughout.
inline std::pair<Lattice, IntMat> lll_reduce(const Lattice& L) {
    int n = L.rank();
    RatMat G = to_rat(L.gram);
    IntMat V = IntMat::identity(n);

    auto row_addmul = [&](int dst, int src, const Integer& c) {
        // b_dst += c * b_src
        for (int j = 0; j < n; ++j) V(dst, j) += c * V(src, j);
        for (int j = 0; j < n; ++j) {
            G(dst, j) += Rational(c) * G(src, j);
        }
        for (int i = 0; i < n; ++i) {
            G(i, dst) += Rational(c) * G(i, src);
        }
    };
    auto row_swap = [&](int a, int b) {
        for (int j = 0; j < n; ++j) std::swap(V(a, j), V(b, j));
        for (int j = 0; j < n; ++j) std::swap(G(a, j), G(b, j));
        for (int i = 0; i < n; ++i) std::swap(G(i, a), G(i, b));
    };

    RatMat r, mu;
    const Rational delta(3, 4);
    int k = 1;
    llldetail::gso(G, r, mu);
    while (k < n) {
        for (int j = k - 1; j >= 0; --j) {
            Integer c = llldetail::round_nearest(mu(k, j));
            if (c != 0) {
                row_addmul(k, j, -c);
                llldetail::gso(G, r, mu);
            }
        }
        if (r(k, k) >= (delta - mu(k, k - 1) * mu(k, k - 1)) * r(k - 1, k - 1)) {
            ++k;
        } else {
            row_swap(k, k - 1);
            llldetail::gso(G, r, mu);
            k = std::max(1, k - 1);
        }
    }

    IntMat Gred(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Rational x = G(i, j);
            x.canonicalize();
            assert(x.get_den() == 1);
            Gred(i, j) = x.get_num();
        }
    // rows of V are the new basis, so U = V^T satisfies U^T gram U = Gred
    return {Lattice{Gred}, V.transpose()};
}

} // namespace omf

#endif
