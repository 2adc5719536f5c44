#ifndef OMF_MATRIX_HPP
#define OMF_MATRIX_HPP

// Dense matrices over exact coefficient types, with the integer linear
// algebra this library relies on: fraction-free determinants, division-free
// characteristic polynomials, Hermite and Smith reduction, and reduced row
// echelon form / kernels over Q.

#include "omf/poly.hpp"

#include <optional>

namespace omf {

template <class T>
class Mat {
public:
    int rows = 0, cols = 0;
    std::vector<T> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, T(0)) {}
    Mat(int r, int c, std::vector<T> data) : rows(r), cols(c), a(std::move(data)) {
        assert(a.size() == static_cast<size_t>(r) * c);
    }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    T& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const T& operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    bool operator==(const Mat& o) const {
        return rows == o.rows && cols == o.cols && a == o.a;
    }
    bool operator!=(const Mat& o) const { return !(*this == o); }

    Mat operator*(const Mat& o) const {
        assert(cols == o.rows);
        Mat r(rows, o.cols);
        for (int i = 0; i < rows; ++i)
            for (int k = 0; k < cols; ++k) {
                const T& v = (*this)(i, k);
                if (v == 0) continue;
                for (int j = 0; j < o.cols; ++j)
                    r(i, j) += v * o(k, j);
            }
        return r;
    }

    Mat operator+(const Mat& o) const {
        assert(rows == o.rows && cols == o.cols);
        Mat r = *this;
        for (size_t i = 0; i < a.size(); ++i) r.a[i] += o.a[i];
        return r;
    }

    Mat operator-(const Mat& o) const {
        assert(rows == o.rows && cols == o.cols);
        Mat r = *this;
        for (size_t i = 0; i < a.size(); ++i) r.a[i] -= o.a[i];
        return r;
    }

    Mat operator*(const T& s) const {
        Mat r = *this;
        for (auto& x : r.a) x *= s;
        return r;
    }

    Mat transpose() const {
        Mat r(cols, rows);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                r(j, i) = (*this)(i, j);
        return r;
    }

    std::vector<T> row(int i) const {
        std::vector<T> v(cols);
        for (int j = 0; j < cols; ++j) v[j] = (*this)(i, j);
        return v;
    }

    std::vector<T> mul_vec(const std::vector<T>& x) const {
        assert(static_cast<int>(x.size()) == cols);
        std::vector<T> y(rows, T(0));
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                y[i] += (*this)(i, j) * x[j];
        return y;
    }

    bool is_symmetric() const {
        if (rows != cols) return false;
        for (int i = 0; i < rows; ++i)
            for (int j = i + 1; j < cols; ++j)
                if ((*this)(i, j) != (*this)(j, i)) return false;
        return true;
    }
};

using IntMat = Mat<Integer>;
using RatMat = Mat<Rational>;

inline RatMat to_rat(const IntMat& m) {
    RatMat r(m.rows, m.cols);
    for (size_t i = 0; i < m.a.size(); ++i) r.a[i] = Rational(m.a[i]);
    return r;
}

// Fraction-free Gaussian elimination (Bareiss). Exact over Z.
inline Integer det_bareiss(IntMat m) {
    assert(m.rows == m.cols);
    int n = m.rows;
    if (n == 0) return 1;
    Integer prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (m(k, k) == 0) {
            int s = -1;
            for (int i = k + 1; i < n; ++i)
                if (m(i, k) != 0) { s = i; break; }
            if (s < 0) return 0;
            for (int j = 0; j < n; ++j) std::swap(m(k, j), m(s, j));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j)
                m(i, j) = divexact(m(i, j) * m(k, k) - m(i, k) * m(k, j), prev);
        prev = m(k, k);
    }
    return sign > 0 ? m(n - 1, n - 1) : Integer(-m(n - 1, n - 1));
}

// Characteristic polynomial det(xI - A), monic, by the Berkowitz iteration.
// Division-free, so exact over Z.
inline IntPoly char_poly(const IntMat& A) {
    assert(A.rows == A.cols);
    int n = A.rows;
    if (n == 0) return IntPoly::constant(Integer(1));
    // coeffs[k] holds the degree-(r-k) coefficient after processing the r x r
    // leading principal submatrix; coeffs[0] = 1 is the leading term.
    std::vector<Integer> coeffs{Integer(1), -A(0, 0)};
    for (int r = 2; r <= n; ++r) {
        // v = [1, -a, -(R C), -(R S C), ..., -(R S^{r-2} C)]
        std::vector<Integer> v(r + 1);
        v[0] = 1;
        v[1] = -A(r - 1, r - 1);
        std::vector<Integer> u(r - 1);
        for (int i = 0; i < r - 1; ++i) u[i] = A(i, r - 1);
        for (int k = 2; k <= r; ++k) {
            Integer s = 0;
            for (int i = 0; i < r - 1; ++i) s += A(r - 1, i) * u[i];
            v[k] = -s;
            if (k < r) {
                std::vector<Integer> nu(r - 1, Integer(0));
                for (int i = 0; i < r - 1; ++i) {
                    for (int j = 0; j < r - 1; ++j) nu[i] += A(i, j) * u[j];
                }
                u = std::move(nu);
            }
        }
        std::vector<Integer> next(r + 1, Integer(0));
        for (int i = 0; i <= r; ++i)
            for (int j = 0; j < static_cast<int>(coeffs.size()) && i + j <= r; ++j)
                next[i + j] += v[i] * coeffs[j];
        coeffs = std::move(next);
    }
    // coeffs is ordered leading-first; Poly stores constant-first.
    std::vector<Integer> rev(coeffs.rbegin(), coeffs.rend());
    return IntPoly(std::move(rev));
}

// char_poly of a rational matrix: scale by the common denominator d, so
// p_A(x) = p_B(d x) / d^n with B = d A integral.
inline RatPoly char_poly(const RatMat& A) {
    assert(A.rows == A.cols);
    int n = A.rows;
    Integer d = 1;
    for (auto x : A.a) {
        x.canonicalize();
        d = lcm(d, x.get_den());
    }
    IntMat B(n, n);
    for (size_t i = 0; i < A.a.size(); ++i) {
        Rational s = A.a[i] * Rational(d);
        s.canonicalize();
        B.a[i] = s.get_num();
    }
    IntPoly pb = char_poly(B);
    RatPoly out;
    out.c.resize(n + 1);
    for (int k = 0; k <= n; ++k)
        out.c[k] = Rational(pb[k]) / Rational(powi(d, n - k));
    out.trim();
    return out;
}

// Row Hermite normal form. Rows of the input are treated as generators of a
// subgroup of Z^cols. Returns the unique full-row-rank HNF basis: pivots
// positive, strictly increasing pivot columns, entries above each pivot
// reduced into [0, pivot). Zero rows are dropped.
inline IntMat hnf(IntMat m) {
    int r = 0;
    for (int col = 0; col < m.cols && r < m.rows; ++col) {
        // Euclidean sweep: leave at most one nonzero in this column at/below r.
        for (;;) {
            int best = -1;
            for (int i = r; i < m.rows; ++i)
                if (m(i, col) != 0 &&
                    (best < 0 || abs(m(i, col)) < abs(m(best, col))))
                    best = i;
            if (best < 0) break;
            if (best != r)
                for (int j = 0; j < m.cols; ++j) std::swap(m(r, j), m(best, j));
            bool again = false;
            for (int i = r + 1; i < m.rows; ++i) {
                if (m(i, col) == 0) continue;
                Integer q;
                mpz_fdiv_q(q.get_mpz_t(), m(i, col).get_mpz_t(), m(r, col).get_mpz_t());
                for (int j = 0; j < m.cols; ++j) m(i, j) -= q * m(r, j);
                if (m(i, col) != 0) again = true;
            }
            if (!again) break;
        }
        if (m(r, col) == 0) continue;
        if (m(r, col) < 0)
            for (int j = 0; j < m.cols; ++j) m(r, j) = -m(r, j);
        for (int i = 0; i < r; ++i) {
            Integer q;
            mpz_fdiv_q(q.get_mpz_t(), m(i, col).get_mpz_t(), m(r, col).get_mpz_t());
            if (q != 0)
                for (int j = 0; j < m.cols; ++j) m(i, j) -= q * m(r, j);
        }
        ++r;
    }
    IntMat out(r, m.cols);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < m.cols; ++j) out(i, j) = m(i, j);
    return out;
}

// Reduced row echelon form over Q. Returns the pivot columns.
inline std::vector<int> rref(RatMat& m) {
    std::vector<int> pivots;
    int r = 0;
    for (int col = 0; col < m.cols && r < m.rows; ++col) {
        int p = -1;
        for (int i = r; i < m.rows; ++i)
            if (m(i, col) != 0) { p = i; break; }
        if (p < 0) continue;
        if (p != r)
            for (int j = 0; j < m.cols; ++j) std::swap(m(r, j), m(p, j));
        Rational inv = Rational(1) / m(r, col);
        for (int j = col; j < m.cols; ++j) m(r, j) *= inv;
        for (int i = 0; i < m.rows; ++i) {
            if (i == r || m(i, col) == 0) continue;
            Rational f = m(i, col);
            for (int j = col; j < m.cols; ++j) m(i, j) -= f * m(r, j);
        }
        pivots.push_back(col);
        ++r;
    }
    return pivots;
}

// Basis of { x : M x = 0 }, one row per free column of the RREF, in free
// column order, with the free variable set to 1. Deterministic.
inline RatMat rational_kernel(const RatMat& M) {
    RatMat R = M;
    std::vector<int> pivots = rref(R);
    std::vector<bool> is_pivot(M.cols, false);
    for (int c : pivots) is_pivot[c] = true;
    int dim = M.cols - static_cast<int>(pivots.size());
    RatMat K(dim, M.cols);
    int k = 0;
    for (int j = 0; j < M.cols; ++j) {
        if (is_pivot[j]) continue;
        K(k, j) = Rational(1);
        for (size_t i = 0; i < pivots.size(); ++i)
            K(k, pivots[i]) = -R(static_cast<int>(i), j);
        ++k;
    }
    return K;
}

inline RatMat rational_kernel(const IntMat& M) { return rational_kernel(to_rat(M)); }

// Scale a rational vector to a primitive integer vector whose first nonzero
// entry is positive.
inline std::vector<Integer> primitive_vector(const std::vector<Rational>& v) {
    Integer den = 1;
    for (auto x : v) {
        x.canonicalize();
        den = lcm(den, x.get_den());
    }
    std::vector<Integer> w(v.size());
    Integer g = 0;
    for (size_t i = 0; i < v.size(); ++i) {
        Rational s = v[i] * Rational(den);
        s.canonicalize();
        w[i] = s.get_num();
        g = gcd(g, w[i]);
    }
    if (g == 0) return w;
    for (auto& x : w) x = divexact(x, g);
    for (const auto& x : w) {
        if (x == 0) continue;
        if (x < 0)
            for (auto& y : w) y = -y;
        break;
    }
    return w;
}

// Solve M x = b over Q; empty when inconsistent.
inline std::optional<std::vector<Rational>> solve(const RatMat& M, const std::vector<Rational>& b) {
    assert(static_cast<int>(b.size()) == M.rows);
    RatMat aug(M.rows, M.cols + 1);
    for (int i = 0; i < M.rows; ++i) {
        for (int j = 0; j < M.cols; ++j) aug(i, j) = M(i, j);
        aug(i, M.cols) = b[i];
    }
    std::vector<int> pivots = rref(aug);
    if (!pivots.empty() && pivots.back() == M.cols) return std::nullopt;
    std::vector<Rational> x(M.cols, Rational(0));
    for (size_t i = 0; i < pivots.size(); ++i)
        x[pivots[i]] = aug(static_cast<int>(i), M.cols);
    return x;
}

inline std::optional<RatMat> inverse(const RatMat& M) {
    assert(M.rows == M.cols);
    int n = M.rows;
    RatMat aug(n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) aug(i, j) = M(i, j);
        aug(i, n + i) = Rational(1);
    }
    std::vector<int> pivots = rref(aug);
    if (static_cast<int>(pivots.size()) != n || pivots.back() != n - 1) return std::nullopt;
    RatMat inv(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
    return inv;
}

// Invariant factors d_1 | d_2 | ... of an integer matrix (nonzero ones only).
inline std::vector<Integer> smith_invariants(IntMat m) {
    int t = 0;
    int nmin = std::min(m.rows, m.cols);
    std::vector<Integer> out;
    while (t < nmin) {
        int bi = -1, bj = -1;
        for (int i = t; i < m.rows; ++i)
            for (int j = t; j < m.cols; ++j)
                if (m(i, j) != 0 &&
                    (bi < 0 || abs(m(i, j)) < abs(m(bi, bj)))) { bi = i; bj = j; }
        if (bi < 0) break;
        for (int j = 0; j < m.cols; ++j) std::swap(m(t, j), m(bi, j));
        for (int i = 0; i < m.rows; ++i) std::swap(m(i, t), m(i, bj));
        bool clean = true;
        for (int i = t + 1; i < m.rows; ++i) {
            if (m(i, t) == 0) continue;
            Integer q;
            mpz_fdiv_q(q.get_mpz_t(), m(i, t).get_mpz_t(), m(t, t).get_mpz_t());
            for (int j = 0; j < m.cols; ++j) m(i, j) -= q * m(t, j);
            if (m(i, t) != 0) clean = false;
        }
        for (int j = t + 1; j < m.cols; ++j) {
            if (m(t, j) == 0) continue;
            Integer q;
            mpz_fdiv_q(q.get_mpz_t(), m(t, j).get_mpz_t(), m(t, t).get_mpz_t());
            for (int i = 0; i < m.rows; ++i) m(i, j) -= q * m(i, t);
            if (m(t, j) != 0) clean = false;
        }
        if (!clean) continue;
        // pivot must divide every remaining entry; if not, fold that row in
        // and redo this step.
        bool divides = true;
        for (int i = t + 1; i < m.rows && divides; ++i)
            for (int j = t + 1; j < m.cols && divides; ++j)
                if (m(i, j) % m(t, t) != 0) {
                    for (int jj = 0; jj < m.cols; ++jj) m(t, jj) += m(i, jj);
                    divides = false;
                }
        if (!divides) continue;
        if (m(t, t) < 0) m(t, t) = -m(t, t);
        out.push_back(m(t, t));
        ++t;
    }
    return out;
}

} // namespace omf

#endif
