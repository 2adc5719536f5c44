#ifndef OMF_NEIGHBOUR_HPP
#define OMF_NEIGHBOUR_HPP

// Kneser p^k-neighbours. Isotropic subspaces of (L/pL, Q mod p) are
// enumerated in a fixed order (lines ascend by mixed-radix code, flags extend
// echelon bases), and each subspace lifts to an explicit neighbour lattice
// with the same rank and discriminant. Good primes p with p not dividing D
// are always supported; an odd p exactly dividing D is supported for k = 1 by
// skipping the one-dimensional radical of Q mod p.

#include "omf/isometry.hpp"
#include "omf/lattice.hpp"
#include "omf/lll.hpp"

#include <cstdint>
#include <functional>

namespace omf {

struct IsotropicSubspace {
    Integer p;
    int k = 1;
    std::vector<std::vector<Integer>> basis;  // entries in [0, p)
};

struct NeighbourLattice {
    Lattice lattice;
    Lattice parent;
    Integer p;
    int k = 1;
    IsotropicSubspace subspace;
    IntMat basis_num;  // rows/p are a basis of the neighbour in parent coords
};

namespace nbrdetail {

inline long mod_p(long v, long p) {
    long r = v % p;
    return r < 0 ? r + p : r;
}

inline long inv_mod_p(long v, long p) {
    Fp f{Integer(p)};
    return f.inv(Integer(v)).get_si();
}

// Reduced row echelon form over F_p; returns pivot columns. rows may shrink.
inline std::vector<int> rref_mod_p(std::vector<std::vector<long>>& rows, long p) {
    std::vector<int> pivots;
    size_t r = 0;
    size_t n = rows.empty() ? 0 : rows[0].size();
    for (size_t c = 0; c < n && r < rows.size(); ++c) {
        size_t sel = r;
        while (sel < rows.size() && mod_p(rows[sel][c], p) == 0) ++sel;
        if (sel == rows.size()) continue;
        std::swap(rows[r], rows[sel]);
        long inv = inv_mod_p(mod_p(rows[r][c], p), p);
        for (size_t j = 0; j < n; ++j) rows[r][j] = mod_p(rows[r][j] * inv, p);
        for (size_t i = 0; i < rows.size(); ++i) {
            if (i == r) continue;
            long f = mod_p(rows[i][c], p);
            if (f == 0) continue;
            for (size_t j = 0; j < n; ++j) rows[i][j] = mod_p(rows[i][j] - f * rows[r][j], p);
        }
        pivots.push_back(static_cast<int>(c));
        ++r;
    }
    rows.resize(r);
    return pivots;
}

// One solution of R z = rhs over F_p; the system must be consistent.
inline std::vector<long> solve_mod_p(std::vector<std::vector<long>> rows,
                                     std::vector<long> rhs, long p) {
    size_t n = rows.empty() ? 0 : rows[0].size();
    for (size_t i = 0; i < rows.size(); ++i) rows[i].push_back(mod_p(rhs[i], p));
    auto pivots = rref_mod_p(rows, p);
    std::vector<long> z(n, 0);
    for (size_t i = 0; i < pivots.size(); ++i) {
        if (pivots[i] == static_cast<int>(n))
            throw std::logic_error("solve_mod_p: inconsistent system");
        z[pivots[i]] = rows[i][n];
    }
    return z;
}

// Basis of the kernel of R over F_p.
inline std::vector<std::vector<long>> kernel_mod_p(std::vector<std::vector<long>> rows, long p) {
    size_t n = rows.empty() ? 0 : rows[0].size();
    auto pivots = rref_mod_p(rows, p);
    std::vector<char> is_pivot(n, 0);
    for (int c : pivots) is_pivot[c] = 1;
    std::vector<std::vector<long>> ker;
    for (size_t f = 0; f < n; ++f) {
        if (is_pivot[f]) continue;
        std::vector<long> v(n, 0);
        v[f] = 1;
        for (size_t i = 0; i < pivots.size(); ++i)
            v[pivots[i]] = mod_p(-rows[i][f], p);
        ker.push_back(std::move(v));
    }
    return ker;
}

struct QModP {
    int n;
    long p;
    std::vector<long> gram;  // n*n reduced mod p
    std::vector<long> qdiag; // Q(e_i) mod p

    long q(const std::vector<long>& x) const {
        long acc = 0;
        for (int i = 0; i < n; ++i) {
            if (x[i] == 0) continue;
            acc = (acc + qdiag[i] * x[i] % p * x[i]) % p;
            for (int j = i + 1; j < n; ++j)
                if (x[j] != 0) acc = (acc + gram[static_cast<size_t>(i) * n + j] * x[i] % p * x[j]) % p;
        }
        return mod_p(acc, p);
    }
    // B(x, .) as a row vector mod p
    std::vector<long> b_row(const std::vector<long>& x) const {
        std::vector<long> r(n, 0);
        for (int i = 0; i < n; ++i) {
            long acc = 0;
            for (int j = 0; j < n; ++j)
                if (x[j] != 0) acc = (acc + gram[static_cast<size_t>(i) * n + j] * x[j]) % p;
            r[i] = mod_p(acc, p);
        }
        return r;
    }
};

inline QModP make_qmodp(const Lattice& L, long p) {
    QModP q;
    q.n = L.rank();
    q.p = p;
    q.gram.resize(static_cast<size_t>(q.n) * q.n);
    q.qdiag.resize(q.n);
    for (int i = 0; i < q.n; ++i) {
        for (int j = 0; j < q.n; ++j)
            q.gram[static_cast<size_t>(i) * q.n + j] = mod_p(L.gram(i, j).get_si() % p, p);
        q.qdiag[i] = mod_p(Integer(L.gram(i, i) / 2).get_si() % p, p);
    }
    return q;
}

inline void check_neighbour_prime(const Lattice& L, const Integer& p, int k) {
    if (!is_prime(p)) throw ValidationError("neighbour prime must be prime");
    int n = L.rank();
    if (k < 1 || k > n / 2) throw ValidationError("neighbour depth k out of range");
    Integer D = discriminant(L);
    if (D % p == 0) {
        if (p == 2) throw ValidationError("bad prime: 2 divides the discriminant");
        if (valuation(D, p) >= 2)
            throw ValidationError("bad prime: p^2 divides the discriminant");
        if (k != 1)
            throw ValidationError("bad prime: k >= 2 needs p not dividing the discriminant");
    }
}

} // namespace nbrdetail

// Normalized isotropic lines mod p: first nonzero coordinate 1, listed in
// ascending mixed-radix code sum x_i p^{n-1-i}. When p divides D (odd p, p
// exactly dividing), lines inside the radical of Q mod p are excluded.
struct IsotropicLineSet {
    Integer p;
    int n = 0;
    std::vector<uint8_t> flat;               // count*n coordinate bytes
    std::vector<unsigned long long> codes;   // ascending, parallel to lines

    size_t count() const { return codes.size(); }
    std::vector<long> line(size_t i) const {
        std::vector<long> x(n);
        for (int j = 0; j < n; ++j) x[j] = flat[i * n + j];
        return x;
    }
    std::optional<size_t> find_code(unsigned long long c) const {
        auto it = std::lower_bound(codes.begin(), codes.end(), c);
        if (it == codes.end() || *it != c) return std::nullopt;
        return static_cast<size_t>(it - codes.begin());
    }
};

inline unsigned long long line_code(const std::vector<long>& x, long p) {
    unsigned long long c = 0;
    for (long v : x) c = c * static_cast<unsigned long long>(p) + static_cast<unsigned long long>(v);
    return c;
}

// Scale x mod p so that its first nonzero coordinate is 1.
inline void normalize_line(std::vector<long>& x, long p) {
    for (long v : x)
        if (v % p != 0) {
            long inv = nbrdetail::inv_mod_p(nbrdetail::mod_p(v, p), p);
            for (auto& e : x) e = nbrdetail::mod_p(e * inv, p);
            return;
        }
    throw std::logic_error("normalize_line: zero vector");
}

inline IsotropicLineSet isotropic_line_set(const Lattice& L, const Integer& p) {
    nbrdetail::check_neighbour_prime(L, p, 1);
    int n = L.rank();
    long pl = p.get_si();
    auto q = nbrdetail::make_qmodp(L, pl);
    bool bad = (discriminant(L) % p == 0);

    IsotropicLineSet out;
    out.p = p;
    out.n = n;
    std::vector<long> x(n, 0);
    // leading index descending keeps codes strictly ascending
    for (int lead = n - 1; lead >= 0; --lead) {
        std::fill(x.begin(), x.end(), 0);
        x[lead] = 1;
        for (;;) {
            if (q.q(x) == 0) {
                bool keep = true;
                if (bad) {
                    auto row = q.b_row(x);
                    bool zero = true;
                    for (long v : row)
                        if (v != 0) { zero = false; break; }
                    if (zero) keep = false;  // radical line: no same-genus neighbour
                }
                if (keep) {
                    for (int j = 0; j < n; ++j) out.flat.push_back(static_cast<uint8_t>(x[j]));
                    out.codes.push_back(line_code(x, pl));
                }
            }
            int t = n - 1;
            while (t > lead) {
                if (++x[t] < pl) break;
                x[t] = 0;
                --t;
            }
            if (t == lead) break;
        }
    }
    assert(std::is_sorted(out.codes.begin(), out.codes.end()));
    return out;
}

// All totally isotropic k-dimensional subspaces of L/pL, each given by its
// reduced echelon basis (unit pivot columns, pivots ascending), enumerated in
// lexicographic order of (pivot set, free entries).
inline std::vector<IsotropicSubspace> isotropic_subspaces(const Lattice& L, const Integer& p,
                                                          int k) {
    nbrdetail::check_neighbour_prime(L, p, k);
    int n = L.rank();
    long pl = p.get_si();

    std::vector<IsotropicSubspace> out;
    if (k == 1) {
        // delegate so that order matches the line set and the radical filter
        // for p dividing D applies
        auto ls = isotropic_line_set(L, p);
        for (size_t i = 0; i < ls.count(); ++i) {
            IsotropicSubspace s;
            s.p = p;
            s.k = 1;
            auto x = ls.line(i);
            std::vector<Integer> row(n);
            for (int j = 0; j < n; ++j) row[j] = x[j];
            s.basis.push_back(std::move(row));
            out.push_back(std::move(s));
        }
        return out;
    }

    auto q = nbrdetail::make_qmodp(L, pl);
    std::vector<std::vector<long>> basis;

    // extend an echelon basis with strictly increasing pivots; standard flag
    // recursion over candidate next rows in lexicographic order
    std::function<void(int)> rec = [&](int depth) {
        if (depth == k) {
            IsotropicSubspace s;
            s.p = p;
            s.k = k;
            for (const auto& b : basis) {
                std::vector<Integer> row(n);
                for (int j = 0; j < n; ++j) row[j] = b[j];
                s.basis.push_back(std::move(row));
            }
            out.push_back(std::move(s));
            return;
        }
        int min_pivot = 0;
        if (!basis.empty()) {
            for (int j = 0; j < n; ++j)
                if (basis.back()[j] != 0) { min_pivot = j + 1; break; }
        }
        std::vector<long> x(n, 0);
        for (int lead = min_pivot; lead <= n - (k - depth); ++lead) {
            // reduced echelon form is the unique representative: earlier rows
            // must vanish at the new pivot column
            bool reduced = true;
            for (const auto& b : basis)
                if (b[lead] != 0) { reduced = false; break; }
            if (!reduced) continue;
            // echelon shape: zero at earlier pivots, 1 at lead
            std::fill(x.begin(), x.end(), 0);
            x[lead] = 1;
            // free positions: > lead and not an earlier pivot column
            std::vector<int> free_pos;
            for (int j = lead + 1; j < n; ++j) {
                bool is_piv = false;
                for (const auto& b : basis) {
                    int bp = 0;
                    while (b[bp] == 0) ++bp;
                    if (bp == j) { is_piv = true; break; }
                }
                if (!is_piv) free_pos.push_back(j);
            }
            std::vector<long> digits(free_pos.size(), 0);
            for (;;) {
                for (size_t t = 0; t < free_pos.size(); ++t) x[free_pos[t]] = digits[t];
                bool ok = (q.q(x) == 0);
                if (ok) {
                    auto row = q.b_row(x);
                    for (const auto& b : basis) {
                        long acc = 0;
                        for (int j = 0; j < n; ++j)
                            if (b[j] != 0) acc = (acc + row[j] * b[j]) % pl;
                        if (nbrdetail::mod_p(acc, pl) != 0) { ok = false; break; }
                    }
                }
                if (ok) {
                    basis.push_back(x);
                    rec(depth + 1);
                    basis.pop_back();
                }
                int t = static_cast<int>(digits.size()) - 1;
                while (t >= 0) {
                    if (++digits[t] < pl) break;
                    digits[t] = 0;
                    --t;
                }
                if (t < 0) break;
            }
        }
    };
    rec(0);
    return out;
}

namespace nbrdetail {

// Particular adjustment of the subspace basis mod p^2: Q(u_i) and all
// B(u_i, u_j) must vanish mod p^2 for the scaled vectors u_i/p to generate
// an even lattice.
inline std::vector<std::vector<Integer>> adjust_basis(const Lattice& L,
                                                      const IsotropicSubspace& S) {
    int n = L.rank();
    int k = S.k;
    Integer p = S.p;
    long pl = p.get_si();
    auto q = make_qmodp(L, pl);

    std::vector<std::vector<Integer>> us;
    for (const auto& b : S.basis) us.push_back(b);
    for (int i = 0; i < k; ++i) {
        std::vector<std::vector<long>> rows;
        std::vector<long> rhs;
        std::vector<long> xi(n);
        for (int j = 0; j < n; ++j) xi[j] = us[i][j].get_si() % pl;
        rows.push_back(q.b_row(xi));
        Integer qi = L.norm(us[i]);
        assert(qi % p == 0);
        rhs.push_back(mod_p(Integer(-(qi / p)).get_si() % pl, pl));
        for (int j = 0; j < i; ++j) {
            std::vector<long> xj(n);
            for (int c = 0; c < n; ++c) xj[c] = us[j][c].get_si() % pl;
            rows.push_back(q.b_row(xj));
            Integer bij = L.inner(us[j], us[i]);
            assert(bij % p == 0);
            rhs.push_back(mod_p(Integer(-(bij / p)).get_si() % pl, pl));
        }
        auto z = solve_mod_p(rows, rhs, pl);
        for (int c = 0; c < n; ++c) us[i][c] += p * z[c];
    }
    Integer p2 = p * p;
    for (int i = 0; i < k; ++i) {
        assert(L.norm(us[i]) % p2 == 0);
        for (int j = 0; j < i; ++j) assert(L.inner(us[i], us[j]) % p2 == 0);
    }
    return us;
}

inline NeighbourLattice build_neighbour(const Lattice& L, const IsotropicSubspace& S,
                                        const std::vector<std::vector<Integer>>& us) {
    int n = L.rank();
    int k = S.k;
    Integer p = S.p;
    long pl = p.get_si();
    Integer p2 = p * p;
    auto q = make_qmodp(L, pl);

    // Sub = {y : B(u_i, y) = 0 mod p}; basis from the mod-p kernel plus p Z^n
    std::vector<std::vector<long>> rows;
    for (int i = 0; i < k; ++i) {
        std::vector<long> xi(n);
        for (int j = 0; j < n; ++j) xi[j] = us[i][j].get_si() % pl;
        rows.push_back(q.b_row(xi));
    }
    auto ker = kernel_mod_p(rows, pl);
    assert(static_cast<int>(ker.size()) == n - k);
    IntMat stack(n + static_cast<int>(ker.size()), n);
    for (int i = 0; i < n; ++i) stack(i, i) = p;
    for (size_t i = 0; i < ker.size(); ++i)
        for (int j = 0; j < n; ++j) stack(n + static_cast<int>(i), j) = ker[i][j];
    IntMat sub = hnf(stack);
    assert(sub.rows == n);

    // p*Pi is generated by p*Sub and the adjusted vectors u_i
    IntMat stack2(n + k, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) stack2(i, j) = p * sub(i, j);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) stack2(n + i, j) = us[i][j];
    IntMat H = hnf(stack2);
    assert(H.rows == n);

    IntMat scaled = H * L.gram * H.transpose();
    IntMat gram(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            assert(scaled(i, j) % p2 == 0);
            gram(i, j) = scaled(i, j) / p2;
        }
    Lattice nb = new_lattice(gram);
    assert(discriminant(nb) == discriminant(L));

    // index conditions: [L : L cap Pi] = p^k = [Pi : L cap Pi]
    Integer idx = 1;
    for (int i = 0; i < n; ++i) idx *= sub(i, i);
    assert(idx == powi(p, k));

    NeighbourLattice out;
    out.lattice = std::move(nb);
    out.parent = L;
    out.p = p;
    out.k = k;
    out.subspace = S;
    out.basis_num = std::move(H);
    return out;
}

} // namespace nbrdetail

inline NeighbourLattice kneser_lift(const Lattice& L, const IsotropicSubspace& S) {
    return nbrdetail::build_neighbour(L, S, nbrdetail::adjust_basis(L, S));
}

// All p^k-neighbours whose intersection data reduces to the subspace S. The
// mod-p^2 adjustment of a basis is unique only up to an alternating k x k
// matrix over F_p, and distinct choices give distinct neighbour lattices, so
// S carries p^{k(k-1)/2} of them; kneser_lift returns the one with matrix 0.
inline std::vector<NeighbourLattice> kneser_lifts(const Lattice& L, const IsotropicSubspace& S) {
    auto us = nbrdetail::adjust_basis(L, S);
    int k = S.k;
    if (k == 1) return {nbrdetail::build_neighbour(L, S, us)};

    int n = L.rank();
    Integer p = S.p;
    long pl = p.get_si();
    long fib = 1;
    for (int i = 0; i < k * (k - 1) / 2; ++i) {
        fib *= pl;
        if (fib > 1000000) throw ResourceError("kneser_lifts: neighbour fiber too large");
    }
    auto q = nbrdetail::make_qmodp(L, pl);

    // dual vectors: B(v_t, u_j) = delta_tj mod p (solvable since p does not
    // divide the discriminant and the u_j stay independent mod p)
    std::vector<std::vector<long>> rows;
    for (int i = 0; i < k; ++i) {
        std::vector<long> xi(n);
        for (int j = 0; j < n; ++j) xi[j] = us[i][j].get_si() % pl;
        rows.push_back(q.b_row(xi));
    }
    std::vector<std::vector<long>> duals;
    for (int t = 0; t < k; ++t) {
        std::vector<long> rhs(k, 0);
        rhs[t] = 1;
        duals.push_back(nbrdetail::solve_mod_p(rows, rhs, pl));
    }

    std::vector<NeighbourLattice> out;
    out.reserve(static_cast<size_t>(fib));
    std::vector<long> beta(static_cast<size_t>(k * (k - 1) / 2), 0);  // entries above the diagonal
    for (;;) {
        auto ub = us;
        size_t t = 0;
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j, ++t) {
                long bij = beta[t];
                if (bij == 0) continue;
                long bji = (pl - bij) % pl;
                for (int c = 0; c < n; ++c) {
                    ub[i][c] += p * Integer(bij * duals[j][c]);
                    ub[j][c] += p * Integer(bji * duals[i][c]);
                }
            }
        out.push_back(nbrdetail::build_neighbour(L, S, ub));
        size_t d = 0;
        while (d < beta.size()) {
            if (++beta[d] < pl) break;
            beta[d] = 0;
            ++d;
        }
        if (d == beta.size()) break;
    }
    assert(static_cast<long>(out.size()) == fib);
    return out;
}

inline std::vector<NeighbourLattice> neighbours(const Lattice& L, const Integer& p, int k) {
    std::vector<NeighbourLattice> out;
    for (const auto& s : isotropic_subspaces(L, p, k))
        for (auto& nb : kneser_lifts(L, s)) out.push_back(std::move(nb));
    return out;
}

// N_{p,1} = sum_{i=0}^{n-2} p^i + chi_{D*}(p) p^{n/2-1} with D* = (-1)^{n/2} D.
inline Integer neighbour_count_k1(int n, const Integer& D, const Integer& p) {
    if (n % 2 != 0) throw ValidationError("neighbour count needs even rank");
    if (D % p == 0) throw ValidationError("bad prime: p divides the discriminant");
    Integer sum = 0;
    for (int i = 0; i <= n - 2; ++i) sum += powi(p, i);
    Integer dstar = (n / 2) % 2 == 0 ? D : -D;
    return sum + kronecker_symbol(dstar, p) * powi(p, n / 2 - 1);
}

} // namespace omf

#endif
