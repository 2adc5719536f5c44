#ifndef OMF_POLYFACTOR_HPP
#define OMF_POLYFACTOR_HPP

// Factorization in Z[x], big-prime variant: reduce mod a single prime larger
// than twice the Mignotte bound, factor mod p by distinct-degree plus
// deterministic equal-degree splitting, then recombine subsets with exact
// divisibility tests over Z. No Hensel lifting is needed at the degrees this
// library encounters (characteristic polynomials of class-number size).

#include "omf/matrix.hpp"

namespace omf {

namespace fpdetail {

// Polynomials mod p as coefficient vectors in [0,p), constant term first.
using FpPoly = std::vector<Integer>;

inline void trim(FpPoly& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

inline int deg(const FpPoly& f) { return static_cast<int>(f.size()) - 1; }

inline FpPoly from_int(const IntPoly& f, const Fp& F) {
    FpPoly r(f.c.size());
    for (size_t i = 0; i < f.c.size(); ++i) r[i] = F.reduce(f.c[i]);
    trim(r);
    return r;
}

inline FpPoly mul(const FpPoly& a, const FpPoly& b, const Fp& F) {
    if (a.empty() || b.empty()) return {};
    FpPoly r(a.size() + b.size() - 1, Integer(0));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] += a[i] * b[j];
    for (auto& x : r) x = F.reduce(x);
    trim(r);
    return r;
}

inline FpPoly scale(const FpPoly& a, const Integer& s, const Fp& F) {
    FpPoly r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = F.mul(a[i], s);
    trim(r);
    return r;
}

// Remainder of a by monic b.
inline FpPoly rem(FpPoly a, const FpPoly& b, const Fp& F) {
    assert(!b.empty() && b.back() == 1);
    trim(a);
    int db = deg(b);
    while (deg(a) >= db) {
        Integer f = a.back();
        int shift = deg(a) - db;
        if (f != 0)
            for (int i = 0; i <= db; ++i)
                a[i + shift] = F.sub(a[i + shift], F.mul(f, b[i]));
        a.pop_back();
        trim(a);
    }
    return a;
}

inline FpPoly make_monic(const FpPoly& a, const Fp& F) {
    assert(!a.empty());
    return scale(a, F.inv(a.back()), F);
}

inline FpPoly gcd(FpPoly a, FpPoly b, const Fp& F) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        FpPoly m = make_monic(b, F);
        FpPoly r = rem(a, m, F);
        a = std::move(m);
        b = std::move(r);
    }
    if (!a.empty()) a = make_monic(a, F);
    return a;
}

// base^e mod m, m monic.
inline FpPoly powmod(const FpPoly& base, const Integer& e, const FpPoly& m, const Fp& F) {
    FpPoly result{Integer(1)};
    FpPoly b = rem(base, m, F);
    long bits = mpz_sizeinbase(e.get_mpz_t(), 2);
    for (long i = bits - 1; i >= 0; --i) {
        result = rem(mul(result, result, F), m, F);
        if (mpz_tstbit(e.get_mpz_t(), i))
            result = rem(mul(result, b, F), m, F);
    }
    return result;
}

inline IntPoly lift_symmetric(const FpPoly& f, const Fp& F) {
    IntPoly r;
    r.c.resize(f.size());
    for (size_t i = 0; i < f.size(); ++i) r.c[i] = F.lift(f[i]);
    r.trim();
    return r;
}

// Distinct-degree decomposition of squarefree monic g: list of
// (product of irreducible factors of degree k, k).
inline std::vector<std::pair<FpPoly, int>> distinct_degree(FpPoly g, const Fp& F) {
    std::vector<std::pair<FpPoly, int>> out;
    FpPoly x{Integer(0), Integer(1)};
    FpPoly w = rem(x, g, F);
    int k = 0;
    while (deg(g) > 0) {
        ++k;
        if (2 * k > deg(g)) {
            out.emplace_back(g, deg(g));
            break;
        }
        w = powmod(w, F.p, g, F);
        FpPoly wx = w;
        // w - x
        if (wx.size() < 2) wx.resize(2, Integer(0));
        wx[1] = F.sub(wx[1], Integer(1));
        trim(wx);
        FpPoly c = gcd(wx, g, F);
        if (deg(c) > 0) {
            out.emplace_back(c, k);
            // divide g by c (both monic)
            FpPoly q;
            {
                FpPoly a = g;
                int dc = deg(c);
                q.assign(deg(g) - dc + 1, Integer(0));
                while (deg(a) >= dc) {
                    Integer f = a.back();
                    int shift = deg(a) - dc;
                    q[shift] = f;
                    for (int i = 0; i <= dc; ++i)
                        a[i + shift] = F.sub(a[i + shift], F.mul(f, c[i]));
                    a.pop_back();
                    trim(a);
                }
                assert(a.empty());
            }
            g = q;
            w = rem(w, g, F);
        }
    }
    return out;
}

// Split a monic squarefree product of degree-k irreducibles. Deterministic:
// sweeps shifts c = 0,1,2,... of the splitting polynomial.
inline void equal_degree(const FpPoly& h, int k, const Fp& F, std::vector<FpPoly>& out) {
    if (deg(h) == k) {
        out.push_back(h);
        return;
    }
    Integer e = (powi(F.p, k) - 1) / 2;
    FpPoly x{Integer(0), Integer(1)};
    for (long c = 0;; ++c) {
        if (c > 4096) throw std::runtime_error("equal_degree: splitting sweep exhausted");
        FpPoly base = x;
        base[0] = F.reduce(Integer(c));
        FpPoly t = powmod(base, e, h, F);
        if (t.empty()) continue;
        t[0] = F.sub(t[0], Integer(1));
        trim(t);
        FpPoly u = gcd(t, h, F);
        if (deg(u) <= 0 || deg(u) >= deg(h)) continue;
        FpPoly v;
        {
            FpPoly a = h;
            int du = deg(u);
            v.assign(deg(h) - du + 1, Integer(0));
            while (deg(a) >= du) {
                Integer f = a.back();
                int shift = deg(a) - du;
                v[shift] = f;
                for (int i = 0; i <= du; ++i)
                    a[i + shift] = F.sub(a[i + shift], F.mul(f, u[i]));
                a.pop_back();
                trim(a);
            }
            assert(a.empty());
        }
        equal_degree(u, k, F, out);
        equal_degree(v, k, F, out);
        return;
    }
}

} // namespace fpdetail

// Order used for reported factors: by degree, then by coefficients compared
// from the leading term down.
inline bool factor_order(const IntPoly& a, const IntPoly& b) {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    for (int i = a.degree(); i >= 0; --i)
        if (a[i] != b[i]) return a[i] < b[i];
    return false;
}

struct IntPolyFactors {
    Integer content;  // f = content * prod factors[i].first ^ factors[i].second
    std::vector<std::pair<IntPoly, int>> factors;
};

namespace fpdetail {

// Factor a primitive squarefree polynomial with positive leading coefficient,
// degree >= 1, into primitive irreducibles with positive leading coefficient.
inline std::vector<IntPoly> factor_squarefree(const IntPoly& g) {
    if (g.degree() == 1) return {g};

    // Prime exceeding twice the candidate coefficient bound: candidates are
    // lc(g) times a monic divisor mod p, and any true factor h of g obeys
    // |coeffs of (lc(g)/lc(h)) h| <= |lc(g)| 2^d ||g||_2.
    Integer norm2 = 0;
    for (const auto& ci : g.c) norm2 += ci * ci;
    Integer bound = 2 * abs(g.leading()) * (Integer(1) << g.degree()) * (isqrt(norm2) + 1);
    Integer p = next_prime(bound);
    for (;;) {
        if (g.leading() % p != 0) {
            Fp F(p);
            FpPoly gp = from_int(g, F);
            FpPoly gpd = from_int(g.derivative(), F);
            if (deg(gcd(gp, gpd, F)) == 0) break;
        }
        p = next_prime(p);
    }
    Fp F(p);

    FpPoly gm = make_monic(from_int(g, F), F);
    std::vector<FpPoly> modular;
    for (auto& [h, k] : distinct_degree(gm, F))
        equal_degree(h, k, F, modular);
    std::sort(modular.begin(), modular.end(), [&](const FpPoly& a, const FpPoly& b) {
        return factor_order(lift_symmetric(a, F), lift_symmetric(b, F));
    });

    std::vector<IntPoly> out;
    IntPoly remaining = g;
    std::vector<FpPoly> pool = std::move(modular);
    bool progress = true;
    while (progress && !pool.empty()) {
        progress = false;
        size_t t = pool.size();
        size_t smax = t / 2;
        for (size_t s = 1; s <= smax && !progress; ++s) {
            // lexicographic subsets of {0..t-1} of size s
            std::vector<size_t> idx(s);
            for (size_t i = 0; i < s; ++i) idx[i] = i;
            for (;;) {
                FpPoly cand{F.reduce(remaining.leading())};
                for (size_t i : idx) cand = mul(cand, pool[i], F);
                IntPoly H = primitive_part(lift_symmetric(cand, F));
                auto [q, r] = poly_divmod(to_rat(remaining), to_rat(H));
                if (r.is_zero()) {
                    out.push_back(H);
                    // Gauss: the cofactor of a primitive factor is primitive.
                    remaining = primitive_from_rat(q);
                    std::vector<FpPoly> np;
                    for (size_t i = 0, k2 = 0; i < pool.size(); ++i) {
                        if (k2 < idx.size() && idx[k2] == i) { ++k2; continue; }
                        np.push_back(pool[i]);
                    }
                    pool = std::move(np);
                    progress = true;
                    break;
                }
                // next subset
                long i = static_cast<long>(s) - 1;
                while (i >= 0 && idx[i] == t - s + i) --i;
                if (i < 0) break;
                ++idx[i];
                for (size_t j = i + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
            }
        }
        if (!progress) break;
    }
    if (remaining.degree() > 0) out.push_back(remaining);
    return out;
}

} // namespace fpdetail

inline IntPolyFactors factor_int_poly(const IntPoly& f) {
    if (f.is_zero()) throw std::invalid_argument("factor_int_poly: zero polynomial");
    IntPolyFactors out;
    out.content = f.degree() < 0 ? Integer(0) : poly_content(f);
    if (f.degree() < 1) {
        out.content = f[0];
        return out;
    }
    IntPoly g = primitive_part(f);
    for (auto& [sqf, e] : squarefree_decomposition(g))
        for (auto& irr : fpdetail::factor_squarefree(sqf))
            out.factors.emplace_back(irr, e);
    std::sort(out.factors.begin(), out.factors.end(),
              [](const auto& a, const auto& b) { return factor_order(a.first, b.first); });

    IntPoly check = IntPoly::constant(out.content);
    for (auto& [fac, e] : out.factors)
        for (int i = 0; i < e; ++i) check = check * fac;
    if (!(check == f)) throw std::logic_error("factor_int_poly: verification failed");
    return out;
}

inline bool is_irreducible(const IntPoly& f) {
    if (f.degree() < 1) return false;
    auto fac = factor_int_poly(f);
    return fac.factors.size() == 1 && fac.factors[0].second == 1 &&
           (fac.content == 1 || fac.content == -1);
}

// Monic irreducible factors over Q with multiplicity, sorted by the same
// order as factor_int_poly applied to a cleared-denominator version.
inline std::vector<std::pair<RatPoly, int>> factor_rat_poly(const RatPoly& f) {
    IntPoly g = primitive_from_rat(f);
    auto fac = factor_int_poly(g);
    std::vector<std::pair<RatPoly, int>> out;
    out.reserve(fac.factors.size());
    for (auto& [h, e] : fac.factors) out.emplace_back(make_monic(to_rat(h)), e);
    return out;
}

} // namespace omf

#endif
