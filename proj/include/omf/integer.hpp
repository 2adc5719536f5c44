#ifndef OMF_INTEGER_HPP
#define OMF_INTEGER_HPP

// Exact arithmetic primitives. All integer and rational arithmetic in this
// library goes through GMP; no floating point is used anywhere.

#include <gmpxx.h>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace omf {

using Integer = mpz_class;
using Rational = mpq_class;

inline Integer int_from(long v) { return Integer(v); }

// Kronecker symbol (a/n), full extension: n may be zero, negative or even.
inline int kronecker_symbol(const Integer& a, const Integer& n) {
    return mpz_kronecker(a.get_mpz_t(), n.get_mpz_t());
}

inline int kronecker_symbol(long a, long n) {
    return kronecker_symbol(Integer(a), Integer(n));
}

// p-adic valuation of n != 0.
inline long valuation(Integer n, const Integer& p) {
    if (n == 0) throw std::invalid_argument("valuation: n must be nonzero");
    long v = 0;
    Integer q, r;
    for (;;) {
        mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t());
        if (r != 0) return v;
        n = q;
        ++v;
    }
}

inline Integer divexact(const Integer& a, const Integer& b) {
    Integer q;
    mpz_divexact(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline Integer gcd(const Integer& a, const Integer& b) {
    Integer g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

inline Integer lcm(const Integer& a, const Integer& b) {
    Integer m;
    mpz_lcm(m.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return m;
}

// Floor of sqrt(n), n >= 0.
inline Integer isqrt(const Integer& n) {
    Integer r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

inline bool is_perfect_square(const Integer& n) {
    return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

inline Integer powi(Integer base, unsigned long e) {
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

inline Integer next_prime(const Integer& n) {
    Integer p;
    mpz_nextprime(p.get_mpz_t(), n.get_mpz_t());
    return p;
}

inline bool is_prime(const Integer& n) {
    return mpz_probab_prime_p(n.get_mpz_t(), 40) != 0;
}

// Smallest nonnegative residue.
inline Integer mod_floor(const Integer& a, const Integer& m) {
    Integer r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

// Arithmetic mod a fixed (usually large prime) modulus. Values are kept in
// [0, p). Used by the polynomial factorization routines.
struct Fp {
    Integer p;

    explicit Fp(Integer modulus) : p(std::move(modulus)) {}

    Integer reduce(const Integer& a) const { return mod_floor(a, p); }
    Integer add(const Integer& a, const Integer& b) const { return reduce(a + b); }
    Integer sub(const Integer& a, const Integer& b) const { return reduce(a - b); }
    Integer mul(const Integer& a, const Integer& b) const { return reduce(a * b); }

    Integer neg(const Integer& a) const {
        return a == 0 ? Integer(0) : Integer(p - a);
    }

    Integer inv(const Integer& a) const {
        Integer r;
        if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), p.get_mpz_t()) == 0)
            throw std::domain_error("Fp::inv: element not invertible");
        return r;
    }

    Integer pow(const Integer& a, const Integer& e) const {
        Integer r;
        mpz_powm(r.get_mpz_t(), a.get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
        return r;
    }

    // Symmetric representative in (-p/2, p/2].
    Integer lift(const Integer& a) const {
        Integer r = reduce(a);
        if (2 * r > p) r -= p;
        return r;
    }
};

// Prime factorization by trial division; fine for the discriminant-sized
// integers this library meets.
inline std::vector<std::pair<Integer, long>> factor_integer(Integer n) {
    if (n == 0) throw std::invalid_argument("factor_integer: n must be nonzero");
    std::vector<std::pair<Integer, long>> out;
    if (n < 0) n = -n;
    for (Integer p = 2; p * p <= n; p = (p == 2 ? Integer(3) : Integer(p + 2))) {
        if (n % p == 0) {
            long e = 0;
            while (n % p == 0) { n = divexact(n, p); ++e; }
            out.emplace_back(p, e);
        }
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

inline std::string to_string(const Integer& a) { return a.get_str(); }

// Rationals print as "num/den" with den omitted when 1; parse accepts both.
inline std::string to_string(const Rational& a) {
    Rational c = a;
    c.canonicalize();
    if (c.get_den() == 1) return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

inline Rational parse_rational(const std::string& s) {
    Rational r(s);
    r.canonicalize();
    return r;
}

} // namespace omf

#endif
