#ifndef OMF_POLY_HPP
#define OMF_POLY_HPP

// Dense univariate polynomials over an exact coefficient ring.
// Coefficient i is the coefficient of x^i; the zero polynomial has degree -1.

#include "omf/integer.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace omf {

template <class T>
class Poly {
public:
    std::vector<T> c;

    Poly() = default;
    explicit Poly(std::vector<T> coeffs) : c(std::move(coeffs)) { trim(); }
    static Poly constant(const T& v) { return Poly(std::vector<T>{v}); }

    // x^k
    static Poly monomial(int k, const T& coeff = T(1)) {
        std::vector<T> v(k + 1, T(0));
        v[k] = coeff;
        return Poly(std::move(v));
    }

    int degree() const { return static_cast<int>(c.size()) - 1; }
    bool is_zero() const { return c.empty(); }

    const T& operator[](int i) const {
        static const T zero = T(0);
        return (i >= 0 && i < static_cast<int>(c.size())) ? c[i] : zero;
    }

    T& coeff_ref(int i) {
        if (i >= static_cast<int>(c.size())) c.resize(i + 1, T(0));
        return c[i];
    }

    const T& leading() const {
        assert(!c.empty());
        return c.back();
    }

    void trim() {
        while (!c.empty() && c.back() == 0) c.pop_back();
    }

    bool operator==(const Poly& o) const { return c == o.c; }
    bool operator!=(const Poly& o) const { return c != o.c; }

    Poly operator-() const {
        Poly r = *this;
        for (auto& x : r.c) x = -x;
        return r;
    }

    Poly operator+(const Poly& o) const {
        Poly r;
        r.c.resize(std::max(c.size(), o.c.size()), T(0));
        for (size_t i = 0; i < c.size(); ++i) r.c[i] += c[i];
        for (size_t i = 0; i < o.c.size(); ++i) r.c[i] += o.c[i];
        r.trim();
        return r;
    }

    Poly operator-(const Poly& o) const { return *this + (-o); }

    Poly operator*(const Poly& o) const {
        if (is_zero() || o.is_zero()) return Poly();
        Poly r;
        r.c.assign(c.size() + o.c.size() - 1, T(0));
        for (size_t i = 0; i < c.size(); ++i)
            for (size_t j = 0; j < o.c.size(); ++j)
                r.c[i + j] += c[i] * o.c[j];
        r.trim();
        return r;
    }

    Poly operator*(const T& s) const {
        Poly r = *this;
        for (auto& x : r.c) x *= s;
        r.trim();
        return r;
    }

    T eval(const T& x) const {
        T acc(0);
        for (int i = degree(); i >= 0; --i) acc = acc * x + c[i];
        return acc;
    }

    Poly derivative() const {
        if (c.size() <= 1) return Poly();
        Poly r;
        r.c.resize(c.size() - 1);
        for (size_t i = 1; i < c.size(); ++i) r.c[i - 1] = c[i] * T(static_cast<long>(i));
        r.trim();
        return r;
    }

    std::string str(const std::string& var = "x") const {
        if (is_zero()) return "0";
        std::ostringstream os;
        bool first = true;
        for (int i = degree(); i >= 0; --i) {
            if ((*this)[i] == 0) continue;
            if (!first) os << " + ";
            os << "(" << (*this)[i] << ")";
            if (i >= 1) os << "*" << var;
            if (i >= 2) os << "^" << i;
            first = false;
        }
        return os.str();
    }
};

using IntPoly = Poly<Integer>;
using RatPoly = Poly<Rational>;

// Division with remainder; requires the leading coefficient of b to be
// invertible (T a field, or b monic over Z).
template <class T>
std::pair<Poly<T>, Poly<T>> poly_divmod(const Poly<T>& a, const Poly<T>& b) {
    assert(!b.is_zero());
    Poly<T> q, r = a;
    T lb = b.leading();
    while (!r.is_zero() && r.degree() >= b.degree()) {
        T f = r.leading() / lb;
        int shift = r.degree() - b.degree();
        q.coeff_ref(shift) += f;
        for (int i = 0; i <= b.degree(); ++i)
            r.coeff_ref(i + shift) -= f * b[i];
        r.trim();
    }
    q.trim();
    return {q, r};
}

template <class T>
Poly<T> poly_mod(const Poly<T>& a, const Poly<T>& b) {
    return poly_divmod(a, b).second;
}

inline RatPoly to_rat(const IntPoly& f) {
    RatPoly r;
    r.c.reserve(f.c.size());
    for (const auto& x : f.c) r.c.emplace_back(x);
    return r;
}

// Requires all denominators to be 1.
inline IntPoly to_int_exact(const RatPoly& f) {
    IntPoly r;
    r.c.reserve(f.c.size());
    for (auto x : f.c) {
        x.canonicalize();
        if (x.get_den() != 1)
            throw std::domain_error("to_int_exact: non-integral coefficient");
        r.c.push_back(x.get_num());
    }
    return r;
}

inline RatPoly make_monic(const RatPoly& f) {
    assert(!f.is_zero());
    Rational inv = Rational(1) / f.leading();
    return f * inv;
}

// Monic gcd over Q by the Euclidean algorithm. gcd(0,0) = 0.
inline RatPoly poly_gcd(RatPoly a, RatPoly b) {
    while (!b.is_zero()) {
        RatPoly r = poly_mod(a, b);
        a = b;
        b = r;
    }
    if (a.is_zero()) return a;
    return make_monic(a);
}

// gcd of the coefficients; sign chosen so content(f)*primitive(f) = f with
// primitive leading coefficient > 0. content(0) = 0.
inline Integer poly_content(const IntPoly& f) {
    Integer g = 0;
    for (const auto& x : f.c) g = gcd(g, x);
    if (g == 0) return 0;
    if (f.leading() < 0) g = -g;
    return g;
}

inline IntPoly primitive_part(const IntPoly& f) {
    if (f.is_zero()) return f;
    Integer ct = poly_content(f);
    IntPoly r;
    r.c.reserve(f.c.size());
    for (const auto& x : f.c) r.c.push_back(divexact(x, ct));
    return r;
}

// Clears denominators and takes the primitive part; the result generates the
// same ideal in Q[x].
inline IntPoly primitive_from_rat(const RatPoly& f) {
    if (f.is_zero()) return IntPoly();
    Integer den = 1;
    for (auto x : f.c) {
        x.canonicalize();
        den = lcm(den, x.get_den());
    }
    IntPoly r;
    r.c.reserve(f.c.size());
    for (auto x : f.c) {
        x.canonicalize();
        r.c.push_back(x.get_num() * divexact(den, x.get_den()));
    }
    return primitive_part(r);
}

// Squarefree decomposition (Yun). Returns {(g_i, e_i)} with f = c * prod
// g_i^{e_i}, the g_i squarefree, pairwise coprime, primitive with positive
// leading coefficient, and e_i strictly increasing. Constant factors are
// dropped.
inline std::vector<std::pair<IntPoly, int>> squarefree_decomposition(const IntPoly& f) {
    std::vector<std::pair<IntPoly, int>> out;
    if (f.degree() < 1) return out;
    RatPoly a = make_monic(to_rat(f));
    RatPoly d = a.derivative();
    RatPoly g = poly_gcd(a, d);
    RatPoly w = poly_divmod(a, g).first;
    RatPoly y = poly_divmod(d, g).first;
    RatPoly z = y - w.derivative();
    int e = 1;
    while (!(w.degree() == 0)) {
        RatPoly gi = poly_gcd(w, z);
        if (gi.degree() > 0) out.emplace_back(primitive_from_rat(gi), e);
        w = poly_divmod(w, gi).first;
        y = poly_divmod(z, gi).first;
        z = y - w.derivative();
        ++e;
    }
    return out;
}

} // namespace omf

#endif
