#include <catch2/catch_amalgamated.hpp>

#include "omf/polyfactor.hpp"

#include <random>

using namespace omf;

namespace {

IntPoly P(std::vector<long> coeffs) {
    std::vector<Integer> c;
    c.reserve(coeffs.size());
    for (long v : coeffs) c.emplace_back(v);
    return IntPoly(std::move(c));
}

IntMat M(int r, int c, std::vector<long> entries) {
    std::vector<Integer> e;
    e.reserve(entries.size());
    for (long v : entries) e.emplace_back(v);
    return IntMat(r, c, std::move(e));
}

// Legendre symbol by Euler's criterion, p an odd prime.
int legendre_ref(long a, long p) {
    a %= p;
    if (a < 0) a += p;
    if (a == 0) return 0;
    long e = (p - 1) / 2, r = 1, b = a;
    while (e) {
        if (e & 1) r = r * b % p;
        b = b * b % p;
        e >>= 1;
    }
    return r == 1 ? 1 : -1;
}

// Kronecker symbol from its defining multiplicative extension.
int kronecker_ref(long a, long n) {
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    int s = 1;
    if (n < 0) {
        n = -n;
        if (a < 0) s = -s;
    }
    int k2 = 0;
    while (n % 2 == 0) {
        n /= 2;
        ++k2;
    }
    if (k2) {
        if (a % 2 == 0) return 0;
        long am = ((a % 8) + 8) % 8;
        if (k2 % 2 == 1 && (am == 3 || am == 5)) s = -s;
    }
    for (long p = 3; p * p <= n; p += 2) {
        while (n % p == 0) {
            n /= p;
            int l = legendre_ref(a, p);
            if (l == 0) return 0;
            if (l < 0) s = -s;
        }
    }
    if (n > 1) {
        int l = legendre_ref(a, n);
        if (l == 0) return 0;
        if (l < 0) s = -s;
    }
    return s;
}

IntMat companion(const IntPoly& f) {
    int n = f.degree();
    IntMat C(n, n);
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1;
    for (int i = 0; i < n; ++i) C(i, n - 1) = -f[i];
    return C;
}

IntMat random_mat(std::mt19937_64& rng, int n, long lo, long hi) {
    std::uniform_int_distribution<long> d(lo, hi);
    IntMat A(n, n);
    for (auto& x : A.a) x = d(rng);
    return A;
}

} // namespace

TEST_CASE("kronecker symbol matches an Euler-criterion reference") {
    for (long a = -120; a <= 120; ++a)
        for (long n = -120; n <= 120; ++n)
            REQUIRE(kronecker_symbol(a, n) == kronecker_ref(a, n));
}

TEST_CASE("kronecker symbol on character values used elsewhere") {
    CHECK(kronecker_symbol(1369, 2) == 1);   // square discriminant, trivial character
    CHECK(kronecker_symbol(1369, 37) == 0);
    CHECK(kronecker_symbol(-39, 2) == 1);
    CHECK(kronecker_symbol(-39, 5) == 1);
    CHECK(kronecker_symbol(-39, 7) == -1);
    CHECK(kronecker_symbol(-4, 3) == -1);
    CHECK(kronecker_symbol(-4, 5) == 1);
    CHECK(kronecker_symbol(-3, 7) == 1);
    CHECK(kronecker_symbol(16, 3) == 1);
}

TEST_CASE("integer helpers") {
    CHECK(valuation(Integer(48), 2) == 4);
    CHECK(valuation(Integer(48), 3) == 1);
    CHECK(valuation(Integer(-8), 2) == 3);
    CHECK_THROWS(valuation(Integer(0), 2));
    CHECK(divexact(Integer(91), Integer(7)) == 13);
    CHECK(isqrt(Integer(99)) == 9);
    CHECK(isqrt(Integer(100)) == 10);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long> d(0, 1000000);
    for (int i = 0; i < 200; ++i) {
        Integer n = d(rng);
        Integer r = isqrt(n);
        CHECK(r * r <= n);
        CHECK((r + 1) * (r + 1) > n);
    }
    auto f = factor_integer(Integer(1369));
    REQUIRE(f.size() == 1);
    CHECK(f[0].first == 37);
    CHECK(f[0].second == 2);
    CHECK(to_string(Rational(3, 6)) == "1/2");
    CHECK(to_string(Rational(-4, 2)) == "-2");
    CHECK(parse_rational("22/7") == Rational(22, 7));
}

TEST_CASE("Fp context arithmetic") {
    Fp F(Integer(10007));
    for (long a = 1; a < 60; ++a) {
        Integer inv = F.inv(a);
        CHECK(F.mul(a, inv) == 1);
    }
    CHECK(F.pow(3, 10006) == 1);
    CHECK(F.lift(Integer(10006)) == -1);
    CHECK(F.lift(Integer(5003)) == 5003);
    CHECK(F.lift(Integer(5004)) == -5003);
}

TEST_CASE("characteristic polynomial of a 2x2 neighbour-count style matrix") {
    IntMat A = M(2, 2, {20025, 18225, 12870, 14670});
    IntPoly p = char_poly(A);
    CHECK(p == P({59211000, -34695, 1}));
    auto fac = factor_int_poly(p);
    REQUIRE(fac.factors.size() == 2);
    CHECK(fac.content == 1);
    CHECK(fac.factors[0].first == P({-32895, 1}));
    CHECK(fac.factors[1].first == P({-1800, 1}));
}

TEST_CASE("characteristic polynomial of a companion matrix recovers the polynomial") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long> d(-9, 9);
    for (int t = 0; t < 100; ++t) {
        int n = 1 + static_cast<int>(t % 6);
        std::vector<long> c(n + 1);
        for (int i = 0; i < n; ++i) c[i] = d(rng);
        c[n] = 1;
        IntPoly f = P(c);
        CHECK(char_poly(companion(f)) == f);
    }
}

TEST_CASE("Cayley-Hamilton holds for random integer matrices") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 25; ++t) {
        int n = 2 + t % 3;
        IntMat A = random_mat(rng, n, -9, 9);
        IntPoly p = char_poly(A);
        IntMat acc(n, n);
        IntMat pw = IntMat::identity(n);
        for (int i = 0; i <= p.degree(); ++i) {
            acc = acc + pw * p[i];
            pw = pw * A;
        }
        CHECK(acc == IntMat(n, n));
    }
}

TEST_CASE("Bareiss determinant agrees with the characteristic polynomial") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 40; ++t) {
        int n = 1 + t % 5;
        IntMat A = random_mat(rng, n, -6, 6);
        IntPoly p = char_poly(A);
        Integer det = det_bareiss(A);
        Integer sign = (n % 2 == 0) ? 1 : -1;
        CHECK(det == sign * p[0]);
    }
    // multiplicativity
    for (int t = 0; t < 20; ++t) {
        IntMat A = random_mat(rng, 4, -5, 5);
        IntMat B = random_mat(rng, 4, -5, 5);
        CHECK(det_bareiss(A * B) == det_bareiss(A) * det_bareiss(B));
    }
    CHECK(det_bareiss(M(2, 2, {2, 4, 1, 2})) == 0);
    CHECK(det_bareiss(IntMat::identity(6)) == 1);
}

TEST_CASE("row Hermite normal form") {
    IntMat A = M(3, 2, {2, 0, 0, 2, 1, 1});
    IntMat H = hnf(A);
    CHECK(H == M(2, 2, {1, 1, 0, 2}));
    CHECK(hnf(H) == H);

    std::mt19937_64 rng(19);
    std::uniform_int_distribution<long> d(-8, 8);
    for (int t = 0; t < 30; ++t) {
        IntMat B = random_mat(rng, 4, -8, 8);
        if (det_bareiss(B) == 0) continue;
        IntMat HB = hnf(B);
        REQUIRE(HB.rows == 4);
        // pivot product equals |det|
        Integer prod = 1;
        for (int i = 0; i < 4; ++i) prod *= HB(i, i);
        CHECK(prod == abs(det_bareiss(B)));
        // invariance under row operations
        IntMat B2 = B;
        for (int j = 0; j < 4; ++j) std::swap(B2(0, j), B2(2, j));
        for (int j = 0; j < 4; ++j) B2(1, j) += 3 * B2(3, j);
        CHECK(hnf(B2) == HB);
        CHECK(hnf(HB) == HB);
    }
}

TEST_CASE("rational kernel basis") {
    IntMat A = M(2, 3, {1, 2, 3, 2, 4, 6});
    RatMat K = rational_kernel(A);
    REQUIRE(K.rows == 2);
    CHECK(K.row(0) == std::vector<Rational>{Rational(-2), Rational(1), Rational(0)});
    CHECK(K.row(1) == std::vector<Rational>{Rational(-3), Rational(0), Rational(1)});

    std::mt19937_64 rng(23);
    std::uniform_int_distribution<long> d(-4, 4);
    for (int t = 0; t < 30; ++t) {
        IntMat B(3, 6);
        for (auto& x : B.a) x = d(rng);
        RatMat K2 = rational_kernel(B);
        RatMat R = to_rat(B);
        int rank = static_cast<int>(rref(R).size());
        CHECK(K2.rows == 6 - rank);
        RatMat Bk = to_rat(B);
        for (int i = 0; i < K2.rows; ++i) {
            auto y = Bk.mul_vec(K2.row(i));
            for (auto& v : y) CHECK(v == 0);
        }
    }
}

TEST_CASE("primitive vector normalization") {
    std::vector<Rational> v{Rational(2, 3), Rational(-4, 3), Rational(0)};
    CHECK(primitive_vector(v) == std::vector<Integer>{1, -2, 0});
    std::vector<Rational> w{Rational(-1, 2), Rational(1, 4)};
    CHECK(primitive_vector(w) == std::vector<Integer>{2, -1});
    std::vector<Rational> z{Rational(0), Rational(0)};
    CHECK(primitive_vector(z) == std::vector<Integer>{0, 0});
}

TEST_CASE("solve and inverse over Q") {
    std::mt19937_64 rng(29);
    for (int t = 0; t < 20; ++t) {
        IntMat A = random_mat(rng, 4, -6, 6);
        if (det_bareiss(A) == 0) continue;
        RatMat Aq = to_rat(A);
        auto inv = inverse(Aq);
        REQUIRE(inv.has_value());
        CHECK((Aq * *inv) == to_rat(IntMat::identity(4)));
        std::vector<Rational> b{Rational(1), Rational(-2), Rational(3, 2), Rational(0)};
        auto x = solve(Aq, b);
        REQUIRE(x.has_value());
        auto y = Aq.mul_vec(*x);
        CHECK(y == b);
    }
    // inconsistent system
    RatMat S = to_rat(M(2, 2, {1, 1, 2, 2}));
    auto bad = solve(S, {Rational(0), Rational(1)});
    CHECK(!bad.has_value());
}

TEST_CASE("Smith invariant factors") {
    CHECK(smith_invariants(M(2, 2, {4, 0, 0, 6})) == std::vector<Integer>{2, 12});
    CHECK(smith_invariants(M(2, 2, {2, 1, 1, 2})) == std::vector<Integer>{1, 3});
    CHECK(smith_invariants(M(2, 2, {0, 0, 0, 0})).empty());
    std::mt19937_64 rng(31);
    for (int t = 0; t < 20; ++t) {
        IntMat A = random_mat(rng, 3, -9, 9);
        auto s = smith_invariants(A);
        // divisibility chain
        for (size_t i = 1; i < s.size(); ++i) CHECK(s[i] % s[i - 1] == 0);
        // invariance under elementary row/column operations
        IntMat B = A;
        for (int j = 0; j < 3; ++j) B(0, j) += 2 * B(1, j);
        for (int i = 0; i < 3; ++i) B(i, 2) -= 5 * B(i, 0);
        CHECK(smith_invariants(B) == s);
        if (det_bareiss(A) != 0) {
            Integer prod = 1;
            for (auto& d : s) prod *= d;
            CHECK(prod == abs(det_bareiss(A)));
        }
    }
}

TEST_CASE("polynomial gcd and squarefree decomposition") {
    RatPoly a = to_rat(P({-1, 0, 1}));          // x^2 - 1
    RatPoly b = to_rat(P({1, 2, 1}));           // (x+1)^2
    RatPoly g = poly_gcd(a, b);
    CHECK(g == to_rat(P({1, 1})));

    IntPoly f = P({-1, 1}) * P({-1, 1}) * P({2, 1}) * P({2, 1}) * P({2, 1}) * P({1, 0, 1});
    auto sq = squarefree_decomposition(f);
    REQUIRE(sq.size() == 3);
    CHECK(sq[0].first == P({1, 0, 1}));
    CHECK(sq[0].second == 1);
    CHECK(sq[1].first == P({-1, 1}));
    CHECK(sq[1].second == 2);
    CHECK(sq[2].first == P({2, 1}));
    CHECK(sq[2].second == 3);
}

TEST_CASE("integer polynomial factorization fixtures") {
    auto f1 = factor_int_poly(P({-1, 0, 0, 0, 1}));  // x^4 - 1
    REQUIRE(f1.factors.size() == 3);
    CHECK(f1.content == 1);
    CHECK(f1.factors[0].first == P({-1, 1}));
    CHECK(f1.factors[1].first == P({1, 1}));
    CHECK(f1.factors[2].first == P({1, 0, 1}));

    // irreducible but reducible modulo every prime
    CHECK(is_irreducible(P({1, 0, -10, 0, 1})));

    // sextic appearing as a Hecke charpoly factor later on
    CHECK(is_irreducible(P({-81256, 11014, 14473, -388, -290, -2, 1})));

    auto f2 = factor_int_poly(P({1, 5, 6}));  // (2x+1)(3x+1)
    REQUIRE(f2.factors.size() == 2);
    CHECK(f2.factors[0].first == P({1, 2}));
    CHECK(f2.factors[1].first == P({1, 3}));

    auto f3 = factor_int_poly(P({1, 0, -1}));  // -(x-1)(x+1)
    CHECK(f3.content == -1);
    REQUIRE(f3.factors.size() == 2);
    CHECK(f3.factors[0].first == P({-1, 1}));
    CHECK(f3.factors[1].first == P({1, 1}));

    IntPoly m = P({1, 1, 1}) * P({1, 1, 1}) * P({-2, 1}) * P({-2, 1}) * P({-2, 1}) * Integer(-6);
    auto f4 = factor_int_poly(m);
    CHECK(f4.content == -6);
    REQUIRE(f4.factors.size() == 2);
    CHECK(f4.factors[0].first == P({-2, 1}));
    CHECK(f4.factors[0].second == 3);
    CHECK(f4.factors[1].first == P({1, 1, 1}));
    CHECK(f4.factors[1].second == 2);

    auto f5 = factor_rat_poly(to_rat(P({-1, 0, 4})));  // 4x^2-1
    REQUIRE(f5.size() == 2);
    CHECK(f5[0].first == make_monic(to_rat(P({-1, 2}))));
    CHECK(f5[1].first == make_monic(to_rat(P({1, 2}))));
}

TEST_CASE("factorization round-trips on random products") {
    std::mt19937_64 rng(37);
    std::uniform_int_distribution<long> coeff(-20, 20);
    std::uniform_int_distribution<int> degd(1, 4);
    std::uniform_int_distribution<int> nf(1, 3);
    std::uniform_int_distribution<int> mult(1, 2);
    for (int t = 0; t < 1000; ++t) {
        IntPoly f = IntPoly::constant(Integer(1));
        int parts = nf(rng);
        for (int i = 0; i < parts; ++i) {
            int d = degd(rng);
            std::vector<long> c(d + 1);
            for (int j = 0; j <= d; ++j) c[j] = coeff(rng);
            while (c[d] == 0) c[d] = coeff(rng);
            IntPoly g = P(c);
            int e = mult(rng);
            for (int k = 0; k < e; ++k) f = f * g;
        }
        // factor_int_poly verifies the product internally and throws on
        // mismatch; reconstruct anyway.
        auto fac = factor_int_poly(f);
        IntPoly back = IntPoly::constant(fac.content);
        for (auto& [h, e] : fac.factors) {
            CHECK(h.leading() > 0);
            CHECK(poly_content(h) == 1);
            for (int k = 0; k < e; ++k) back = back * h;
        }
        REQUIRE(back == f);
        // deterministic: factoring again gives the identical list
        auto fac2 = factor_int_poly(f);
        CHECK(fac2.content == fac.content);
        CHECK(fac2.factors == fac.factors);
    }
}
