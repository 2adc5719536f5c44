#include <catch2/catch_amalgamated.hpp>

#include "omf/isometry.hpp"

#include <functional>
#include <random>
#include <set>

using namespace omf;

namespace {

// All isometries L -> L by direct enumeration over columns: column j must be
// a vector of norm gram(j,j)/2 with the right inner products against earlier
// columns. Independent of the backtracking machinery; rank <= 3 scale.
Integer brute_force_aut_order(const Lattice& L) {
    int n = L.rank();
    std::vector<std::vector<std::vector<Integer>>> cands(n);
    for (int j = 0; j < n; ++j) {
        Integer target = L.gram(j, j) / 2;
        for (const auto& sv : short_vectors(L, target.get_si()))
            if (sv.norm == target) {
                cands[j].push_back(sv.x);
                std::vector<Integer> neg(sv.x.size());
                for (size_t i = 0; i < sv.x.size(); ++i) neg[i] = -sv.x[i];
                cands[j].push_back(neg);
            }
    }
    Integer count = 0;
    std::vector<const std::vector<Integer>*> pick(n, nullptr);
    std::function<void(int)> rec = [&](int j) {
        if (j == n) {
            ++count;
            return;
        }
        for (const auto& x : cands[j]) {
            bool ok = true;
            for (int i = 0; i < j && ok; ++i)
                if (L.inner(*pick[i], x) != L.gram(i, j)) ok = false;
            if (!ok) continue;
            pick[j] = &x;
            rec(j + 1);
        }
    };
    rec(0);
    return count;
}

std::vector<long> mat_key(const IntMat& m) {
    std::vector<long> k;
    for (const auto& e : m.a) k.push_back(e.get_si());
    return k;
}

// Order of the group generated by gens, by product closure; cap guards runaway.
size_t closure_order(const std::vector<Isometry>& gens, size_t cap) {
    int n = gens.at(0).U.rows;
    std::set<std::vector<long>> seen;
    std::vector<IntMat> frontier{IntMat::identity(n)};
    seen.insert(mat_key(frontier[0]));
    while (!frontier.empty()) {
        std::vector<IntMat> next;
        for (const auto& m : frontier)
            for (const auto& g : gens) {
                IntMat p = m * g.U;
                if (seen.insert(mat_key(p)).second) {
                    next.push_back(p);
                    REQUIRE(seen.size() <= cap);
                }
            }
        frontier = std::move(next);
    }
    return seen.size();
}

IntMat random_unimodular(int n, std::mt19937& rng, int ops = 6) {
    IntMat U = IntMat::identity(n);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::uniform_int_distribution<int> sign(0, 1);
    for (int t = 0; t < ops; ++t) {
        int i = pick(rng), j = pick(rng);
        if (i == j) continue;
        long s = sign(rng) ? 1 : -1;
        for (int c = 0; c < n; ++c) U(i, c) += s * U(j, c);
    }
    return U;
}

Lattice conjugate(const Lattice& L, const IntMat& U) {
    return Lattice{U.transpose() * L.gram * U};
}

Lattice gram2(long a, long b, long c) {
    IntMat g(2, 2);
    g(0, 0) = a;
    g(0, 1) = g(1, 0) = b;
    g(1, 1) = c;
    return Lattice{g};
}

std::vector<Integer> direct_theta(const Lattice& L, long bound) {
    std::vector<Integer> r(bound + 1, Integer(0));
    r[0] = 1;
    for (const auto& sv : short_vectors(L, bound)) r[sv.norm.get_si()] += 2;
    return r;
}

} // namespace

TEST_CASE("theta engine strategies agree with direct enumeration") {
    for (const char* name : {"A2", "A3", "D4", "A5", "D6", "E7"}) {
        Lattice L = named_lattice(name);
        CAPTURE(name);
        CHECK(theta1(L, 10) == direct_theta(L, 10));
    }
    // product-over-blocks path vs one flat enumeration
    Lattice A1x4 = named_lattice("A1^4");
    CHECK(theta1(A1x4, 12) == direct_theta(A1x4, 12));
    Lattice mix = named_lattice("A2+D4");
    CHECK(theta1(mix, 10) == direct_theta(mix, 10));
}

TEST_CASE("rank 16 even unimodular theta matches the weight 8 Eisenstein series") {
    // both classes share theta coefficients r_m = 480 sigma_7(m) (no cusp forms
    // of weight 8 and level 1), which pins the frame and block engines exactly
    auto sigma7 = [](long m) {
        Integer s = 0;
        for (long d = 1; d <= m; ++d)
            if (m % d == 0) s += powi(Integer(d), 7);
        return s;
    };
    Lattice LA = named_lattice("E8+E8");
    Lattice LB = named_lattice("E16");
    auto ta = theta1(LA, 20);
    auto tb = theta1(LB, 20);
    CHECK(ta == tb);
    REQUIRE(ta.size() == 21);
    CHECK(ta[0] == 1);
    for (long m = 1; m <= 20; ++m) {
        CAPTURE(m);
        CHECK(ta[m] == 480 * sigma7(m));
    }
    CHECK(ta[1] == 480);
    CHECK(ta[2] == 61920);
}

TEST_CASE("E8 theta through the frame engine") {
    auto t = theta1(named_lattice("E8"), 10);
    auto sigma3 = [](long m) {
        Integer s = 0;
        for (long d = 1; d <= m; ++d)
            if (m % d == 0) s += powi(Integer(d), 3);
        return s;
    };
    for (long m = 1; m <= 10; ++m) {
        CAPTURE(m);
        CHECK(t[m] == 240 * sigma3(m));
    }
}

TEST_CASE("fingerprints") {
    CHECK(default_fingerprint_depth(4) == 8);
    CHECK(default_fingerprint_depth(8) == 8);
    CHECK(default_fingerprint_depth(10) == 4);
    CHECK(default_fingerprint_depth(12) == 4);
    CHECK(default_fingerprint_depth(13) == 2);
    CHECK(default_fingerprint_depth(16) == 2);

    Lattice LA = named_lattice("E8+E8");
    Lattice LB = named_lattice("E16");
    CHECK(fingerprint(LA, 20) == fingerprint(LB, 20));

    Lattice A2 = named_lattice("A2");
    IntMat g(2, 2);
    g(0, 0) = 2;
    g(1, 1) = 6;
    Lattice diag26 = new_lattice(g);
    CHECK(discriminant(A2) == 3);
    CHECK(discriminant(diag26) == 12);
    CHECK_FALSE(fingerprint(A2, 8) == fingerprint(diag26, 8));

    CHECK(fingerprint(A2, 8) == fingerprint(A2, 8));
    Fingerprint fp = fingerprint(A2, 8);
    auto direct = direct_theta(A2, 8);
    REQUIRE(fp.theta.size() == 8);
    for (int m = 1; m <= 8; ++m) CHECK(fp.theta[m - 1] == direct[m]);
    CHECK(fp.key() != fingerprint(named_lattice("A3"), 8).key());
    CHECK(fingerprint(A2, 8).key() == fp.key());
}

TEST_CASE("root span invariants") {
    auto rs = [](const Lattice& L) { return root_span_invariant(L); };
    CHECK(rs(named_lattice("E8+E8")) == std::make_pair(16, Integer(1)));
    CHECK(rs(named_lattice("E16")) == std::make_pair(16, Integer(4)));
    CHECK(rs(named_lattice("E6")) == std::make_pair(6, Integer(3)));
    CHECK(rs(named_lattice("E7")) == std::make_pair(7, Integer(2)));
    CHECK(rs(named_lattice("A6+A2")) == std::make_pair(8, Integer(21)));
    CHECK(rs(gram2(4, 1, 6)) == std::make_pair(0, Integer(1)));
}

TEST_CASE("automorphism group orders of root lattices") {
    auto fact = [](int k) {
        Integer f = 1;
        for (int i = 2; i <= k; ++i) f *= i;
        return f;
    };
    struct Case {
        const char* name;
        Integer order;
    };
    const Case cases[] = {
        {"A1", Integer(2)},
        {"A2", Integer(12)},
        {"A3", Integer(48)},
        {"A4", Integer(240)},
        {"D4", Integer(1152)},
        {"D5", Integer(3840)},
        {"D6", Integer(46080)},
        {"E6", Integer(103680)},
        {"E7", Integer(2903040)},
        {"E8", Integer(696729600)},
    };
    for (const auto& c : cases) {
        CAPTURE(c.name);
        Lattice L = named_lattice(c.name);
        AutGroup A = automorphism_group(L);
        CHECK(A.order == c.order);
        CHECK(A.contains_det_minus_one);
        for (const auto& g : A.generators) {
            CHECK(g.U.transpose() * L.gram * g.U == L.gram);
            Integer d = det_bareiss(g.U);
            CHECK((d == 1 || d == -1));
        }
    }
}

TEST_CASE("generator closure reproduces the reported order") {
    for (const char* name : {"A2", "A3", "D4"}) {
        CAPTURE(name);
        AutGroup A = automorphism_group(named_lattice(name));
        CHECK(Integer(static_cast<long>(closure_order(A.generators, 2000))) == A.order);
    }
}

TEST_CASE("automorphism groups of large even unimodular lattices") {
    Integer e8 = 696729600;
    AutGroup sum = automorphism_group(named_lattice("E8+E8"));
    CHECK(sum.order == 2 * e8 * e8);
    CHECK(sum.contains_det_minus_one);

    AutGroup e16 = automorphism_group(named_lattice("E16"));
    Integer expect = powi(Integer(2), 15);
    for (int i = 2; i <= 16; ++i) expect *= i;
    CHECK(e16.order == expect);
    CHECK(e16.contains_det_minus_one);
    Lattice L = named_lattice("E16");
    for (const auto& g : e16.generators)
        CHECK(g.U.transpose() * L.gram * g.U == L.gram);
}

TEST_CASE("automorphism groups of small direct sums") {
    CHECK(automorphism_group(named_lattice("A2+A2")).order == 288);
    CHECK(automorphism_group(named_lattice("A2+A1")).order == 24);
    CHECK(automorphism_group(named_lattice("A1+A1")).order == 8);
}

TEST_CASE("a binary lattice with no determinant minus one automorphism") {
    // 2x^2 + xy + 3y^2, discriminant 23: class of order 3, so the form is not
    // ambiguous and the automorphism group is just +-identity
    Lattice L = gram2(4, 1, 6);
    AutGroup A = automorphism_group(L);
    CHECK(A.order == 2);
    CHECK_FALSE(A.contains_det_minus_one);
    CHECK(brute_force_aut_order(L) == 2);
}

TEST_CASE("rank 1 and glued binary fixtures") {
    IntMat g1(1, 1);
    g1(0, 0) = 2;
    AutGroup a1 = automorphism_group(Lattice{g1});
    CHECK(a1.order == 2);
    CHECK(a1.contains_det_minus_one);

    Lattice glued = gram2(2, 1, 8);
    AutGroup ag = automorphism_group(glued);
    CHECK(ag.order == 4);
    CHECK(ag.contains_det_minus_one);
    CHECK(brute_force_aut_order(glued) == 4);
}

TEST_CASE("order agrees with exhaustive search in rank at most 3") {
    std::vector<Lattice> pool;
    pool.push_back(named_lattice("A1"));
    pool.push_back(named_lattice("A2"));
    pool.push_back(named_lattice("A3"));
    pool.push_back(named_lattice("A2+A1"));
    pool.push_back(named_lattice("A1^3"));
    pool.push_back(gram2(4, 1, 6));
    pool.push_back(gram2(2, 1, 8));
    {
        IntMat g(3, 3);
        g(0, 0) = 2;
        g(1, 1) = 4;
        g(2, 2) = 6;
        pool.push_back(new_lattice(g));
        IntMat h(3, 3);
        h(0, 0) = 2;
        h(0, 1) = h(1, 0) = 1;
        h(1, 1) = 2;
        h(1, 2) = h(2, 1) = 1;
        h(2, 2) = 4;
        pool.push_back(new_lattice(h));
    }
    std::mt19937 rng(20240817);
    std::uniform_int_distribution<int> rank_d(2, 3), diag_d(1, 3);
    while (pool.size() < 28) {
        int n = rank_d(rng);
        IntMat d(n, n);
        for (int i = 0; i < n; ++i) d(i, i) = 2 * diag_d(rng);
        Lattice L = conjugate(Lattice{d}, random_unimodular(n, rng, 3));
        bool small = true;
        for (const auto& e : L.gram.a)
            if (e > 6 || e < -6) small = false;
        if (small) pool.push_back(L);
    }
    for (size_t t = 0; t < pool.size(); ++t) {
        CAPTURE(t);
        CHECK(automorphism_group(pool[t]).order == brute_force_aut_order(pool[t]));
    }
}

TEST_CASE("isometry witnesses form an equivalence") {
    std::mt19937 rng(7211);
    std::vector<Lattice> reps{named_lattice("A2"), named_lattice("A3"),
                              named_lattice("D4"), named_lattice("A2+A1")};
    for (const auto& L1 : reps) {
        int n = L1.rank();
        Lattice L2 = conjugate(L1, random_unimodular(n, rng));
        Lattice L3 = conjugate(L2, random_unimodular(n, rng));

        auto self = is_isometric(L1, L1);
        REQUIRE(self.has_value());
        CHECK(self->U == IntMat::identity(n));

        auto w12 = is_isometric(L1, L2);
        auto w23 = is_isometric(L2, L3);
        auto w13 = is_isometric(L1, L3);
        REQUIRE(w12.has_value());
        REQUIRE(w23.has_value());
        REQUIRE(w13.has_value());
        CHECK(w12->U.transpose() * L1.gram * w12->U == L2.gram);
        CHECK(w23->U.transpose() * L2.gram * w23->U == L3.gram);
        CHECK(w13->U.transpose() * L1.gram * w13->U == L3.gram);

        // composition of witnesses is a witness
        IntMat comp = w12->U * w23->U;
        CHECK(comp.transpose() * L1.gram * comp == L3.gram);

        // the inverse of a witness is a witness in the other direction
        auto inv = inverse(to_rat(w12->U));
        REQUIRE(inv.has_value());
        IntMat w21(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Rational x = (*inv)(i, j);
                x.canonicalize();
                REQUIRE(x.get_den() == 1);
                w21(i, j) = x.get_num();
            }
        CHECK(w21.transpose() * L2.gram * w21 == L1.gram);
    }
}

TEST_CASE("definitive non isometry") {
    CHECK_FALSE(is_isometric(named_lattice("E8+E8"), named_lattice("E16")).has_value());

    IntMat g2(1, 1), g4(1, 1);
    g2(0, 0) = 2;
    g4(0, 0) = 4;
    CHECK_FALSE(is_isometric(Lattice{g2}, Lattice{g4}).has_value());

    IntMat d26(2, 2);
    d26(0, 0) = 2;
    d26(1, 1) = 6;
    CHECK_FALSE(is_isometric(named_lattice("A2"), Lattice{d26}).has_value());

    // two rank 4 lattices of discriminant 1369 in distinct classes
    IntMat l1(4, 4), l2(4, 4);
    {
        long a[4][4] = {{2, 0, 1, 1}, {0, 4, 1, 2}, {1, 1, 10, 1}, {1, 2, 1, 20}};
        long b[4][4] = {{2, 1, 0, -1}, {1, 8, -1, -4}, {0, -1, 10, -2}, {-1, -4, -2, 12}};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                l1(i, j) = a[i][j];
                l2(i, j) = b[i][j];
            }
    }
    Lattice L1 = new_lattice(l1), L2 = new_lattice(l2);
    REQUIRE(discriminant(L1) == 1369);
    REQUIRE(discriminant(L2) == 1369);
    CHECK_FALSE(is_isometric(L1, L2).has_value());
}

TEST_CASE("fingerprint mismatch implies non isometry") {
    std::mt19937 rng(555);
    std::uniform_int_distribution<int> diag_d(1, 4);
    auto random_lattice = [&]() {
        IntMat d(3, 3);
        for (int i = 0; i < 3; ++i) d(i, i) = 2 * diag_d(rng);
        return conjugate(Lattice{d}, random_unimodular(3, rng, 4));
    };
    int matched = 0, mismatched = 0;
    for (int t = 0; t < 1000; ++t) {
        Lattice L1 = random_lattice();
        Lattice L2 = (t % 10 == 0) ? conjugate(L1, random_unimodular(3, rng, 4))
                                   : random_lattice();
        bool fp_equal = fingerprint(L1, 6) == fingerprint(L2, 6);
        auto w = is_isometric(L1, L2);
        if (!fp_equal) {
            ++mismatched;
            CHECK_FALSE(w.has_value());
        } else {
            ++matched;
        }
        if (t % 10 == 0) CHECK(w.has_value());
    }
    CHECK(matched >= 100);
    CHECK(mismatched >= 100);
}

TEST_CASE("witness recovered for random conjugates") {
    std::mt19937 rng(99);
    for (int t = 0; t < 20; ++t) {
        Lattice L = (t % 2) ? named_lattice("A3") : named_lattice("D4");
        Lattice M = conjugate(L, random_unimodular(L.rank(), rng));
        auto w = is_isometric(L, M);
        REQUIRE(w.has_value());
        CHECK(w->U.transpose() * L.gram * w->U == M.gram);
    }
}

TEST_CASE("resource caps raise explicit failures") {
    CHECK_THROWS_AS(automorphism_group(named_lattice("E8"), 10), ResourceError);
    std::mt19937 rng(3);
    Lattice M = conjugate(named_lattice("E8"), random_unimodular(8, rng));
    CHECK_THROWS_AS(is_isometric(named_lattice("E8"), M, 5), ResourceError);
}

TEST_CASE("deterministic outputs") {
    AutGroup a = automorphism_group(named_lattice("A3"));
    AutGroup b = automorphism_group(named_lattice("A3"));
    REQUIRE(a.generators.size() == b.generators.size());
    for (size_t i = 0; i < a.generators.size(); ++i)
        CHECK(a.generators[i].U == b.generators[i].U);
    CHECK(a.order == b.order);

    std::mt19937 rng(1234);
    Lattice M = conjugate(named_lattice("A2"), random_unimodular(2, rng));
    auto w1 = is_isometric(named_lattice("A2"), M);
    auto w2 = is_isometric(named_lattice("A2"), M);
    REQUIRE(w1.has_value());
    REQUIRE(w2.has_value());
    CHECK(w1->U == w2->U);
}
