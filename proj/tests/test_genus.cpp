#include <catch2/catch_amalgamated.hpp>

#include "omf/genus.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace omf;

namespace {

Lattice lattice_1369_first() {
    long a[4][4] = {{2, 0, 1, 1}, {0, 4, 1, 2}, {1, 1, 10, 1}, {1, 2, 1, 20}};
    IntMat g(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g(i, j) = a[i][j];
    return new_lattice(g);
}

Lattice lattice_disc_39() {
    long a[4][4] = {{2, 1, 0, 1}, {1, 2, 1, 0}, {0, 1, 2, 0}, {1, 0, 0, 4}};
    IntMat g(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g(i, j) = a[i][j];
    return direct_sum(named_lattice("A2"), new_lattice(g));
}

const GenusData& rank16_genus() {
    static GenusData G = enumerate_genus(named_lattice("E8+E8"));
    return G;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("rank 4 class numbers") {
    auto g1369 = enumerate_genus(lattice_1369_first());
    CHECK(g1369.size() == 4);
    CHECK(g1369.prime == 2);
    for (size_t i = 0; i < g1369.size(); ++i) {
        CHECK(discriminant(g1369.representatives[i]) == 1369);
        CHECK(classify(g1369, g1369.representatives[i]) == i);
    }
    Rational m = 0;
    for (const auto& o : g1369.aut_orders) m += Rational(1) / Rational(o);
    CHECK(mass(g1369) == m);

    auto g193 = enumerate_genus(find_seed_lattice(4, 193));
    CHECK(g193.size() == 9);
    CHECK(classify(g193, g193.representatives[2]) == 2);
}

TEST_CASE("rank 6 and root lattice class numbers") {
    Lattice seed39 = lattice_disc_39();
    REQUIRE(discriminant(seed39) == 39);
    CHECK(enumerate_genus(seed39).size() == 2);

    CHECK(enumerate_genus(named_lattice("A6+A2")).size() == 3);
    CHECK(enumerate_genus(named_lattice("A10")).size() == 3);
}

TEST_CASE("rank 8 discriminant 53 genus") {
    Lattice seed = find_seed_lattice(8, 53);
    REQUIRE(discriminant(seed) == 53);
    auto G = enumerate_genus(seed);
    CHECK(G.size() == 8);
    for (size_t i = 0; i < G.size(); ++i) {
        CHECK(discriminant(G.representatives[i]) == 53);
        CHECK(classify(G, G.representatives[i]) == i);
    }
}

TEST_CASE("rank 16 unimodular genus") {
    const auto& G = rank16_genus();
    REQUIRE(G.size() == 2);
    // the two classes, matched against their standard models
    Integer o_split = 2 * powi(Integer(696729600), 2);
    Integer o_plus = powi(Integer(2), 15) * 20922789888000_mpz;  // 2^15 * 16!
    bool found_split = false, found_plus = false;
    for (size_t i = 0; i < 2; ++i) {
        CHECK(G.det_minus_one_flags[i]);
        if (is_isometric(G.representatives[i], named_lattice("E8+E8"))) {
            found_split = true;
            CHECK(G.aut_orders[i] == o_split);
        }
        if (is_isometric(G.representatives[i], named_lattice("E16"))) {
            found_plus = true;
            CHECK(G.aut_orders[i] == o_plus);
        }
    }
    CHECK(found_split);
    CHECK(found_plus);
    CHECK(mass(G) == Rational(1) / Rational(o_split) + Rational(1) / Rational(o_plus));
}

TEST_CASE("classification of neighbours and foreign lattices") {
    const auto& G = rank16_genus();
    auto lines = isotropic_line_set(G.representatives[0], 2);
    IsotropicSubspace sub;
    sub.p = 2;
    sub.k = 1;
    auto x = lines.line(lines.count() / 2);
    sub.basis.emplace_back(x.begin(), x.end());
    auto nb = kneser_lift(G.representatives[0], sub);
    size_t idx = classify(G, nb.lattice);
    CHECK(idx < 2);
    CHECK(classify(G, lll_reduce(nb.lattice).first) == idx);

    CHECK_THROWS_AS(classify(G, named_lattice("E8")), NotInGenus);
    CHECK_THROWS_AS(classify(enumerate_genus(lattice_1369_first()), named_lattice("A1^4")),
                    NotInGenus);
}

TEST_CASE("single class masses") {
    auto ge8 = enumerate_genus(named_lattice("E8"));
    REQUIRE(ge8.size() == 1);
    CHECK(mass(ge8) == Rational(1) / Rational(696729600));

    auto ga2 = enumerate_genus(named_lattice("A2"));
    REQUIRE(ga2.size() == 1);
    CHECK(mass(ga2) == Rational(1) / Rational(12));
}

TEST_CASE("enumeration is independent of the prime") {
    auto g3 = enumerate_genus(lattice_1369_first(), Integer(3));
    auto g5 = enumerate_genus(lattice_1369_first(), Integer(5));
    REQUIRE(g3.size() == 4);
    REQUIRE(g5.size() == 4);
    CHECK(g3.prime == 3);
    CHECK(g5.prime == 5);
    CHECK(mass(g3) == mass(g5));
    for (size_t i = 0; i < 4; ++i) {
        CHECK(g3.aut_orders[i] == g5.aut_orders[i]);
        CHECK(g3.det_minus_one_flags[i] == g5.det_minus_one_flags[i]);
        CHECK(g3.fingerprints[i] == g5.fingerprints[i]);
        CHECK(is_isometric(g3.representatives[i], g5.representatives[i]).has_value());
    }

    CHECK_THROWS_AS(enumerate_genus(lattice_disc_39(), Integer(3)), ValidationError);
    CHECK_THROWS_AS(enumerate_genus(lattice_1369_first(), Integer(4)), ValidationError);
}

TEST_CASE("cache round trip is byte identical") {
    auto G = enumerate_genus(lattice_1369_first());
    std::string p1 = "genus_cache_a.json", p2 = "genus_cache_b.json";
    save_genus(G, p1);
    auto L = load_genus(p1);
    CHECK(L.size() == G.size());
    CHECK(L.prime == G.prime);
    CHECK(L.mass == G.mass);
    for (size_t i = 0; i < G.size(); ++i) {
        CHECK(L.representatives[i].gram == G.representatives[i].gram);
        CHECK(L.aut_orders[i] == G.aut_orders[i]);
        CHECK(L.det_minus_one_flags[i] == G.det_minus_one_flags[i]);
        CHECK(L.fingerprints[i] == G.fingerprints[i]);
        CHECK(!L.aut_groups[i].generators.empty());
    }
    CHECK(classify(L, G.representatives[3]) == 3);
    save_genus(L, p2);
    CHECK(read_file(p1) == read_file(p2));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("user supplied class sets") {
    auto write_json = [](const std::string& path, const nlohmann::json& j) {
        std::ofstream out(path);
        out << j.dump(2) << "\n";
    };
    std::string path = "user_genus.json";

    nlohmann::json ok;
    ok["lattices"] = nlohmann::json::array();
    ok["lattices"].push_back(gram_to_json(named_lattice("E8+E8").gram));
    nlohmann::json with_order;
    with_order["gram"] = gram_to_json(named_lattice("E16").gram);
    with_order["aut_order"] = to_string(Integer(powi(Integer(2), 15) * 20922789888000_mpz));
    ok["lattices"].push_back(with_order);
    write_json(path, ok);
    auto G = load_user_genus(path);
    CHECK(G.size() == 2);
    CHECK(G.prime == 0);
    CHECK(mass(G) > 0);

    nlohmann::json dup;
    dup["lattices"] = nlohmann::json::array();
    dup["lattices"].push_back(gram_to_json(named_lattice("E8").gram));
    IntMat U = IntMat::identity(8);
    U(0, 1) = 3;  // unimodular change of basis, same class
    dup["lattices"].push_back(gram_to_json((U.transpose() * named_lattice("E8").gram * U)));
    write_json(path, dup);
    CHECK_THROWS_AS(load_user_genus(path), ValidationError);

    nlohmann::json bad = ok;
    bad["lattices"][1]["aut_order"] = "12345";
    write_json(path, bad);
    CHECK_THROWS_AS(load_user_genus(path), ValidationError);
    std::remove(path.c_str());
}

TEST_CASE("tridiagonal seed search") {
    for (long p : {3, 7, 11, 19, 23, 31, 43, 47, 59, 67, 71, 79, 83, 103, 107, 127, 131, 139}) {
        Lattice L = find_seed_lattice(6, p);
        CHECK(discriminant(L) == p);
        CHECK(L.rank() == 6);
    }
    CHECK(discriminant(find_seed_lattice(8, 53)) == 53);
    CHECK(discriminant(find_seed_lattice(4, 193)) == 193);
    CHECK_THROWS_AS(find_seed_lattice(2, 53), ValidationError);
}
