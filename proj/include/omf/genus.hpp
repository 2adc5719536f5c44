#ifndef OMF_GENUS_HPP
#define OMF_GENUS_HPP

// Genus enumeration: close a seed lattice under the p-neighbour relation,
// keeping one representative per isometry class. Expansion works on orbits of
// isotropic lines under the automorphism group, so only one line per orbit is
// lifted. Deduplication runs fingerprint and root-span prefilters before the
// expensive isometry search.

#include "omf/isometry.hpp"
#include "omf/lll.hpp"
#include "omf/neighbour.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace omf {

struct NotInGenus : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GenusData {
    std::vector<Lattice> representatives;  // reduced grams, canonical order
    std::vector<Integer> aut_orders;
    std::vector<bool> det_minus_one_flags;
    std::vector<Fingerprint> fingerprints;
    std::vector<AutGroup> aut_groups;  // generators for orbit runs; not serialized
    Rational mass;
    Lattice seed;
    Integer prime = 0;  // 0 when the classes were supplied by the user
    long fp_depth = 0;

    size_t size() const { return representatives.size(); }
};

// Orbits of an isotropic line set under a generated group of isometries.
struct LineOrbits {
    std::vector<size_t> reps;    // minimal member index per orbit, ascending
    std::vector<size_t> sizes;   // parallel to reps
    std::vector<size_t> orbit_of;  // line index -> position in reps
};

namespace gendetail {

inline size_t uf_find(std::vector<size_t>& parent, size_t i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

inline bool gram_lex_less(const IntMat& a, const IntMat& b) {
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) {
            if (a(i, j) != b(i, j)) return a(i, j) < b(i, j);
        }
    return false;
}

struct ClassRec {
    Lattice red;
    Fingerprint fp;
    std::pair<int, Integer> rsi;
    AutGroup aut;
    std::shared_ptr<isodetail::Shell> shell;  // reused across dedup calls
};

inline std::optional<size_t> find_class(const std::vector<ClassRec>& classes, const Lattice& red,
                                        const Fingerprint& fp,
                                        const std::pair<int, Integer>& rsi,
                                        std::shared_ptr<isodetail::Shell>& cand_shell) {
    for (size_t i = 0; i < classes.size(); ++i) {
        if (!(classes[i].fp == fp)) continue;
        if (classes[i].rsi != rsi) continue;
        if (!cand_shell) cand_shell = std::make_shared<isodetail::Shell>(isodetail::build_shell(red));
        if (is_isometric_shelled(classes[i].red, *classes[i].shell, red, *cand_shell)) return i;
    }
    return std::nullopt;
}

} // namespace gendetail

inline LineOrbits line_orbits(const IsotropicLineSet& lines, const AutGroup& aut) {
    size_t N = lines.count();
    long p = lines.p.get_si();
    int n = lines.n;
    std::vector<size_t> parent(N);
    std::iota(parent.begin(), parent.end(), size_t(0));

    std::vector<std::vector<long>> gens;
    for (const auto& g : aut.generators) {
        std::vector<long> m(static_cast<size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m[i * n + j] = nbrdetail::mod_p(Integer(g.U(i, j) % p).get_si(), p);
        gens.push_back(std::move(m));
    }

    std::vector<long> y(n);
    for (size_t i = 0; i < N; ++i) {
        auto x = lines.line(i);
        for (const auto& m : gens) {
            for (int r = 0; r < n; ++r) {
                long acc = 0;
                for (int c = 0; c < n; ++c) acc += m[r * n + c] * x[c];
                y[r] = nbrdetail::mod_p(acc, p);
            }
            normalize_line(y, p);
            auto j = lines.find_code(line_code(y, p));
            assert(j.has_value());  // isometries permute the line set
            size_t a = gendetail::uf_find(parent, i), b = gendetail::uf_find(parent, *j);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }

    LineOrbits out;
    out.orbit_of.assign(N, 0);
    std::vector<long> slot(N, -1);
    for (size_t i = 0; i < N; ++i) {
        size_t r = gendetail::uf_find(parent, i);
        if (slot[r] < 0) {
            slot[r] = static_cast<long>(out.reps.size());
            out.reps.push_back(r);
            out.sizes.push_back(0);
        }
        out.orbit_of[i] = static_cast<size_t>(slot[r]);
        out.sizes[static_cast<size_t>(slot[r])] += 1;
    }
    return out;
}

inline GenusData enumerate_genus(const Lattice& seed,
                                 std::optional<Integer> prime = std::nullopt) {
    Lattice s = new_lattice(seed.gram);
    Integer D = discriminant(s);
    Integer p;
    if (prime) {
        p = *prime;
        if (!is_prime(p)) throw ValidationError("enumeration prime must be prime");
        if (D % p == 0)
            throw ValidationError("enumeration prime must not divide the discriminant");
    } else {
        p = 2;
        while (D % p == 0) mpz_nextprime(p.get_mpz_t(), p.get_mpz_t());
    }
    long depth = default_fingerprint_depth(s.rank());

    std::vector<gendetail::ClassRec> classes;
    auto add = [&](const Lattice& L) -> std::pair<size_t, bool> {
        Lattice red = lll_reduce(L).first;
        Fingerprint fp = fingerprint(red, depth);
        auto rsi = root_span_invariant(red);
        std::shared_ptr<isodetail::Shell> shell;
        if (auto hit = gendetail::find_class(classes, red, fp, rsi, shell)) return {*hit, false};
        if (!shell) shell = std::make_shared<isodetail::Shell>(isodetail::build_shell(red));
        AutGroup aut = automorphism_group_shelled(red, *shell);
        gendetail::ClassRec rec{red, std::move(fp), std::move(rsi), std::move(aut),
                                std::move(shell)};
        classes.push_back(std::move(rec));
        return {classes.size() - 1, true};
    };

    add(s);
    std::deque<size_t> todo{0};
    while (!todo.empty()) {
        size_t j = todo.front();
        todo.pop_front();
        Lattice Lj = classes[j].red;
        auto lines = isotropic_line_set(Lj, p);
        auto orbits = line_orbits(lines, classes[j].aut);
        for (size_t r : orbits.reps) {
            IsotropicSubspace sub;
            sub.p = p;
            sub.k = 1;
            auto x = lines.line(r);
            std::vector<Integer> row(x.begin(), x.end());
            sub.basis.push_back(std::move(row));
            auto nb = kneser_lift(Lj, sub);
            auto [idx, fresh] = add(nb.lattice);
            if (fresh) todo.push_back(idx);
        }
    }

    std::vector<size_t> order(classes.size());
    std::iota(order.begin(), order.end(), size_t(0));
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (!(classes[a].fp == classes[b].fp)) return classes[a].fp < classes[b].fp;
        return gendetail::gram_lex_less(classes[a].red.gram, classes[b].red.gram);
    });

    GenusData G;
    G.seed = s;
    G.prime = p;
    G.fp_depth = depth;
    G.mass = 0;
    for (size_t i : order) {
        G.representatives.push_back(classes[i].red);
        G.aut_orders.push_back(classes[i].aut.order);
        G.det_minus_one_flags.push_back(classes[i].aut.contains_det_minus_one);
        G.fingerprints.push_back(classes[i].fp);
        G.aut_groups.push_back(classes[i].aut);
        G.mass += Rational(1) / Rational(classes[i].aut.order);
    }
    return G;
}

// Repeated classification against a fixed genus; representative shells and
// root-span invariants are built once and reused.
struct GenusClassifier {
    const GenusData* G;
    std::vector<std::shared_ptr<isodetail::Shell>> shells;
    std::vector<std::pair<int, Integer>> rsi;

    explicit GenusClassifier(const GenusData& g) : G(&g), shells(g.size()), rsi(g.size()) {
        for (size_t i = 0; i < g.size(); ++i) rsi[i] = root_span_invariant(g.representatives[i]);
    }

    size_t classify(const Lattice& L) {
        if (G->size() == 0) throw NotInGenus("empty genus");
        if (L.rank() != G->representatives[0].rank())
            throw NotInGenus("rank differs from the genus representatives");
        if (discriminant(L) != discriminant(G->representatives[0]))
            throw NotInGenus("discriminant differs from the genus representatives");
        Lattice red = lll_reduce(L).first;
        Fingerprint fp = fingerprint(red, G->fp_depth);
        auto cand_rsi = root_span_invariant(red);
        std::shared_ptr<isodetail::Shell> cand_shell;
        for (size_t i = 0; i < G->size(); ++i) {
            if (!(G->fingerprints[i] == fp)) continue;
            if (rsi[i] != cand_rsi) continue;
            if (!shells[i])
                shells[i] = std::make_shared<isodetail::Shell>(
                    isodetail::build_shell(G->representatives[i]));
            if (!cand_shell)
                cand_shell = std::make_shared<isodetail::Shell>(isodetail::build_shell(red));
            if (is_isometric_shelled(G->representatives[i], *shells[i], red, *cand_shell))
                return i;
        }
        throw NotInGenus("no representative is isometric to the given lattice");
    }
};

inline size_t classify(const GenusData& G, const Lattice& L) {
    GenusClassifier c(G);
    return c.classify(L);
}

inline Rational mass(const GenusData& G) { return G.mass; }

inline nlohmann::json genus_to_json(const GenusData& G) {
    nlohmann::json j;
    j["rank"] = G.representatives.empty() ? 0 : G.representatives[0].rank();
    j["discriminant"] = to_string(discriminant(G.seed));
    j["prime"] = to_string(G.prime);
    j["fingerprint_depth"] = G.fp_depth;
    j["seed"] = gram_to_json(G.seed.gram);
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& L : G.representatives) reps.push_back(gram_to_json(L.gram));
    j["representatives"] = reps;
    nlohmann::json orders = nlohmann::json::array();
    for (const auto& o : G.aut_orders) orders.push_back(to_string(o));
    j["aut_orders"] = orders;
    j["det_minus_one_flags"] = G.det_minus_one_flags;
    nlohmann::json fps = nlohmann::json::array();
    for (const auto& fp : G.fingerprints) {
        nlohmann::json t = nlohmann::json::array();
        for (const auto& v : fp.theta) t.push_back(to_string(v));
        fps.push_back(t);
    }
    j["fingerprints"] = fps;
    j["mass"] = to_string(G.mass.get_num()) + "/" + to_string(G.mass.get_den());
    return j;
}

inline void save_genus(const GenusData& G, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open genus cache for writing: " + path);
    out << genus_to_json(G).dump(2) << "\n";
}

inline GenusData genus_from_json(const nlohmann::json& j) {
    GenusData G;
    G.seed = new_lattice(gram_from_json(j.at("seed")));
    G.prime = Integer(j.at("prime").get<std::string>());
    G.fp_depth = j.at("fingerprint_depth").get<long>();
    Integer D(j.at("discriminant").get<std::string>());
    if (D != discriminant(G.seed)) throw ValidationError("genus cache: discriminant mismatch");
    G.mass = 0;
    const auto& reps = j.at("representatives");
    const auto& orders = j.at("aut_orders");
    const auto& flags = j.at("det_minus_one_flags");
    const auto& fps = j.at("fingerprints");
    if (reps.size() != orders.size() || reps.size() != flags.size() || reps.size() != fps.size())
        throw ValidationError("genus cache: ragged class data");
    for (size_t i = 0; i < reps.size(); ++i) {
        Lattice L = new_lattice(gram_from_json(reps[i]));
        Fingerprint fp;
        fp.rank = L.rank();
        fp.disc = discriminant(L);
        for (const auto& v : fps[i]) fp.theta.push_back(Integer(v.get<std::string>()));
        AutGroup aut = automorphism_group(L);
        Integer stored(orders[i].get<std::string>());
        if (aut.order != stored)
            throw ValidationError("genus cache: stored automorphism order disagrees");
        G.representatives.push_back(std::move(L));
        G.aut_orders.push_back(aut.order);
        G.det_minus_one_flags.push_back(flags[i].get<bool>());
        G.fingerprints.push_back(std::move(fp));
        G.aut_groups.push_back(std::move(aut));
        G.mass += Rational(1) / Rational(stored);
    }
    return G;
}

inline GenusData load_genus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open genus cache: " + path);
    nlohmann::json j;
    in >> j;
    return genus_from_json(j);
}

// User-supplied class set: an array of gram matrices, or objects with a
// "gram" and an optional "aut_order" that is checked against recomputation.
inline GenusData load_user_genus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open user genus file: " + path);
    nlohmann::json j;
    in >> j;
    const nlohmann::json& list = j.is_array() ? j : j.at("lattices");
    if (!list.is_array() || list.empty())
        throw ValidationError("user genus: expected a nonempty lattice list");

    std::vector<gendetail::ClassRec> classes;
    Lattice seed;
    for (const auto& item : list) {
        const nlohmann::json& gram = item.is_array() ? item : item.at("gram");
        Lattice L = new_lattice(gram_from_json(gram));
        if (classes.empty())
            seed = L;
        else {
            if (L.rank() != classes[0].red.rank())
                throw ValidationError("user genus: ranks differ");
            if (discriminant(L) != discriminant(classes[0].red))
                throw ValidationError("user genus: discriminants differ");
        }
        Lattice red = lll_reduce(L).first;
        long depth = default_fingerprint_depth(red.rank());
        Fingerprint fp = fingerprint(red, depth);
        auto rsi = root_span_invariant(red);
        std::shared_ptr<isodetail::Shell> shell;
        if (gendetail::find_class(classes, red, fp, rsi, shell))
            throw ValidationError("user genus: two supplied lattices are isometric");
        if (!shell)
            shell = std::make_shared<isodetail::Shell>(isodetail::build_shell(red));
        AutGroup aut = automorphism_group_shelled(red, *shell);
        if (item.is_object() && item.contains("aut_order")) {
            Integer claimed = item["aut_order"].is_string()
                                  ? Integer(item["aut_order"].get<std::string>())
                                  : Integer(item["aut_order"].get<long>());
            if (claimed != aut.order)
                throw ValidationError("user genus: supplied aut order " + to_string(claimed) +
                                      " disagrees with recomputed " + to_string(aut.order));
        }
        classes.push_back(gendetail::ClassRec{red, std::move(fp), std::move(rsi), std::move(aut),
                                              std::move(shell)});
    }

    std::vector<size_t> order(classes.size());
    std::iota(order.begin(), order.end(), size_t(0));
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (!(classes[a].fp == classes[b].fp)) return classes[a].fp < classes[b].fp;
        return gendetail::gram_lex_less(classes[a].red.gram, classes[b].red.gram);
    });

    GenusData G;
    G.seed = seed;
    G.prime = 0;
    G.fp_depth = default_fingerprint_depth(seed.rank());
    G.mass = 0;
    for (size_t i : order) {
        G.representatives.push_back(classes[i].red);
        G.aut_orders.push_back(classes[i].aut.order);
        G.det_minus_one_flags.push_back(classes[i].aut.contains_det_minus_one);
        G.fingerprints.push_back(classes[i].fp);
        G.aut_groups.push_back(classes[i].aut);
        G.mass += Rational(1) / Rational(classes[i].aut.order);
    }
    return G;
}

// Deterministic search for an even positive definite tridiagonal gram with
// the requested determinant; covers the seed lattices used by the surveys.
inline Lattice find_seed_lattice(int n, const Integer& D) {
    if (n < 1) throw ValidationError("find_seed_lattice: rank must be positive");
    std::vector<long> diag(n, 2), off(std::max(n - 1, 0), 1);
    for (;;) {
        // leading minors via the three-term recurrence
        Integer dm2 = 1, dm1 = diag[0];
        bool pd = dm1 > 0;
        for (int i = 1; i < n && pd; ++i) {
            Integer dk = diag[i] * dm1 - off[i - 1] * off[i - 1] * dm2;
            if (dk <= 0) pd = false;
            dm2 = dm1;
            dm1 = dk;
        }
        if (pd && dm1 == D) {
            IntMat g(n, n);
            for (int i = 0; i < n; ++i) g(i, i) = diag[i];
            for (int i = 0; i + 1 < n; ++i) g(i, i + 1) = g(i + 1, i) = off[i];
            return new_lattice(g);
        }
        int t = static_cast<int>(off.size()) - 1;
        while (t >= 0 && off[t] == 2) off[t--] = 1;
        if (t >= 0) {
            off[t] += 1;
            continue;
        }
        t = n - 1;
        while (t >= 0 && diag[t] == 8) diag[t--] = 2;
        if (t < 0)
            throw ValidationError("find_seed_lattice: no tridiagonal gram with determinant " +
                                  to_string(D));
        diag[t] += 2;
    }
}

} // namespace omf

#endif
