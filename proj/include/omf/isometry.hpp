#ifndef OMF_ISOMETRY_HPP
#define OMF_ISOMETRY_HPP

// Automorphism groups and isometry testing by backtracking over images of a
// fixed basis drawn from a short-vector shell, with inner-product pruning and
// per-vector invariant signatures. Orders are exact orbit-stabilizer counts
// over the level structure, processed from the deepest level up. A canonical
// orthogonal decomposition of the shell graph provides a fast path for
// lattices like E8+E8 whose shell splits into mutually orthogonal parts.

#include "omf/theta1.hpp"

#include <map>

namespace omf {

class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& m) : std::runtime_error(m) {}
};

struct Isometry {
    IntMat U;  // U^T gram1 U = gram2
};

struct AutGroup {
    std::vector<Isometry> generators;
    Integer order = 1;
    bool contains_det_minus_one = false;
};

struct Fingerprint {
    int rank = 0;
    Integer disc = 0;
    std::vector<Integer> theta;  // r_1..r_B

    bool operator==(const Fingerprint& o) const {
        return rank == o.rank && disc == o.disc && theta == o.theta;
    }
    bool operator<(const Fingerprint& o) const {
        if (rank != o.rank) return rank < o.rank;
        if (disc != o.disc) return disc < o.disc;
        return theta < o.theta;
    }
    std::string key() const {
        std::string s = std::to_string(rank) + "|" + to_string(disc) + "|";
        for (const auto& t : theta) s += to_string(t) + ",";
        return s;
    }
};

inline long default_fingerprint_depth(int rank) {
    if (rank <= 8) return 8;
    return rank <= 12 ? 4 : 2;
}

inline Fingerprint fingerprint(const Lattice& L, long B) {
    assert(B >= 1);
    auto t = theta1(L, B);
    return Fingerprint{L.rank(), discriminant(L),
                       std::vector<Integer>(t.begin() + 1, t.end())};
}

// (rank, determinant) of the sublattice spanned by the norm-1 vectors.
// Distinguishes e.g. the two even unimodular rank-16 classes.
inline std::pair<int, Integer> root_span_invariant(const Lattice& L) {
    auto roots = short_vectors(L, 1);
    if (roots.empty()) return {0, Integer(1)};
    IntMat rows(static_cast<int>(roots.size()), L.rank());
    for (int i = 0; i < rows.rows; ++i)
        for (int j = 0; j < rows.cols; ++j) rows(i, j) = roots[i].x[j];
    IntMat H = hnf(rows);
    IntMat g = H * L.gram * H.transpose();
    return {H.rows, det_bareiss(g)};
}

namespace isodetail {

constexpr size_t kDefaultNodeCap = 50'000'000;

struct Shell {
    int n = 0;
    long bound = 0;  // smallest norm bound whose vectors span full rank
    std::vector<std::vector<Integer>> vecs;  // both signs, deterministic order
    std::vector<std::vector<long>> lvecs;
    std::vector<std::vector<long>> gw;   // gram times vector, per shell vector
    std::vector<long> norms;
    std::vector<unsigned long long> sig; // isometry-invariant class label
    std::map<std::vector<long>, int> index;

    int m() const { return static_cast<int>(vecs.size()); }
    // on demand so that shells with tens of thousands of vectors stay cheap
    long inner(int i, int j) const {
        const long* a = lvecs[i].data();
        const long* b = gw[j].data();
        long acc = 0;
        for (int r = 0; r < n; ++r) acc += a[r] * b[r];
        return acc;
    }
};

inline Shell build_shell(const Lattice& L) {
    Shell s;
    s.n = L.rank();
    // Keep whole norm classes, but only those that extend the rational span.
    // Classes in between contribute neither base vectors nor candidate
    // images, so lattices with a few deep directions stay tractable. The set
    // of kept norms is an isometry invariant (the span rank per norm is one).
    ShortVectorList kept;
    for (long bound = 1;; bound *= 2) {
        if (bound > 64)
            throw ResourceError("build_shell: no spanning shell below norm 64");
        ShortVectorList sv = short_vectors(L, bound);
        kept.clear();
        IntMat span(0, s.n);
        size_t i = 0;
        while (i < sv.size() && span.rows < s.n) {
            size_t j = i;
            while (j < sv.size() && sv[j].norm == sv[i].norm) ++j;
            IntMat rows(span.rows + static_cast<int>(j - i), s.n);
            for (int r = 0; r < span.rows; ++r)
                for (int c = 0; c < s.n; ++c) rows(r, c) = span(r, c);
            for (size_t k = i; k < j; ++k)
                for (int c = 0; c < s.n; ++c)
                    rows(span.rows + static_cast<int>(k - i), c) = sv[k].x[c];
            IntMat h = hnf(rows);
            if (h.rows > span.rows) {
                span = h;
                for (size_t k = i; k < j; ++k) kept.push_back(sv[k]);
                s.bound = sv[i].norm.get_si();
            }
            i = j;
        }
        if (span.rows == s.n) break;
    }
    for (const auto& v : kept) {
        std::vector<Integer> neg(v.x.size());
        for (size_t i = 0; i < v.x.size(); ++i) neg[i] = -v.x[i];
        s.vecs.push_back(v.x);
        s.norms.push_back(v.norm.get_si());
        s.vecs.push_back(std::move(neg));
        s.norms.push_back(v.norm.get_si());
    }
    int m = s.m();
    if (m > 200000)
        throw ResourceError("build_shell: shell too large (" + std::to_string(m) + " vectors)");
    s.lvecs.resize(m);
    for (int i = 0; i < m; ++i) {
        s.lvecs[i].resize(s.n);
        for (int j = 0; j < s.n; ++j) s.lvecs[i][j] = s.vecs[i][j].get_si();
        s.index[s.lvecs[i]] = i;
    }
    s.gw.assign(m, std::vector<long>(s.n, 0));
    for (int i = 0; i < m; ++i)
        for (int r = 0; r < s.n; ++r) {
            long acc = 0;
            for (int c = 0; c < s.n; ++c) acc += L.gram(r, c).get_si() * s.lvecs[i][c];
            s.gw[i][r] = acc;
        }
    // signature: norm plus the sorted multiset of inner products against a
    // reference prefix. The prefix closes under whole norm classes, so it is
    // canonical and the signature stays an isometry invariant. Prefer the
    // largest class boundary at or below 800; a single oversized class is
    // taken whole only when it comes first.
    int ref = m;
    if (m > 800) {
        ref = 800;
        while (ref > 0 && s.norms[ref] == s.norms[ref - 1]) --ref;
        if (ref == 0) {
            ref = 1;
            while (ref < m && s.norms[ref] == s.norms[ref - 1]) ++ref;
        }
    }
    s.sig.resize(m);
    std::vector<long> row(ref);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < ref; ++j) row[j] = s.inner(i, j);
        std::sort(row.begin(), row.end());
        unsigned long long h = 1469598103934665603ull;
        auto mix = [&h](long long v) {
            h ^= static_cast<unsigned long long>(v) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        };
        mix(s.norms[i]);
        int j = 0;
        while (j < ref) {
            int k = j;
            while (k < ref && row[k] == row[j]) ++k;
            mix(row[j]);
            mix(k - j);
            j = k;
        }
        s.sig[i] = h;
    }
    return s;
}

// Fixed spanning base from the shell. Preference order per level: vectors
// constrained against (non-orthogonal to) more of the prefix first, then
// rarer signature classes; the first such vector extending the span wins.
inline std::vector<int> choose_base(const Shell& s) {
    std::map<unsigned long long, long> class_size;
    for (int i = 0; i < s.m(); ++i) ++class_size[s.sig[i]];
    std::vector<int> base;
    std::vector<std::pair<int, std::vector<Rational>>> ech;  // (pivot, unit row)
    auto try_extend = [&](int i) -> bool {
        std::vector<Rational> v(s.n);
        for (int c = 0; c < s.n; ++c) v[c] = Rational(s.vecs[i][c]);
        for (const auto& [p, row] : ech)
            if (v[p] != 0) {
                Rational f = v[p];
                for (int c = 0; c < s.n; ++c) v[c] -= f * row[c];
            }
        int p = -1;
        for (int c = 0; c < s.n; ++c)
            if (v[c] != 0) { p = c; break; }
        if (p < 0) return false;
        Rational lead = v[p];
        for (int c = 0; c < s.n; ++c) v[c] /= lead;
        ech.emplace_back(p, std::move(v));
        return true;
    };
    while (static_cast<int>(base.size()) < s.n) {
        std::vector<int> order(s.m());
        for (int i = 0; i < s.m(); ++i) order[i] = i;
        std::vector<long> ties(s.m(), 0);
        for (int i = 0; i < s.m(); ++i)
            for (int b : base)
                if (s.inner(i, b) != 0) ++ties[i];
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (ties[a] != ties[b]) return ties[a] > ties[b];
            return class_size[s.sig[a]] < class_size[s.sig[b]];
        });
        bool placed = false;
        for (int i : order)
            if (try_extend(i)) {
                base.push_back(i);
                placed = true;
                break;
            }
        assert(placed);
        (void)placed;
    }
    return base;
}

// rows x with x A = 0; the augmented HNF carries the transform along
inline IntMat int_row_kernel(const IntMat& A) {
    int m = A.rows, n = A.cols;
    IntMat aug(m, n + m);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < n; ++c) aug(r, c) = A(r, c);
        aug(r, n + r) = 1;
    }
    IntMat H = hnf(aug);
    std::vector<int> rows;
    for (int r = 0; r < H.rows; ++r) {
        bool zero = true;
        for (int c = 0; c < n; ++c)
            if (H(r, c) != 0) { zero = false; break; }
        if (zero) rows.push_back(r);
    }
    IntMat K(static_cast<int>(rows.size()), m);
    for (int i = 0; i < K.rows; ++i)
        for (int c = 0; c < m; ++c) K(i, c) = H(rows[i], n + c);
    return K;
}

// congruence sum_j coef[j] y_j = 0 (mod q), checked coordinatewise
struct GlueRow {
    long q = 1;
    std::vector<long> coef;
};

struct Search {
    const Shell* src;  // domain shell; base indices refer to it
    const Shell* dst;  // image shell (same object for automorphisms)
    const IntMat* g_src;
    const IntMat* g_dst;
    std::vector<int> base;
    IntMat X;
    RatMat Xinv;
    std::vector<std::vector<int>> cand;  // per level, image candidates by signature
    std::vector<std::vector<long>> base_ip;
    std::vector<std::vector<GlueRow>> glue;  // per level, integrality congruences
    size_t node_cap = kDefaultNodeCap;
    size_t nodes = 0;
    // fast integrality test: T = Y adj(X) / det(X) in machine integers
    bool fast = false;
    std::vector<std::vector<long>> ladj;
    long ldet = 0;

    void prepare() {
        int n = src->n;
        X = IntMat(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) X(i, j) = src->vecs[base[j]][i];
        auto inv = inverse(to_rat(X));
        assert(inv.has_value());
        Xinv = *inv;
        cand.assign(n, {});
        for (int lvl = 0; lvl < n; ++lvl)
            for (int w = 0; w < dst->m(); ++w)
                if (dst->sig[w] == src->sig[base[lvl]]) cand[lvl].push_back(w);
        base_ip.assign(n, std::vector<long>(n, 0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) base_ip[i][j] = src->inner(base[i], base[j]);

        Integer det = det_bareiss(X);
        long maxy = 1;
        for (const auto& v : dst->lvecs)
            for (long x : v) maxy = std::max(maxy, std::labs(x));
        Integer maxadj = 0;
        IntMat adj(n, n);
        bool exact = true;
        for (int i = 0; i < n && exact; ++i)
            for (int j = 0; j < n && exact; ++j) {
                Rational a = Xinv(i, j) * Rational(det);
                a.canonicalize();
                if (a.get_den() != 1) exact = false;
                adj(i, j) = a.get_num();
                if (abs(adj(i, j)) > maxadj) maxadj = abs(adj(i, j));
            }
        assert(exact);
        // keep Y adj(X) clear of long overflow with generous headroom
        if (exact && det.fits_slong_p() && maxadj * maxy * n < Integer("2305843009213693952")) {
            fast = true;
            ldet = det.get_si();
            ladj.assign(n, std::vector<long>(n, 0));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) ladj[i][j] = adj(i, j).get_si();
        }

        // Glue congruences. A lattice vector in the rational span of the
        // first k base vectors is a rational combination of them; its image
        // must land in the destination lattice, so the same combination of
        // the placed images must be integral. Branches violating this die at
        // level k instead of surviving to a full non-integral completion.
        glue.assign(n, {});
        for (int k = 0; k < n; ++k) {
            IntMat S(k + 1, n);
            for (int j = 0; j <= k; ++j)
                for (int c = 0; c < n; ++c) S(j, c) = src->vecs[base[j]][c];
            IntMat K = int_row_kernel(S.transpose());
            IntMat B = K.rows == 0 ? IntMat::identity(n) : int_row_kernel(K.transpose());
            assert(B.rows == k + 1);
            RatMat Sq = to_rat(S);
            auto ip_inv = inverse(Sq * Sq.transpose());
            assert(ip_inv.has_value());
            RatMat C = to_rat(B) * Sq.transpose() * *ip_inv;
            for (int r = 0; r < C.rows; ++r) {
                Integer q = 1;
                for (int j = 0; j <= k; ++j) {
                    Rational x = C(r, j);
                    x.canonicalize();
                    q = lcm(q, Integer(x.get_den()));
                }
                if (q == 1 || !q.fits_slong_p() || q > 1000000) continue;
                GlueRow g;
                g.q = q.get_si();
                g.coef.assign(k + 1, 0);
                bool ok = true;
                for (int j = 0; j <= k; ++j) {
                    Rational x = C(r, j) * Rational(q);
                    x.canonicalize();
                    assert(x.get_den() == 1);
                    Integer c = x.get_num() % q;
                    if (!c.fits_slong_p()) { ok = false; break; }
                    g.coef[j] = c.get_si();
                }
                if (ok) glue[k].push_back(std::move(g));
            }
        }
    }

    // integrality congruences for level lvl with w as the newest image
    bool glue_ok(int lvl, int w, const std::vector<int>& imgs) const {
        int n = src->n;
        for (const auto& g : glue[lvl]) {
            for (int i = 0; i < n; ++i) {
                long acc = 0;
                for (int j = 0; j <= lvl; ++j) {
                    int y = j == lvl ? w : imgs[j];
                    acc += g.coef[j] * dst->lvecs[y][i];
                }
                if (acc % g.q != 0) return false;
            }
        }
        return true;
    }

    // T = Y X^{-1} if integral; column j of Y is image j. Matching all pairwise
    // inner products already forces T^T G_dst T = G_src over Q, so only
    // integrality can fail.
    std::optional<IntMat> assemble(const std::vector<int>& imgs) const {
        int n = src->n;
        if (fast) {
            IntMat T(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    long num = 0;
                    for (int k = 0; k < n; ++k) num += dst->lvecs[imgs[k]][i] * ladj[k][j];
                    if (num % ldet != 0) return std::nullopt;
                    T(i, j) = num / ldet;
                }
            assert(T.transpose() * *g_dst * T == *g_src);
            return T;
        }
        RatMat Y(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) Y(i, j) = Rational(dst->vecs[imgs[j]][i]);
        RatMat Tq = Y * Xinv;
        IntMat T(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Rational x = Tq(i, j);
                x.canonicalize();
                if (x.get_den() != 1) return std::nullopt;
                T(i, j) = x.get_num();
            }
        if (!(T.transpose() * *g_dst * T == *g_src)) return std::nullopt;
        return T;
    }

    bool feasible(int lvl, int w, const std::vector<int>& imgs) const {
        for (int j = 0; j < lvl; ++j)
            if (dst->inner(w, imgs[j]) != base_ip[lvl][j]) return false;
        return true;
    }

    // Candidates for levels >= lvl consistent with the placed prefix; empty
    // when some level has no candidate left.
    std::optional<std::vector<std::vector<int>>> prefix_lists(const std::vector<int>& imgs,
                                                              int lvl) const {
        int n = src->n;
        std::vector<std::vector<int>> lists(n - lvl);
        for (int l = lvl; l < n; ++l) {
            auto& out = lists[l - lvl];
            for (int v : cand[l]) {
                bool ok = true;
                for (int j = 0; j < lvl; ++j)
                    if (dst->inner(v, imgs[j]) != base_ip[l][j]) { ok = false; break; }
                if (ok) out.push_back(v);
            }
            if (out.empty()) return std::nullopt;
        }
        return lists;
    }

    // Depth-first completion with lookahead: placing an image filters every
    // deeper candidate list by the new inner product constraint, and a branch
    // dies as soon as one list empties. lists[l - lvl] holds the candidates
    // for level l consistent with imgs[0..lvl-1].
    std::optional<IntMat> run(std::vector<int>& imgs, int lvl,
                              const std::vector<std::vector<int>>& lists) {
        int n = src->n;
        if (lvl == n) return assemble(imgs);
        for (int w : lists[0]) {
            if (!glue_ok(lvl, w, imgs)) continue;
            // count accepted placements only; scan width is not tree growth
            if (++nodes > node_cap)
                throw ResourceError("isometry search exceeded node cap");
            imgs[lvl] = w;
            std::vector<std::vector<int>> next(n - lvl - 1);
            bool alive = true;
            for (int l = lvl + 1; l < n && alive; ++l) {
                auto& nl = next[l - lvl - 1];
                for (int v : lists[l - lvl])
                    if (dst->inner(v, w) == base_ip[l][lvl]) nl.push_back(v);
                if (nl.empty()) alive = false;
            }
            if (alive)
                if (auto T = run(imgs, lvl + 1, next)) return T;
        }
        return std::nullopt;
    }

    // First full completion; levels below lvl must already be set in imgs.
    std::optional<IntMat> first_completion(std::vector<int>& imgs, int lvl) {
        if (lvl == src->n) return assemble(imgs);
        auto lists = prefix_lists(imgs, lvl);
        if (!lists) return std::nullopt;
        return run(imgs, lvl, *lists);
    }
};

// Orbit of a shell vector index under a set of generator matrices.
inline std::vector<char> orbit_closure(const Shell& s, int start,
                                       const std::vector<IntMat>& gens) {
    std::vector<std::vector<long>> lgens;
    for (const auto& g : gens) {
        std::vector<long> flat(static_cast<size_t>(s.n) * s.n);
        for (int r = 0; r < s.n; ++r)
            for (int c = 0; c < s.n; ++c) flat[static_cast<size_t>(r) * s.n + c] = g(r, c).get_si();
        lgens.push_back(std::move(flat));
    }
    std::vector<char> in(s.m(), 0);
    std::vector<int> todo{start};
    in[start] = 1;
    std::vector<long> img(s.n);
    while (!todo.empty()) {
        int v = todo.back();
        todo.pop_back();
        for (const auto& g : lgens) {
            for (int r = 0; r < s.n; ++r) {
                long acc = 0;
                for (int c = 0; c < s.n; ++c) acc += g[static_cast<size_t>(r) * s.n + c] * s.lvecs[v][c];
                img[r] = acc;
            }
            auto it = s.index.find(img);
            assert(it != s.index.end());
            if (!in[it->second]) {
                in[it->second] = 1;
                todo.push_back(it->second);
            }
        }
    }
    return in;
}

inline AutGroup automorphism_group_backtrack(const Lattice& L, const Shell& shell,
                                             size_t node_cap) {
    int n = L.rank();
    Search srch;
    srch.src = &shell;
    srch.dst = &shell;
    srch.g_src = &L.gram;
    srch.g_dst = &L.gram;
    srch.base = choose_base(shell);
    srch.node_cap = node_cap;
    srch.prepare();

    AutGroup out;
    std::vector<std::vector<IntMat>> gens_at(n);
    // deepest level first: the stabilizer of the prefix is fully generated
    // before its orbit is counted
    for (int lvl = n - 1; lvl >= 0; --lvl) {
        std::vector<IntMat> stab_gens;
        for (int k = lvl; k < n; ++k)
            for (const auto& g : gens_at[k]) stab_gens.push_back(g);
        std::vector<char> orb = orbit_closure(shell, srch.base[lvl], stab_gens);
        std::vector<int> imgs(n, -1);
        for (int j = 0; j < lvl; ++j) imgs[j] = srch.base[j];
        auto pref = srch.prefix_lists(imgs, lvl);
        assert(pref.has_value());  // the identity completes every prefix
        for (int w : (*pref)[0]) {
            if (orb[w]) continue;
            if (!srch.glue_ok(lvl, w, imgs)) continue;
            imgs[lvl] = w;
            std::vector<std::vector<int>> next(n - lvl - 1);
            bool alive = true;
            for (int l = lvl + 1; l < n && alive; ++l) {
                auto& nl = next[l - lvl - 1];
                for (int v : (*pref)[l - lvl])
                    if (shell.inner(v, w) == srch.base_ip[l][lvl]) nl.push_back(v);
                if (nl.empty()) alive = false;
            }
            if (!alive) continue;
            if (auto T = srch.run(imgs, lvl + 1, next)) {
                gens_at[lvl].push_back(*T);
                stab_gens.push_back(*T);
                orb = orbit_closure(shell, srch.base[lvl], stab_gens);
            }
        }
        Integer cnt = 0;
        for (char c : orb) cnt += c;
        out.order *= cnt;
    }
    for (auto& v : gens_at)
        for (auto& g : v) out.generators.push_back(Isometry{g});
    if (out.generators.empty()) out.generators.push_back(Isometry{IntMat::identity(n)});
    for (const auto& g : out.generators)
        if (det_bareiss(g.U) == -1) out.contains_det_minus_one = true;
    return out;
}

inline std::vector<std::vector<int>> shell_components(const Shell& s) {
    int m = s.m();
    std::vector<int> comp(m, -1);
    int c = 0;
    for (int start = 0; start < m; ++start) {
        if (comp[start] >= 0) continue;
        std::vector<int> stack{start};
        comp[start] = c;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w = 0; w < m; ++w)
                if (comp[w] < 0 && s.inner(v, w) != 0) {
                    comp[w] = c;
                    stack.push_back(w);
                }
        }
        ++c;
    }
    std::vector<std::vector<int>> out(c);
    for (int i = 0; i < m; ++i) out[comp[i]].push_back(i);
    return out;
}

} // namespace isodetail

inline AutGroup automorphism_group(const Lattice& L,
                                   size_t node_cap = isodetail::kDefaultNodeCap);

inline std::optional<Isometry> is_isometric(const Lattice& L1, const Lattice& L2,
                                            size_t node_cap = isodetail::kDefaultNodeCap);

namespace isodetail {

// The shell-graph components span pairwise orthogonal sublattices permuted by
// every automorphism. When the shell spans L itself, Aut(L) is the wreath-type
// product of the block groups, far cheaper than a direct search.
inline AutGroup automorphism_group_blocks(const Lattice& L, const Shell& shell,
                                          const std::vector<std::vector<int>>& comps,
                                          size_t node_cap) {
    int n = L.rank();
    int nb = static_cast<int>(comps.size());
    std::vector<IntMat> bases;
    for (const auto& idx : comps) {
        IntMat rows(static_cast<int>(idx.size()), n);
        for (int i = 0; i < rows.rows; ++i)
            for (int j = 0; j < n; ++j) rows(i, j) = shell.vecs[idx[i]][j];
        bases.push_back(hnf(rows));
    }
    IntMat P(n, n);
    std::vector<int> offset(nb, 0);
    {
        int r = 0;
        for (int k = 0; k < nb; ++k) {
            offset[k] = r;
            for (int i = 0; i < bases[k].rows; ++i, ++r)
                for (int j = 0; j < n; ++j) P(r, j) = bases[k](i, j);
        }
        assert(r == n);
        (void)r;
    }
    Integer dp = det_bareiss(P);
    assert(dp == 1 || dp == -1);
    (void)dp;
    IntMat Gp = P * L.gram * P.transpose();

    std::vector<IntMat> block_gram(nb);
    std::vector<AutGroup> block_aut(nb);
    for (int k = 0; k < nb; ++k) {
        int r = bases[k].rows;
        IntMat g(r, r);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) g(i, j) = Gp(offset[k] + i, offset[k] + j);
        block_gram[k] = g;
        block_aut[k] = automorphism_group(Lattice{g}, node_cap);
    }

    // group blocks into isometry classes; W_k maps k-coords to class head coords
    std::vector<int> head(nb, -1);
    std::vector<IntMat> to_head(nb);
    for (int k = 0; k < nb; ++k) {
        for (int h = 0; h < k; ++h) {
            if (head[h] != h) continue;
            if (block_gram[h].rows != block_gram[k].rows) continue;
            if (auto w = is_isometric(Lattice{block_gram[h]}, Lattice{block_gram[k]}, node_cap)) {
                head[k] = h;
                to_head[k] = w->U;
                break;
            }
        }
        if (head[k] < 0) {
            head[k] = k;
            to_head[k] = IntMat::identity(block_gram[k].rows);
        }
    }

    AutGroup out;
    std::vector<IntMat> gens_p;  // generators in the block-diagonal basis
    for (int k = 0; k < nb; ++k) {
        out.order *= block_aut[k].order;
        for (const auto& g : block_aut[k].generators) {
            IntMat T = IntMat::identity(n);
            for (int i = 0; i < g.U.rows; ++i)
                for (int j = 0; j < g.U.cols; ++j) T(offset[k] + i, offset[k] + j) = g.U(i, j);
            gens_p.push_back(T);
        }
    }
    for (int h = 0; h < nb; ++h) {
        if (head[h] != h) continue;
        std::vector<int> members;
        for (int k = 0; k < nb; ++k)
            if (head[k] == h) members.push_back(k);
        Integer fact = 1;
        for (size_t i = 2; i <= members.size(); ++i) fact *= Integer(i);
        out.order *= fact;
        for (size_t t = 0; t + 1 < members.size(); ++t) {
            int a = members[t], b = members[t + 1];
            // W_a^{-1} W_b is an isometry b-coords -> a-coords, and vice versa
            RatMat wa = to_rat(to_head[a]), wb = to_rat(to_head[b]);
            auto wa_inv = inverse(wa);
            auto wb_inv = inverse(wb);
            assert(wa_inv.has_value() && wb_inv.has_value());
            RatMat ab = *wa_inv * wb;
            RatMat ba = *wb_inv * wa;
            IntMat T = IntMat::identity(n);
            int ra = block_gram[a].rows;
            auto put = [&](const RatMat& Mq, int roff, int coff) {
                for (int i = 0; i < Mq.rows; ++i)
                    for (int j = 0; j < Mq.cols; ++j) {
                        Rational x = Mq(i, j);
                        x.canonicalize();
                        assert(x.get_den() == 1);
                        T(roff + i, coff + j) = x.get_num();
                    }
            };
            for (int i = 0; i < ra; ++i) T(offset[a] + i, offset[a] + i) = 0;
            for (int i = 0; i < ra; ++i) T(offset[b] + i, offset[b] + i) = 0;
            put(ab, offset[a], offset[b]);
            put(ba, offset[b], offset[a]);
            assert(T.transpose() * Gp * T == Gp);
            gens_p.push_back(T);
        }
    }
    // conjugate back: a coordinate column x in the original basis is x = P^T y
    IntMat Pt = P.transpose();
    RatMat Pt_inv = *inverse(to_rat(Pt));
    for (const auto& g : gens_p) {
        RatMat Tq = to_rat(Pt) * to_rat(g) * Pt_inv;
        IntMat T(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Rational x = Tq(i, j);
                x.canonicalize();
                assert(x.get_den() == 1);
                T(i, j) = x.get_num();
            }
        assert(T.transpose() * L.gram * T == L.gram);
        out.generators.push_back(Isometry{T});
        if (det_bareiss(T) == -1) out.contains_det_minus_one = true;
    }
    if (out.generators.empty()) out.generators.push_back(Isometry{IntMat::identity(n)});
    return out;
}

} // namespace isodetail

inline AutGroup automorphism_group_shelled(const Lattice& L, const isodetail::Shell& shell,
                                           size_t node_cap = isodetail::kDefaultNodeCap) {
    using namespace isodetail;
    // the pairwise component scan is quadratic; for big shells go straight to
    // the backtrack search
    if (shell.m() > 4000) return automorphism_group_backtrack(L, shell, node_cap);
    auto comps = shell_components(shell);
    if (comps.size() > 1) {
        // fast path requires the shell to span L itself, not a proper sublattice
        IntMat rows(shell.m(), L.rank());
        for (int i = 0; i < shell.m(); ++i)
            for (int j = 0; j < L.rank(); ++j) rows(i, j) = shell.vecs[i][j];
        IntMat H = hnf(rows);
        Integer dh = det_bareiss(H);
        if (dh == 1 || dh == -1)
            return automorphism_group_blocks(L, shell, comps, node_cap);
    }
    return automorphism_group_backtrack(L, shell, node_cap);
}

inline AutGroup automorphism_group(const Lattice& L, size_t node_cap) {
    isodetail::Shell shell = isodetail::build_shell(L);
    return automorphism_group_shelled(L, shell, node_cap);
}

// Core search with prebuilt shells; the cheap rank/det/root-span prechecks are
// the caller's responsibility.
inline std::optional<Isometry> is_isometric_shelled(const Lattice& L1, const isodetail::Shell& s1,
                                                    const Lattice& L2, const isodetail::Shell& s2,
                                                    size_t node_cap = isodetail::kDefaultNodeCap) {
    using namespace isodetail;
    if (L1.gram == L2.gram) return Isometry{IntMat::identity(L1.rank())};
    // the spanning bound is an isometry invariant
    if (s1.bound != s2.bound) return std::nullopt;
    {
        std::map<long, int> h1, h2;
        for (long x : s1.norms) ++h1[x];
        for (long x : s2.norms) ++h2[x];
        if (h1 != h2) return std::nullopt;
        std::vector<unsigned long long> g1 = s1.sig, g2 = s2.sig;
        std::sort(g1.begin(), g1.end());
        std::sort(g2.begin(), g2.end());
        if (g1 != g2) return std::nullopt;
    }

    Search srch;
    srch.src = &s2;  // base drawn from L2
    srch.dst = &s1;  // images in L1, so T^T gram1 T = gram2
    srch.g_src = &L2.gram;
    srch.g_dst = &L1.gram;
    srch.base = choose_base(s2);
    srch.node_cap = node_cap;
    srch.prepare();
    std::vector<int> imgs(L1.rank(), -1);
    auto T = srch.first_completion(imgs, 0);
    if (!T) return std::nullopt;
    assert(T->transpose() * L1.gram * *T == L2.gram);
    return Isometry{*T};
}

inline std::optional<Isometry> is_isometric(const Lattice& L1, const Lattice& L2,
                                            size_t node_cap) {
    using namespace isodetail;
    if (L1.rank() != L2.rank()) return std::nullopt;
    if (L1.gram == L2.gram) return Isometry{IntMat::identity(L1.rank())};
    if (det_bareiss(L1.gram) != det_bareiss(L2.gram)) return std::nullopt;
    // shell signatures cannot tell E8+E8 from E16, but the root span can
    if (root_span_invariant(L1) != root_span_invariant(L2)) return std::nullopt;

    Shell s1 = build_shell(L1);
    Shell s2 = build_shell(L2);
    return is_isometric_shelled(L1, s1, L2, s2, node_cap);
}

} // namespace omf

#endif
