#ifndef OMF_HECKE_HPP
#define OMF_HECKE_HPP

// Hecke operators on the free rational span of the classes of a genus.
// T_{p,k} is stored as the integer matrix whose (i,j) entry counts the
// p^k-neighbours of the j-th representative that are isometric to the i-th;
// forms are value vectors, so the operator acts through the transpose. The
// module provides the matrix builder, a one-column eigenvalue fast path, the
// mass-weighted inner product, and an exact simultaneous eigenspace
// decomposition over Q.

#include "omf/genus.hpp"
#include "omf/polyfactor.hpp"

#include <exception>
#include <mutex>
#include <thread>

namespace omf {

// A formal linear combination of the genus classes, stored by value on each
// class: c_i is the value at the i-th representative.
struct ModularForm {
    const GenusData* genus = nullptr;
    std::vector<Rational> c;
};

inline ModularForm modular_form(const GenusData& G, std::vector<Rational> coeffs) {
    if (coeffs.size() != G.size())
        throw ValidationError("modular_form: coefficient count differs from the class number");
    for (auto& x : coeffs) x.canonicalize();
    return ModularForm{&G, std::move(coeffs)};
}

// The constant function 1: eigenvalue of T_{p,k} equals the total neighbour
// count, so this is the Eisenstein form of the genus.
inline ModularForm eisenstein_form(const GenusData& G) {
    return modular_form(G, std::vector<Rational>(G.size(), Rational(1)));
}

namespace heckedetail {

inline bool same_genus(const GenusData* a, const GenusData* b) {
    if (a == b) return a != nullptr;
    if (a == nullptr || b == nullptr) return false;
    if (a->size() != b->size()) return false;
    for (size_t i = 0; i < a->size(); ++i)
        if (a->representatives[i].gram != b->representatives[i].gram) return false;
    return true;
}

} // namespace heckedetail

// <f, g> = sum_i c_i d_i / #O(Lambda_i).
inline Rational inner_product(const ModularForm& f, const ModularForm& g) {
    if (!heckedetail::same_genus(f.genus, g.genus))
        throw ValidationError("inner_product: forms live on different genera");
    const GenusData& G = *f.genus;
    Rational s(0);
    for (size_t i = 0; i < G.size(); ++i)
        s += f.c[i] * g.c[i] / Rational(G.aut_orders[i]);
    s.canonicalize();
    return s;
}

struct HeckeMatrix {
    Integer p;
    long k = 1;
    IntMat M;  // M(i,j) = #{p^k-neighbours of class j isometric to class i}
};

struct HeckeOptions {
    // Quotient each neighbour set by the automorphism group of its base class
    // before classification; needs generator data in the GenusData.
    bool orbit_mode = false;
    int workers = 0;     // <= 0: hardware concurrency
    bool verify = true;  // second-column consistency check in hecke_eigenvalue
};

// (T f)(class j) = sum over neighbours of class j of the value of f there.
inline ModularForm hecke_apply(const HeckeMatrix& T, const ModularForm& f) {
    const GenusData& G = *f.genus;
    if (static_cast<size_t>(T.M.rows) != G.size())
        throw ValidationError("hecke_apply: matrix size differs from the class number");
    std::vector<Rational> out(G.size(), Rational(0));
    for (size_t j = 0; j < G.size(); ++j) {
        for (size_t i = 0; i < G.size(); ++i)
            out[j] += Rational(T.M(static_cast<int>(i), static_cast<int>(j))) * f.c[i];
        out[j].canonicalize();
    }
    return ModularForm{f.genus, std::move(out)};
}

namespace heckedetail {

// Classifies lattices that are known members of the genus (Kneser neighbours
// of a representative). Class invariants partition the classes, so when the
// (fingerprint, root span) pair matches exactly one representative that
// match is a proof of isometry and no search is needed; an explicit shelled
// isometry test only runs when several classes collide on both invariants.
class Classifier {
public:
    explicit Classifier(const GenusData& G) : G_(&G), shells_(G.size()) {
        rsi_.reserve(G.size());
        for (size_t i = 0; i < G.size(); ++i)
            rsi_.push_back(root_span_invariant(G.representatives[i]));
    }

    size_t classify(const Lattice& L) {
        Lattice red = lll_reduce(L).first;
        Fingerprint fp = fingerprint(red, G_->fp_depth);
        auto ri = root_span_invariant(red);
        size_t hit = G_->size();
        int matches = 0;
        for (size_t i = 0; i < G_->size(); ++i) {
            if (!(G_->fingerprints[i] == fp) || rsi_[i] != ri) continue;
            hit = i;
            if (++matches > 1) break;
        }
        if (matches == 1) return hit;
        if (matches == 0)
            throw std::logic_error("hecke classify: neighbour matches no class invariants");
        auto cand = std::make_shared<isodetail::Shell>(isodetail::build_shell(red));
        for (size_t i = 0; i < G_->size(); ++i) {
            if (!(G_->fingerprints[i] == fp) || rsi_[i] != ri) continue;
            if (is_isometric_shelled(G_->representatives[i], *shell(i), red, *cand))
                return i;
        }
        throw std::logic_error("hecke classify: neighbour not isometric to any class");
    }

private:
    std::shared_ptr<isodetail::Shell> shell(size_t i) {
        std::lock_guard<std::mutex> lock(mtx_);
        if (!shells_[i])
            shells_[i] = std::make_shared<isodetail::Shell>(
                isodetail::build_shell(G_->representatives[i]));
        return shells_[i];
    }

    const GenusData* G_;
    std::vector<std::pair<int, Integer>> rsi_;
    std::vector<std::shared_ptr<isodetail::Shell>> shells_;
    std::mutex mtx_;
};

// Orbits of totally isotropic k-subspaces under a generated isometry group,
// by union-find over the generator action; the reduced echelon basis is the
// canonical subspace key. Same layout as line_orbits.
inline LineOrbits subspace_orbits(const std::vector<IsotropicSubspace>& subs,
                                  const AutGroup& aut) {
    LineOrbits out;
    if (subs.empty()) return out;
    long p = subs[0].p.get_si();
    int n = static_cast<int>(subs[0].basis[0].size());
    int k = subs[0].k;

    auto key_of = [&](const std::vector<std::vector<long>>& rows) {
        std::string key(static_cast<size_t>(k) * n, '\0');
        for (int r = 0; r < k; ++r)
            for (int j = 0; j < n; ++j)
                key[static_cast<size_t>(r) * n + j] = static_cast<char>(rows[r][j]);
        return key;
    };

    std::map<std::string, size_t> index;
    for (size_t s = 0; s < subs.size(); ++s) {
        std::vector<std::vector<long>> rows(k, std::vector<long>(n));
        for (int r = 0; r < k; ++r)
            for (int j = 0; j < n; ++j) rows[r][j] = subs[s].basis[r][j].get_si();
        index[key_of(rows)] = s;
    }
    assert(index.size() == subs.size());

    std::vector<std::vector<long>> gens;
    for (const auto& g : aut.generators) {
        std::vector<long> m(static_cast<size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m[static_cast<size_t>(i) * n + j] =
                    nbrdetail::mod_p(Integer(g.U(i, j) % p).get_si(), p);
        gens.push_back(std::move(m));
    }

    std::vector<size_t> parent(subs.size());
    std::iota(parent.begin(), parent.end(), size_t(0));
    std::vector<std::vector<long>> img(k, std::vector<long>(n));
    for (size_t s = 0; s < subs.size(); ++s) {
        for (const auto& m : gens) {
            for (int r = 0; r < k; ++r)
                for (int i = 0; i < n; ++i) {
                    long acc = 0;
                    for (int j = 0; j < n; ++j)
                        acc += m[static_cast<size_t>(i) * n + j] * subs[s].basis[r][j].get_si();
                    img[r][i] = nbrdetail::mod_p(acc, p);
                }
            auto rows = img;
            nbrdetail::rref_mod_p(rows, p);
            assert(static_cast<int>(rows.size()) == k);
            auto it = index.find(key_of(rows));
            assert(it != index.end());  // isometries permute the subspace set
            size_t a = gendetail::uf_find(parent, s);
            size_t b = gendetail::uf_find(parent, it->second);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }

    out.orbit_of.assign(subs.size(), 0);
    std::vector<long> slot(subs.size(), -1);
    for (size_t i = 0; i < subs.size(); ++i) {
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

inline int worker_count(const HeckeOptions& opt, size_t tasks) {
    int nw = opt.workers > 0 ? opt.workers
                             : static_cast<int>(std::thread::hardware_concurrency());
    if (nw < 1) nw = 1;
    if (static_cast<size_t>(nw) > tasks) nw = static_cast<int>(tasks);
    return nw < 1 ? 1 : nw;
}

// One column of T_{p,k}: counts of the neighbours of class j falling into
// each class. Workers take contiguous ranges of the pivot-ordered subspace
// list and their partial counts merge by addition, so the result does not
// depend on the worker count.
inline std::vector<Integer> column_counts(const GenusData& G, Classifier& cls, size_t j,
                                          const Integer& p, int k, const HeckeOptions& opt) {
    const Lattice& L = G.representatives[j];
    auto subs = isotropic_subspaces(L, p, k);

    std::vector<std::pair<size_t, Integer>> tasks;  // (subspace index, weight)
    if (opt.orbit_mode) {
        if (G.aut_groups.size() != G.size())
            throw ValidationError("orbit mode needs automorphism generators in the genus data");
        LineOrbits orb;
        if (k == 1) {
            auto lines = isotropic_line_set(L, p);
            assert(lines.count() == subs.size());
            orb = line_orbits(lines, G.aut_groups[j]);
        } else {
            orb = subspace_orbits(subs, G.aut_groups[j]);
        }
        for (size_t t = 0; t < orb.reps.size(); ++t)
            tasks.emplace_back(orb.reps[t], Integer(static_cast<long>(orb.sizes[t])));
    } else {
        tasks.reserve(subs.size());
        for (size_t t = 0; t < subs.size(); ++t) tasks.emplace_back(t, Integer(1));
    }

    int nw = worker_count(opt, tasks.size());
    std::vector<std::vector<Integer>> part(nw, std::vector<Integer>(G.size(), Integer(0)));
    std::vector<std::exception_ptr> errs(nw);
    auto run_range = [&](int w, size_t lo, size_t hi) {
        try {
            for (size_t t = lo; t < hi; ++t) {
                // an automorphism maps the lift fiber of S onto the fiber of
                // sigma(S), so summing the whole fiber of an orbit
                // representative and scaling by the orbit size stays exact
                for (const auto& nb : kneser_lifts(L, subs[tasks[t].first])) {
                    size_t c = cls.classify(nb.lattice);
                    part[w][c] += tasks[t].second;
                }
            }
        } catch (...) {
            errs[w] = std::current_exception();
        }
    };
    if (nw == 1) {
        run_range(0, 0, tasks.size());
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nw; ++w) {
            size_t lo = tasks.size() * w / nw;
            size_t hi = tasks.size() * (w + 1) / nw;
            pool.emplace_back(run_range, w, lo, hi);
        }
        for (auto& t : pool) t.join();
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);

    std::vector<Integer> col(G.size(), Integer(0));
    for (int w = 0; w < nw; ++w)
        for (size_t i = 0; i < G.size(); ++i) col[i] += part[w][i];
    return col;
}

inline void check_good_prime(const GenusData& G, const Integer& p, int k) {
    if (G.size() == 0) throw ValidationError("hecke: empty genus");
    const Lattice& L = G.representatives[0];
    if (discriminant(L) % p == 0)
        throw ValidationError("bad prime: p divides the discriminant");
    nbrdetail::check_neighbour_prime(L, p, k);
}

} // namespace heckedetail

inline HeckeMatrix hecke_matrix(const GenusData& G, const Integer& p, long k,
                                const HeckeOptions& opt = {}) {
    heckedetail::check_good_prime(G, p, static_cast<int>(k));
    int h = static_cast<int>(G.size());
    heckedetail::Classifier cls(G);
    HeckeMatrix T{p, k, IntMat(h, h)};
    for (int j = 0; j < h; ++j) {
        auto col = heckedetail::column_counts(G, cls, static_cast<size_t>(j), p,
                                              static_cast<int>(k), opt);
        for (int i = 0; i < h; ++i) T.M(i, j) = col[static_cast<size_t>(i)];
    }
    return T;
}

// (T f)_i = sum_j M(j, i) c_j needs only column i of the matrix, so a single
// neighbour enumeration determines the eigenvalue of an eigenform. The
// support index with the largest automorphism group is used; its orbit
// quotient is the smallest when orbit mode is on.
inline Rational hecke_eigenvalue(const GenusData& G, const ModularForm& f, const Integer& p,
                                 long k, const HeckeOptions& opt = {}) {
    heckedetail::check_good_prime(G, p, static_cast<int>(k));
    if (!heckedetail::same_genus(f.genus, &G))
        throw ValidationError("hecke_eigenvalue: form does not live on this genus");

    std::vector<size_t> support;
    for (size_t i = 0; i < G.size(); ++i)
        if (f.c[i] != 0) support.push_back(i);
    if (support.empty()) throw ValidationError("hecke_eigenvalue: zero form");
    auto by_aut = [&](size_t a, size_t b) { return G.aut_orders[a] > G.aut_orders[b]; };
    std::stable_sort(support.begin(), support.end(), by_aut);

    heckedetail::Classifier cls(G);
    auto value_at = [&](size_t i) {
        auto col = heckedetail::column_counts(G, cls, i, p, static_cast<int>(k), opt);
        Rational acc(0);
        for (size_t j = 0; j < G.size(); ++j) acc += Rational(col[j]) * f.c[j];
        Rational lam = acc / f.c[i];
        lam.canonicalize();
        return lam;
    };

    Rational lambda = value_at(support[0]);
    if (opt.verify && support.size() > 1) {
        bool cheap = opt.orbit_mode;
        if (!cheap && k == 1) {
            int n = G.representatives[0].rank();
            Integer D = discriminant(G.representatives[0]);
            cheap = neighbour_count_k1(n, D, p) <= 20000;
        }
        if (cheap) {
            Rational lambda2 = value_at(support[1]);
            if (lambda2 != lambda)
                throw std::domain_error("hecke_eigenvalue: form is not an eigenvector");
        }
    }
    return lambda;
}

// A rational simultaneous eigenvector, primitive with positive leading entry,
// with its eigenvalues parallel to the operator list of the decomposition.
struct RationalEigenform {
    ModularForm form;
    std::vector<Integer> lambdas;
};

// An invariant subspace on which every computed operator has an irreducible
// characteristic polynomial factor (one per operator, repeated multiplicity
// times); factor is the one of largest degree among the computed operators.
struct EigenBlock {
    IntPoly factor;
    int multiplicity = 1;
    long dimension = 0;
    RatMat basis;  // rows span the subspace, value coordinates
};

struct EigenDecomposition {
    std::vector<std::pair<Integer, long>> operators;  // (p, k) in computation order
    std::vector<HeckeMatrix> matrices;                // parallel to operators
    std::vector<RationalEigenform> eigenforms;
    std::vector<EigenBlock> blocks;
};

namespace heckedetail {

inline RatMat poly_at(const IntPoly& g, const RatMat& A) {
    int n = A.rows;
    RatMat R(n, n);
    for (int i = g.degree(); i >= 0; --i) {
        R = R * A;
        for (int t = 0; t < n; ++t) R(t, t) += Rational(g[i]);
    }
    return R;
}

// Matrix X of the action "value row b -> b * M" restricted to the row span
// of B, as a left action on coordinate columns: if v = xi^T B then the image
// has coordinates X xi.
inline RatMat restriction_matrix(const RatMat& B, const IntMat& M) {
    int d = B.rows, h = B.cols;
    RatMat C = B * to_rat(M);
    RatMat aug(h, 2 * d);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < d; ++j) {
            aug(i, j) = B(j, i);
            aug(i, d + j) = C(j, i);
        }
    std::vector<int> pivots = rref(aug);
    assert(static_cast<int>(pivots.size()) == d && pivots.back() == d - 1);
    RatMat X(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) X(i, j) = aug(i, d + j);
    return X;
}

} // namespace heckedetail

// Splits the value space under T_{p,1} for the given primes (bad primes are
// ignored) by factoring restricted characteristic polynomials exactly.
// One-dimensional pieces become normalized eigenforms; whatever stays
// together over Q is reported as a block.
inline EigenDecomposition eigen_decompose(const GenusData& G, const std::vector<Integer>& primes,
                                          const HeckeOptions& opt = {}) {
    if (G.size() == 0) throw ValidationError("eigen_decompose: empty genus");
    Integer D = discriminant(G.representatives[0]);
    std::vector<Integer> good;
    for (const auto& p : primes)
        if (is_prime(p) && D % p != 0 && std::find(good.begin(), good.end(), p) == good.end())
            good.push_back(p);
    std::sort(good.begin(), good.end());
    if (good.empty()) throw ValidationError("eigen_decompose: needs at least one good prime");

    EigenDecomposition out;
    for (const auto& p : good) {
        out.operators.emplace_back(p, 1L);
        out.matrices.push_back(hecke_matrix(G, p, 1, opt));
    }

    int h = static_cast<int>(G.size());
    std::vector<RatMat> blocks{to_rat(IntMat::identity(h))};
    for (const auto& T : out.matrices) {
        std::vector<RatMat> next;
        for (const auto& B : blocks) {
            if (B.rows <= 1) {
                next.push_back(B);
                continue;
            }
            RatMat X = heckedetail::restriction_matrix(B, T.M);
            IntPoly cp = to_int_exact(char_poly(X));
            auto fac = factor_int_poly(cp);
            if (fac.factors.size() == 1) {
                next.push_back(B);
                continue;
            }
            int split_dim = 0;
            for (const auto& [g, e] : fac.factors) {
                RatMat gX = heckedetail::poly_at(g, X);
                RatMat K = rational_kernel(gX);
                if (K.rows != g.degree() * e) {
                    // non-semisimple fallback: the primary component
                    IntPoly ge = g;
                    for (int t = 1; t < e; ++t) ge = ge * g;
                    K = rational_kernel(heckedetail::poly_at(ge, X));
                }
                assert(K.rows == g.degree() * e);
                next.push_back(K * B);
                split_dim += K.rows;
            }
            assert(split_dim == B.rows);
        }
        blocks = std::move(next);
    }

    for (const auto& B : blocks) {
        if (B.rows == 1) {
            std::vector<Integer> v = primitive_vector(B.row(0));
            RationalEigenform ef;
            std::vector<Rational> coeffs(v.size());
            for (size_t i = 0; i < v.size(); ++i) coeffs[i] = Rational(v[i]);
            ef.form = modular_form(G, std::move(coeffs));
            int pivot = 0;
            while (v[pivot] == 0) ++pivot;
            for (const auto& T : out.matrices) {
                // value action: (T f)_j = sum_i M(i, j) v_i
                std::vector<Integer> img(G.size(), Integer(0));
                for (int j = 0; j < h; ++j)
                    for (int i = 0; i < h; ++i) img[j] += T.M(i, j) * v[i];
                Integer num = img[pivot];
                assert(num % v[pivot] == 0);
                Integer lam = divexact(num, v[pivot]);
                for (int j = 0; j < h; ++j) assert(img[j] == lam * v[j]);
                ef.lambdas.push_back(lam);
            }
            out.eigenforms.push_back(std::move(ef));
        } else {
            EigenBlock blk;
            blk.dimension = B.rows;
            blk.basis = B;
            bool have = false;
            for (size_t t = 0; t < out.matrices.size(); ++t) {
                RatMat X = heckedetail::restriction_matrix(B, out.matrices[t].M);
                auto fac = factor_int_poly(to_int_exact(char_poly(X)));
                // blocks are primary for every processed operator
                assert(fac.factors.size() == 1);
                const auto& [g, e] = fac.factors[0];
                assert(g.degree() * e == B.rows);
                if (!have || g.degree() > blk.factor.degree()) {
                    blk.factor = g;
                    blk.multiplicity = e;
                    have = true;
                }
            }
            assert(have);
            out.blocks.push_back(std::move(blk));
        }
    }

    std::sort(out.eigenforms.begin(), out.eigenforms.end(),
              [](const RationalEigenform& a, const RationalEigenform& b) {
                  if (a.lambdas != b.lambdas) return a.lambdas > b.lambdas;
                  for (size_t i = 0; i < a.form.c.size(); ++i)
                      if (a.form.c[i] != b.form.c[i]) return a.form.c[i] < b.form.c[i];
                  return false;
              });
    std::sort(out.blocks.begin(), out.blocks.end(), [](const EigenBlock& a, const EigenBlock& b) {
        if (a.dimension != b.dimension) return a.dimension < b.dimension;
        return factor_order(a.factor, b.factor);
    });

    long rest = 0;
    for (const auto& b : out.blocks) rest += b.dimension;
    assert(static_cast<long>(out.eigenforms.size()) + rest == h);
    return out;
}

} // namespace omf

#endif
