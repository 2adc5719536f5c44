#ifndef OMF_LATTICE_HPP
#define OMF_LATTICE_HPP

// Even positive definite integral lattices, presented by a Gram matrix whose
// diagonal entries are 2Q(e_i). Includes the named root lattices and direct
// sums used throughout the fixtures, plus JSON (de)serialization.

#include "omf/matrix.hpp"

#include <json.hpp>

namespace omf {

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& m) : std::runtime_error(m) {}
};

struct Lattice {
    IntMat gram;

    int rank() const { return gram.rows; }

    // B(x, y) with respect to the basis underlying gram.
    Integer inner(const std::vector<Integer>& x, const std::vector<Integer>& y) const {
        Integer s = 0;
        for (int i = 0; i < gram.rows; ++i) {
            if (x[i] == 0) continue;
            Integer row = 0;
            for (int j = 0; j < gram.cols; ++j) row += gram(i, j) * y[j];
            s += x[i] * row;
        }
        return s;
    }

    // Q(x) = B(x, x)/2, an integer for even lattices.
    Integer norm(const std::vector<Integer>& x) const {
        return divexact(inner(x, x), Integer(2));
    }
};

// det(gram) for even rank; det(gram)/2 for odd rank.
inline Integer discriminant(const Lattice& L) {
    Integer d = det_bareiss(L.gram);
    if (L.rank() % 2 == 0) return d;
    return divexact(d, Integer(2));
}

inline Lattice new_lattice(const IntMat& gram) {
    if (gram.rows != gram.cols)
        throw ValidationError("new_lattice: matrix is not square");
    for (int i = 0; i < gram.rows; ++i)
        for (int j = i + 1; j < gram.cols; ++j)
            if (gram(i, j) != gram(j, i))
                throw ValidationError("new_lattice: matrix is not symmetric");
    for (int i = 0; i < gram.rows; ++i)
        if (mod_floor(gram(i, i), 2) != 0)
            throw ValidationError("new_lattice: diagonal entry is odd (lattice not even)");
    // positive definite iff all leading principal minors are positive
    for (int k = 1; k <= gram.rows; ++k) {
        IntMat sub(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) sub(i, j) = gram(i, j);
        if (det_bareiss(sub) <= 0)
            throw ValidationError("new_lattice: matrix is not positive definite");
    }
    return Lattice{gram};
}

inline Lattice direct_sum(const Lattice& a, const Lattice& b) {
    int n = a.rank(), m = b.rank();
    IntMat g(n + m, n + m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = a.gram(i, j);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) g(n + i, n + j) = b.gram(i, j);
    return Lattice{g};
}

namespace latdetail {

inline Lattice root_A(int n) {
    assert(n >= 1);
    IntMat g(n, n);
    for (int i = 0; i < n; ++i) {
        g(i, i) = 2;
        if (i + 1 < n) { g(i, i + 1) = 1; g(i + 1, i) = 1; }
    }
    return Lattice{g};
}

inline Lattice root_D(int n) {
    assert(n >= 3);
    // simple roots e_i - e_{i+1} (i < n) and e_{n-1} + e_n
    IntMat g(n, n);
    for (int i = 0; i < n - 1; ++i) {
        g(i, i) = 2;
        if (i + 1 < n - 1) { g(i, i + 1) = -1; g(i + 1, i) = -1; }
    }
    g(n - 1, n - 1) = 2;
    if (n >= 3) { g(n - 3, n - 1) = -1; g(n - 1, n - 3) = -1; }
    return Lattice{g};
}

inline Lattice root_E(int n) {
    assert(n >= 6 && n <= 8);
    // chain 0-1-2-3-4(-5-6), with the extra node attached to position 2
    IntMat g(n, n);
    for (int i = 0; i < n - 1; ++i) {
        g(i, i) = 2;
        if (i + 1 < n - 1) { g(i, i + 1) = -1; g(i + 1, i) = -1; }
    }
    g(n - 1, n - 1) = 2;
    g(2, n - 1) = -1;
    g(n - 1, 2) = -1;
    return Lattice{g};
}

// The even unimodular rank-16 lattice that is not E8+E8: D16 extended by the
// all-halves glue vector. Built by Hermite reduction in doubled coordinates.
inline Lattice lattice_D16_plus() {
    const int n = 16;
    IntMat gen(n + 1, n);
    for (int i = 0; i < n - 1; ++i) { gen(i, i) = 2; gen(i, i + 1) = -2; }
    gen(n - 1, n - 2) = 2;
    gen(n - 1, n - 1) = 2;
    for (int j = 0; j < n; ++j) gen(n, j) = 1;
    IntMat H = hnf(gen);
    assert(H.rows == n);
    IntMat G = H * H.transpose();
    for (auto& x : G.a) x = divexact(x, Integer(4));
    Lattice L = new_lattice(G);
    assert(discriminant(L) == 1);
    return L;
}

} // namespace latdetail

// Names: A<n>, D<n>, E6, E7, E8, E16, joined by '+' for direct sums, with an
// optional '^k' repeat, e.g. "A6+A2", "A1^2+A2", "E8+E8".
inline Lattice named_lattice(const std::string& name) {
    std::vector<Lattice> parts;
    size_t pos = 0;
    while (pos < name.size()) {
        size_t plus = name.find('+', pos);
        std::string tok = name.substr(pos, plus == std::string::npos ? std::string::npos : plus - pos);
        pos = plus == std::string::npos ? name.size() : plus + 1;
        int rep = 1;
        if (size_t caret = tok.find('^'); caret != std::string::npos) {
            rep = std::stoi(tok.substr(caret + 1));
            tok = tok.substr(0, caret);
        }
        if (tok.empty() || rep < 1)
            throw ValidationError("named_lattice: cannot parse '" + name + "'");
        char fam = tok[0];
        int idx = 0;
        try {
            idx = std::stoi(tok.substr(1));
        } catch (...) {
            throw ValidationError("named_lattice: cannot parse '" + tok + "'");
        }
        Lattice base;
        if (fam == 'A' && idx >= 1) base = latdetail::root_A(idx);
        else if (fam == 'D' && idx >= 3) base = latdetail::root_D(idx);
        else if (fam == 'E' && idx >= 6 && idx <= 8) base = latdetail::root_E(idx);
        else if (fam == 'E' && idx == 16) base = latdetail::lattice_D16_plus();
        else throw ValidationError("named_lattice: unknown lattice '" + tok + "'");
        for (int r = 0; r < rep; ++r) parts.push_back(base);
    }
    if (parts.empty()) throw ValidationError("named_lattice: empty name");
    Lattice L = parts[0];
    for (size_t i = 1; i < parts.size(); ++i) L = direct_sum(L, parts[i]);
    return new_lattice(L.gram);
}

inline nlohmann::json gram_to_json(const IntMat& g) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < g.rows; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < g.cols; ++j) {
            assert(g(i, j).fits_slong_p());
            row.push_back(g(i, j).get_si());
        }
        rows.push_back(row);
    }
    return rows;
}

inline nlohmann::json to_json(const Lattice& L) {
    nlohmann::json j;
    j["gram"] = gram_to_json(L.gram);
    return j;
}

inline IntMat gram_from_json(const nlohmann::json& rows) {
    if (!rows.is_array() || rows.empty())
        throw ValidationError("gram_from_json: expected a nonempty array of rows");
    int n = static_cast<int>(rows.size());
    IntMat g(n, static_cast<int>(rows[0].size()));
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != g.cols)
            throw ValidationError("gram_from_json: ragged rows");
        for (int j = 0; j < g.cols; ++j) g(i, j) = Integer(rows[i][j].get<long>());
    }
    return g;
}

inline Lattice lattice_from_json(const nlohmann::json& j) {
    return new_lattice(gram_from_json(j.at("gram")));
}

} // namespace omf

#endif
