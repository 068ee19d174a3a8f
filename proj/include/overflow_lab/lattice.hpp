#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace overflow_lab {

using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<RationalVector>;

// Vertical components W_i with M_ij = W_i.W_j, c_i = C.W_i and CC = C.C.
struct IntersectionLattice {
    std::vector<std::string> labels;
    RationalMatrix M;
    RationalVector c;
    Rational CC = 0;

    std::size_t size() const noexcept { return M.size(); }

    void validate() const {
        std::size_t m = M.size();
        if (c.size() != m) throw DimensionMismatch("lattice: c has " + std::to_string(c.size()) +
                                                   " entries for " + std::to_string(m) + " components");
        if (!labels.empty() && labels.size() != m) throw DimensionMismatch("lattice: label count differs from matrix size");
        for (std::size_t i = 0; i < m; ++i) {
            if (M[i].size() != m) throw DimensionMismatch("lattice: matrix is not square");
            for (std::size_t j = 0; j < i; ++j)
                if (M[i][j] != M[j][i])
                    throw InvalidArgument("lattice: matrix is not symmetric at (" + std::to_string(i) + ", " +
                                          std::to_string(j) + ")");
        }
    }
};

namespace detail {

inline Integer lcm_of_denominators(const RationalMatrix& M, const RationalVector& c) {
    Integer l = 1;
    for (const auto& row : M)
        for (const auto& x : row) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
    for (const auto& x : c) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
    return l;
}

struct BareissResult {
    std::vector<std::vector<Integer>> a;  // upper-triangular augmented system
    std::vector<Integer> minors;          // leading principal minors of the scaled matrix
};

// Fraction-free elimination without pivoting on [L M | -L c]. The k-th pivot is the
// k-th leading principal minor, so a zero or wrong-signed pivot stops the run.
inline BareissResult bareiss_negative_definite(const IntersectionLattice& L) {
    std::size_t m = L.size();
    Integer scale = lcm_of_denominators(L.M, L.c);
    BareissResult br;
    br.a.assign(m, std::vector<Integer>(m + 1));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            Rational v = L.M[i][j] * Rational(scale);
            br.a[i][j] = v.get_num();
        }
        Rational v = -L.c[i] * Rational(scale);
        br.a[i][m] = v.get_num();
    }
    Integer prev = 1;
    auto& a = br.a;
    for (std::size_t k = 0; k < m; ++k) {
        const Integer& piv = a[k][k];
        // Negative definite: the k-th minor (k+1 rows) has sign (-1)^(k+1).
        int want = (k % 2 == 0) ? -1 : 1;
        if (sgn(piv) != want)
            throw NotNegativeDefinite("lattice: leading principal minor of order " + std::to_string(k + 1) +
                                      " has the wrong sign");
        br.minors.push_back(piv);
        for (std::size_t i = k + 1; i < m; ++i) {
            for (std::size_t j = k + 1; j <= m; ++j) {
                Integer t = piv * a[i][j] - a[i][k] * a[k][j];
                mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
                a[i][j] = t;
            }
            a[i][k] = 0;
        }
        prev = piv;
    }
    return br;
}

inline Rational bilinear(const RationalMatrix& M, const RationalVector& x, const RationalVector& y) {
    Rational acc = 0;
    for (std::size_t i = 0; i < M.size(); ++i)
        for (std::size_t j = 0; j < M.size(); ++j)
            if (sgn(M[i][j]) != 0) acc += x[i] * M[i][j] * y[j];
    return acc;
}

inline Rational dot(const RationalVector& x, const RationalVector& y) {
    Rational acc = 0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

}  // namespace detail

inline bool is_negative_definite(const IntersectionLattice& L) {
    L.validate();
    try {
        detail::bareiss_negative_definite(L);
        return true;
    } catch (const NotNegativeDefinite&) {
        return false;
    }
}

struct EquilibriumDivisor {
    RationalVector v;
    Rational DD = 0;  // CC + c.v
    bool effective = true;
};

// The unique V = sum v_i W_i with (C + V).W_i = 0 for every component.
inline EquilibriumDivisor equilibrium_divisor(const IntersectionLattice& L) {
    L.validate();
    std::size_t m = L.size();
    detail::BareissResult br = detail::bareiss_negative_definite(L);
    EquilibriumDivisor eq;
    eq.v.assign(m, Rational(0));
    for (std::size_t i = m; i-- > 0;) {
        Rational acc(br.a[i][m]);
        for (std::size_t j = i + 1; j < m; ++j) acc -= Rational(br.a[i][j]) * eq.v[j];
        eq.v[i] = acc / Rational(br.a[i][i]);
    }
    for (const auto& x : eq.v)
        if (sgn(x) < 0) eq.effective = false;
    eq.DD = L.CC + detail::dot(L.c, eq.v);
    return eq;
}

// M v + c, which vanishes for the equilibrium vector.
inline RationalVector equilibrium_residual(const IntersectionLattice& L, const RationalVector& v) {
    RationalVector r(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) {
        r[i] = L.c[i];
        for (std::size_t j = 0; j < L.size(); ++j) r[i] += L.M[i][j] * v[j];
    }
    return r;
}

struct CNBReport {
    bool cnb = false;
    Rational DD = 0;                 // D.D, the witness
    Rational CD = 0;                 // C.D
    RationalVector component_products;  // D.W_i
    bool components_nonnegative = true;
};

// D = C + sum v_i W_i: nef on C and every W_i, and D.D > 0.
inline CNBReport is_CNB(const IntersectionLattice& L, const RationalVector& v) {
    L.validate();
    if (v.size() != L.size()) throw DimensionMismatch("is_CNB: coefficient vector has the wrong length");
    CNBReport r;
    r.component_products = equilibrium_residual(L, v);
    r.CD = L.CC + detail::dot(L.c, v);
    r.DD = r.CD + detail::dot(L.c, v) + detail::bilinear(L.M, v, v);
    for (const auto& x : r.component_products)
        if (sgn(x) < 0) r.components_nonnegative = false;
    bool effective = true;
    for (const auto& x : v)
        if (sgn(x) < 0) effective = false;
    r.cnb = effective && r.components_nonnegative && sgn(r.CD) >= 0 && sgn(r.DD) > 0;
    return r;
}

// Chain X~, E_1, ..., E_{n-1}: X~.X~ = -1, E_i.E_i = -2, consecutive members meet once, C meets X~ once.
inline IntersectionLattice blowup_chain_fixture(long n, const Rational& CC) {
    if (n < 1) throw InvalidArgument("blowup_chain_fixture: n must be at least 1");
    std::size_t m = std::size_t(n);
    IntersectionLattice L;
    L.CC = CC;
    L.M.assign(m, RationalVector(m, Rational(0)));
    L.c.assign(m, Rational(0));
    L.labels.push_back("X~");
    for (std::size_t i = 1; i < m; ++i) L.labels.push_back("E" + std::to_string(i));
    for (std::size_t i = 0; i < m; ++i) {
        L.M[i][i] = i == 0 ? -1 : -2;
        if (i + 1 < m) L.M[i][i + 1] = L.M[i + 1][i] = 1;
    }
    L.c[0] = 1;
    return L;
}

struct DenoughReport {
    RationalVector delta;  // v_eq - v_candidate
    bool V_dominates = true;
    Rational CD_eq, CD_candidate;
    Rational DD_eq, DD_candidate;
    Rational gap;          // DD_eq - DD_candidate
    Rational delta_square; // Delta.Delta, so gap = -delta_square
    bool equal = false;
};

inline DenoughReport denough_compare(const IntersectionLattice& L, const RationalVector& v_eq,
                                     const RationalVector& v_candidate) {
    L.validate();
    if (v_eq.size() != L.size() || v_candidate.size() != L.size())
        throw DimensionMismatch("denough_compare: vector lengths differ from the lattice");
    CNBReport cand = is_CNB(L, v_candidate);
    if (!cand.cnb) throw CandidateNotCNB("denough_compare: candidate divisor is not CNB");
    DenoughReport d;
    d.delta.resize(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) {
        d.delta[i] = v_eq[i] - v_candidate[i];
        if (sgn(d.delta[i]) < 0) d.V_dominates = false;
    }
    d.CD_eq = L.CC + detail::dot(L.c, v_eq);
    d.CD_candidate = cand.CD;
    d.DD_eq = d.CD_eq + detail::dot(L.c, v_eq) + detail::bilinear(L.M, v_eq, v_eq);
    d.DD_candidate = cand.DD;
    d.gap = d.DD_eq - d.DD_candidate;
    d.delta_square = detail::bilinear(L.M, d.delta, d.delta);
    d.equal = v_eq == v_candidate;
    return d;
}

}  // namespace overflow_lab
