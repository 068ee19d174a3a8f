#include <random>

#include <gtest/gtest.h>

#include "overflow_lab/lattice.hpp"

using namespace overflow_lab;

namespace {

// -A^T A - diag(1..) with a chain band, so negative definite by construction.
IntersectionLattice random_chain(std::mt19937_64& rng, std::size_t m) {
    std::uniform_int_distribution<int> small(-2, 2), pos(0, 3), diag(1, 4);
    std::vector<std::vector<int>> A(m, std::vector<int>(m, 0));
    for (std::size_t i = 0; i < m; ++i) {
        A[i][i] = small(rng);
        if (i + 1 < m) A[i][i + 1] = small(rng);
    }
    IntersectionLattice L;
    L.M.assign(m, RationalVector(m, Rational(0)));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            long s = 0;
            for (std::size_t k = 0; k < m; ++k) s += long(A[k][i]) * long(A[k][j]);
            L.M[i][j] = -s;
        }
    for (std::size_t i = 0; i < m; ++i) L.M[i][i] -= diag(rng);
    L.c.assign(m, Rational(0));
    for (std::size_t i = 0; i < m; ++i) L.c[i] = Rational(pos(rng), 1 + pos(rng));
    for (auto& x : L.c) x.canonicalize();
    L.CC = Rational(small(rng));
    return L;
}

}  // namespace

TEST(Equilibrium, BlowupChainClosedForm) {
    for (long n = 1; n <= 50; ++n) {
        for (long cc : {-3L, 0L, 2L}) {
            IntersectionLattice L = blowup_chain_fixture(n, Rational(cc));
            EquilibriumDivisor eq = equilibrium_divisor(L);
            ASSERT_EQ(eq.v.size(), std::size_t(n));
            for (long i = 0; i < n; ++i) EXPECT_EQ(eq.v[std::size_t(i)], Rational(n - i));
            EXPECT_EQ(eq.DD, Rational(cc + n));
            EXPECT_TRUE(eq.effective);
        }
    }
}

TEST(Equilibrium, SmallCases) {
    IntersectionLattice one{{}, {{Rational(-1)}}, {Rational(1)}, Rational(5)};
    EquilibriumDivisor eq = equilibrium_divisor(one);
    EXPECT_EQ(eq.v, RationalVector{Rational(1)});
    EXPECT_EQ(eq.DD, Rational(6));

    IntersectionLattice empty;
    empty.CC = Rational(7, 3);
    EquilibriumDivisor e0 = equilibrium_divisor(empty);
    EXPECT_TRUE(e0.v.empty());
    EXPECT_EQ(e0.DD, Rational(7, 3));
}

TEST(Equilibrium, ResidualExactOnRandomLattices) {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 100; ++k) {
        IntersectionLattice L = random_chain(rng, 1 + std::size_t(k % 9));
        ASSERT_TRUE(is_negative_definite(L));
        EquilibriumDivisor eq = equilibrium_divisor(L);
        for (const auto& r : equilibrium_residual(L, eq.v)) EXPECT_EQ(sgn(r), 0);
    }
}

TEST(Equilibrium, RejectsIndefiniteAndMalformed) {
    IntersectionLattice bad{{}, {{Rational(1)}}, {Rational(1)}, Rational(0)};
    EXPECT_THROW(equilibrium_divisor(bad), NotNegativeDefinite);
    IntersectionLattice semi{{}, {{Rational(-1), Rational(1)}, {Rational(1), Rational(-1)}}, {Rational(0), Rational(0)}, 0};
    EXPECT_THROW(equilibrium_divisor(semi), NotNegativeDefinite);
    IntersectionLattice asym{{}, {{Rational(-2), Rational(1)}, {Rational(0), Rational(-2)}}, {Rational(0), Rational(0)}, 0};
    EXPECT_THROW(equilibrium_divisor(asym), InvalidArgument);
    IntersectionLattice shape{{}, {{Rational(-2)}}, {Rational(0), Rational(1)}, 0};
    EXPECT_THROW(equilibrium_divisor(shape), DimensionMismatch);
}

TEST(CNB, Fixtures) {
    auto check = [](long n, long cc) {
        IntersectionLattice L = blowup_chain_fixture(n, Rational(cc));
        return is_CNB(L, equilibrium_divisor(L).v);
    };
    CNBReport a = check(2, 0);
    EXPECT_TRUE(a.cnb);
    EXPECT_EQ(a.DD, Rational(2));
    CNBReport b = check(2, -3);
    EXPECT_FALSE(b.cnb);
    EXPECT_EQ(b.DD, Rational(-1));
    CNBReport c = check(4, -3);
    EXPECT_TRUE(c.cnb);
    EXPECT_EQ(c.DD, Rational(1));
}

TEST(Denough, ReflexiveCase) {
    IntersectionLattice L = blowup_chain_fixture(3, Rational(1));
    EquilibriumDivisor eq = equilibrium_divisor(L);
    DenoughReport d = denough_compare(L, eq.v, eq.v);
    EXPECT_TRUE(d.equal);
    EXPECT_EQ(d.gap, Rational(0));
    EXPECT_EQ(d.DD_eq, d.DD_candidate);
}

TEST(Denough, GapIdentity) {
    IntersectionLattice L = blowup_chain_fixture(2, Rational(2));
    EquilibriumDivisor eq = equilibrium_divisor(L);
    DenoughReport d = denough_compare(L, eq.v, {Rational(1), Rational(0)});
    EXPECT_EQ(d.delta, (RationalVector{Rational(1), Rational(1)}));
    EXPECT_TRUE(d.V_dominates);
    EXPECT_EQ(d.gap, -d.delta_square);
    EXPECT_GT(d.gap, 0);
}

TEST(Denough, GapIdentityOnRandomCandidates) {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> u(0, 4);
    int tested = 0;
    for (int k = 0; k < 400 && tested < 30; ++k) {
        long n = 1 + k % 5;
        IntersectionLattice L = blowup_chain_fixture(n, Rational(u(rng)));
        EquilibriumDivisor eq = equilibrium_divisor(L);
        RationalVector cand(static_cast<std::size_t>(n));
        for (auto& x : cand) x = u(rng);
        if (!is_CNB(L, cand).cnb) continue;
        DenoughReport d = denough_compare(L, eq.v, cand);
        EXPECT_EQ(d.gap, -d.delta_square);
        ++tested;
    }
    EXPECT_GT(tested, 5);
}

TEST(Denough, CandidateMustBeCNB) {
    IntersectionLattice L = blowup_chain_fixture(2, Rational(0));
    EXPECT_THROW(denough_compare(L, equilibrium_divisor(L).v, {Rational(0), Rational(3)}), CandidateNotCNB);
}
