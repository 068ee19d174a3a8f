#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "overflow_lab/diffeo.hpp"

using namespace overflow_lab;

namespace {

TruncatedDiffeo<Rational> random_diffeo(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> num(-5, 5), den(1, 4);
    std::vector<Rational> c(n);
    for (auto& x : c) {
        x = Rational(num(rng), den(rng));
        x.canonicalize();
    }
    return TruncatedDiffeo<Rational>::from_coefficients(c);
}

OrbitElement<Rational> random_orbit(std::mt19937_64& rng, int e, long a, std::size_t n, int spread = 50) {
    std::uniform_int_distribution<int> u(-spread, spread);
    std::vector<Rational> t(n);
    for (auto& x : t) x = u(rng);
    return OrbitElement<Rational>::make(e, Rational(a), t);
}

}  // namespace

TEST(Group, IdentityAndInverseOracle) {
    std::mt19937_64 rng(1);
    TruncatedDiffeo<Rational> y = random_diffeo(rng, 4);
    EXPECT_EQ(group_compose(TruncatedDiffeo<Rational>(4), y), y);
    auto x = TruncatedDiffeo<Rational>::from_coefficients({1, 0, 0});
    EXPECT_EQ(group_invert(x).coefficients(), (std::vector<Rational>{-1, 2, -5}));
}

TEST(Group, AxiomsExactUpToLevel16) {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 200; ++k) {
        std::size_t n = 1 + std::size_t(k % 16);
        auto x = random_diffeo(rng, n), y = random_diffeo(rng, n), z = random_diffeo(rng, n);
        TruncatedDiffeo<Rational> id(n);
        EXPECT_EQ(group_compose(group_invert(x), x), id);
        EXPECT_EQ(group_compose(x, group_invert(x)), id);
        EXPECT_EQ(group_compose(group_compose(x, y), z), group_compose(x, group_compose(y, z)));
    }
}

TEST(Group, LevelMismatch) {
    EXPECT_THROW(group_compose(TruncatedDiffeo<Rational>(2), TruncatedDiffeo<Rational>(3)), LevelMismatch);
}

TEST(Haar, SameSeedSameSample) {
    EXPECT_EQ(haar_sample(5, 42), haar_sample(5, 42));
    EXPECT_FALSE(haar_sample(5, 42) == haar_sample(5, 43));
}

TEST(Haar, CoordinateMeans) {
    auto rng = seeded_engine(123);
    const int N = 100000;
    std::vector<double> sum(3, 0.0);
    for (int i = 0; i < N; ++i) {
        auto g = haar_sample(3, rng);
        for (std::size_t j = 0; j < 3; ++j) sum[j] += g.coefficients()[j];
    }
    for (double s : sum) EXPECT_NEAR(s / N, 0.5, 0.005);
}

TEST(Haar, LeftTranslationInvariance) {
    // box frequencies of gamma.g mod D_n(Z) against those of g
    const std::size_t n = 2;
    const int N = 40000, bins = 4;
    auto gamma = TruncatedDiffeo<double>::from_coefficients({0.37, -1.3});
    auto rng = seeded_engine(9);
    std::vector<int> plain(bins * bins, 0), moved(bins * bins, 0);
    auto cell = [&](const TruncatedDiffeo<double>& g) {
        auto c = g.coefficients();
        int i = std::min(bins - 1, int(c[0] * bins)), j = std::min(bins - 1, int(c[1] * bins));
        return i * bins + j;
    };
    for (int k = 0; k < N; ++k) {
        auto g = haar_sample(n, rng);
        ++plain[std::size_t(cell(g))];
        ++moved[std::size_t(cell(reduce_mod_integers(group_compose(gamma, g))))];
    }
    const double p = 1.0 / (bins * bins), sigma = std::sqrt(N * p * (1 - p));
    for (int c = 0; c < bins * bins; ++c) EXPECT_LE(std::abs(plain[std::size_t(c)] - moved[std::size_t(c)]), 3.0 * std::sqrt(2.0) * sigma);
}

TEST(Action, IdentityPreservesOrbitAndAxiom) {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 100; ++k) {
        std::size_t n = 1 + std::size_t(k % 6);
        int e = 1 + k % 3;
        auto phi = random_orbit(rng, e, (k % 2) ? 3 : -2, n);
        EXPECT_EQ(act(TruncatedDiffeo<Rational>(n), phi), phi);
        auto g1 = random_diffeo(rng, n), g2 = random_diffeo(rng, n);
        auto moved = act(g1, phi);
        EXPECT_EQ(moved.e, phi.e);
        EXPECT_EQ(moved.a, phi.a);
        EXPECT_EQ(act(group_compose(g1, g2), phi), act(g1, act(g2, phi)));
    }
}

TEST(Reduction, AlreadyReducedGivesIdentity) {
    auto phi = OrbitElement<Rational>::make(2, Rational(3), {1, 5, 0});
    ASSERT_TRUE(in_fundamental_domain(phi));
    auto r = reduce_to_fundamental(phi);
    EXPECT_EQ(r.gamma, TruncatedDiffeo<Rational>(3));
    EXPECT_EQ(r.delta, phi);
}

TEST(Reduction, UnitCaseCollapsesToX) {
    std::mt19937_64 rng(6);
    for (int k = 0; k < 20; ++k) {
        auto phi = random_orbit(rng, 1, 1, 4);
        auto r = reduce_to_fundamental(phi);
        EXPECT_EQ(r.delta, OrbitElement<Rational>::make(1, Rational(1), {0, 0, 0, 0}));
        EXPECT_EQ(act(r.gamma, r.delta), phi);
    }
}

TEST(Reduction, WorkedExample) {
    auto phi = OrbitElement<Rational>::make(2, Rational(1), {3, 0, 0});
    auto r = reduce_to_fundamental(phi);
    EXPECT_EQ(act(r.gamma, r.delta), phi);
    for (const auto& c : r.delta.trailing()) EXPECT_TRUE(c == 0 || c == 1);
}

TEST(Reduction, RandomReconstructExactly) {
    std::mt19937_64 rng(10);
    const long as[] = {1, -1, 2, -3, 5};
    for (int k = 0; k < 500; ++k) {
        int e = 1 + k % 3;
        long a = as[k % 5];
        auto phi = random_orbit(rng, e, a, 1 + std::size_t(k % 5), 200);
        auto r = reduce_to_fundamental(phi);
        EXPECT_TRUE(in_fundamental_domain(r.delta));
        EXPECT_EQ(act(r.gamma, r.delta), phi);
        for (const auto& c : r.gamma.coefficients()) EXPECT_TRUE(is_integer(c));
    }
}

TEST(Reduction, RejectsNonIntegral) {
    auto phi = OrbitElement<Rational>::make(1, Rational(2), {Rational(1, 2)});
    EXPECT_THROW(reduce_to_fundamental(phi), NotIntegral);
}

TEST(Jacobian, ClosedForms) {
    auto g = haar_sample(3, 5);
    EXPECT_NEAR(jacobian_check(OrbitElement<double>::make(1, 1.0, {0.2, -0.4, 0.9}), g).determinant, 1.0, 1e-6);
    auto j = jacobian_check(OrbitElement<double>::make(2, 3.0, {1.0, 0.5, -2.0}), g);
    EXPECT_NEAR(j.determinant / 216.0, 1.0, 1e-5);
    auto j0 = jacobian_check(OrbitElement<double>::make(2, 3.0, {}), TruncatedDiffeo<double>(0));
    EXPECT_EQ(j0.determinant, 1.0);
}

TEST(Jacobian, RandomPointsMatchPower) {
    auto rng = seeded_engine(17);
    for (int e = 1; e <= 3; ++e)
        for (double a : {1.0, -2.0, 4.0}) {
            if (std::fabs(e * a) > 12) continue;
            for (std::size_t n = 1; n <= 4; ++n) {
                std::vector<double> t(n);
                for (auto& x : t) x = 2.0 * uniform01(rng) - 1.0;
                auto r = jacobian_check(OrbitElement<double>::make(e, a, t), haar_sample(n, rng));
                EXPECT_LT(r.relative_error, 1e-5) << e << " " << a << " " << n;
            }
        }
}

TEST(Jacobian, UnstableStepRejected) {
    auto g = haar_sample(3, 1);
    EXPECT_THROW(jacobian_check(OrbitElement<double>::make(3, 4.0, {1, 1, 1}), g, 1e-12), StepTooSmall);
}

TEST(Measure, ZeroBoxAndFlags) {
    MeasureParams p;
    p.R = 0.0;
    p.samples = 2000;
    EXPECT_EQ(measure_bound_mc(p).estimate, 0.0);
    p.R = 1.0;
    p.rho = 0.9;
    EXPECT_FALSE(measure_bound_mc(p).informative);
}

TEST(Measure, DeterministicAcrossRuns) {
    MeasureParams p;
    p.samples = 20000;
    p.seed = 3;
    auto a = measure_bound_mc(p), b = measure_bound_mc(p);
    EXPECT_EQ(a.hits, b.hits);
    p.shards = 3;
    EXPECT_EQ(measure_bound_mc(p).hits, measure_bound_mc(p).hits);
}

TEST(Measure, WithinBound) {
    MeasureParams p;
    p.seed = 42;
    auto m = measure_bound_mc(p);
    EXPECT_LE(m.estimate, m.stated_bound + 3.0 * m.stderr_);
    EXPECT_LE(m.product_bound, m.stated_bound);
}

TEST(Measure, EnumerationCap) {
    MeasureParams p;
    p.e = 3;
    p.a = 20;
    p.n = 4;
    EXPECT_THROW(measure_bound_mc(p), EnumerationTooLarge);
}
