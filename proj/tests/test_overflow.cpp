#include <cmath>

#include <gtest/gtest.h>

#include "corpus.hpp"

using namespace overflow_lab;

namespace {
// tolerance-matched settings for corpus sweeps, as in the acceptance run
const QuadratureSettings corpus_settings{256, 1e-5, 8, true};
}  // namespace

TEST(OverflowC, LinearAndMonomialVanish) {
    EXPECT_NEAR(overflow_to_C(parse_map("3z"), 1.0).value, 0.0, 1e-10);
    for (int k = 1; k <= 4; ++k)
        for (double r : {0.5, 1.0, 2.0})
            EXPECT_NEAR(overflow_to_C(parse_map("z^" + std::to_string(k)), r).value, 0.0, 1e-9) << k << " " << r;
}

TEST(OverflowC, CubicAtRadiusTen) {
    double v = overflow_to_C(parse_map("z^3+z"), 10.0).value;
    EXPECT_NEAR(v, 2.0 * std::log(10.0), 0.05 * 2.0 * std::log(10.0));
}

TEST(OverflowC, PolesAndConstants) {
    // holomorphic on the closed disk is enough for the C target
    EXPECT_GE(overflow_to_C(parse_map("1/(z-3)"), 1.0).value, -1e-9);
    EXPECT_THROW(overflow_to_C(parse_map("1/(z-1/2)"), 1.0), PoleOnDisk);
    EXPECT_THROW(overflow_definitional_oracle(parse_map("1/(z-3)"), 1.0), NotPolynomial);
    EXPECT_THROW(overflow_to_C(parse_map("7"), 1.0), ConstantMap);
}

TEST(Oracle, InjectiveMapsVanish) {
    EXPECT_NEAR(overflow_definitional_oracle(parse_map("z^2+2z"), 1.0).value, 0.0, 1e-6);
    EXPECT_NEAR(overflow_definitional_oracle(parse_map("z^2"), 1.0).value, 0.0, 1e-9);
}

TEST(Oracle, MatchesExplicitFormula) {
    DiskMap a = parse_map("z^2-z/10");
    double ex = overflow_to_C(a, 1.0).value;
    double orc = overflow_definitional_oracle(a, 1.0).value;
    EXPECT_GT(ex, 0.0);
    EXPECT_NEAR(ex, orc, 1e-4);
}

TEST(Oracle, DegreeBoundAndStrictMode) {
    OracleOptions o;
    o.degree_bound = 2;
    EXPECT_THROW(overflow_definitional_oracle(parse_map("z^3+z"), 1.0, {}, o), DegreeTooLarge);
    OracleOptions strict;
    strict.strict = true;
    // z^2 puts the second fiber point of every boundary value on the circle
    EXPECT_THROW(overflow_definitional_oracle(parse_map("z^2"), 1.0, {}, strict), RootConditioning);
}

TEST(OverflowP1, ClosedForms) {
    EXPECT_NEAR(overflow_to_P1(parse_map("z"), 1.0).value, 0.0, 1e-6);
    EXPECT_NEAR(overflow_to_P1(parse_map("z^2"), 1.0).value, 0.0, 1e-6);
    EXPECT_NEAR(overflow_to_P1(parse_map("(z-2)/(z+2)"), 1.0).value, 0.0, 1e-4);
}

TEST(OverflowP1, AgreesWithCTargetForPolynomials) {
    for (const auto& c : corpus::polynomial_maps(12, 4321)) {
        double a = overflow_to_C(c.map, c.radius, corpus_settings).value;
        double b = overflow_to_P1(c.map, c.radius, corpus_settings).value;
        EXPECT_NEAR(a, b, 1e-5);
    }
}

TEST(OverflowProperty, NonnegativeOnSmallCorpus) {
    for (const auto& c : corpus::polynomial_maps(30, 99)) {
        EXPECT_GE(overflow_to_C(c.map, c.radius, corpus_settings).value, -1e-5);
    }
}

TEST(OverflowProperty, RotationInvariant) {
    // alpha(z) and alpha(i z) have the same boundary image
    double a = overflow_to_C(parse_map("z^3+2z^2-z"), 1.0).value;
    DiskMap rotated(CPoly{0.0, Complex(0.0, -1.0), Complex(-2.0, 0.0), Complex(0.0, -1.0)});
    double b = overflow_to_C(rotated, 1.0).value;
    EXPECT_NEAR(a, b, 1e-5);
}

TEST(NevanlinnaBound, IdentitySlackIsLog2) {
    NevanlinnaBound nb = nevanlinna_bound_check(parse_map("z"), 1.0);
    EXPECT_NEAR(nb.ex, 0.0, 1e-9);
    EXPECT_NEAR(nb.bound, std::log(2.0), 1e-6);
    EXPECT_NEAR(nb.slack, std::log(2.0), 1e-6);
}

TEST(NevanlinnaBound, SlackNonnegative) {
    EXPECT_GE(nevanlinna_bound_check(parse_map("z^2"), 1.0).slack, -1e-6);
    for (const auto& c : corpus::polynomial_maps(8, 55)) {
        NevanlinnaBound nb = nevanlinna_bound_check(c.map, c.radius, corpus_settings);
        EXPECT_GE(nb.slack, -1e-5);
        EXPECT_NEAR(nb.slack, nb.green_integral, 1e-4);
    }
}

TEST(Asymptotics, MonomialIsFlat) {
    AsymptoticFit f = polynomial_asymptotics(parse_map("z^3"), {10.0, 100.0, 1000.0});
    EXPECT_NEAR(f.slope, 0.0, 1e-8);
    EXPECT_NEAR(f.intercept, 0.0, 1e-7);
}

TEST(Asymptotics, FitRecoversLine) {
    AsymptoticFit f = fit_log_radius({1.0, 10.0, 100.0}, {1.0, 1.0 + 2.0 * std::log(10.0), 1.0 + 4.0 * std::log(10.0)});
    EXPECT_NEAR(f.slope, 2.0, 1e-12);
    EXPECT_NEAR(f.intercept, 1.0, 1e-12);
}
