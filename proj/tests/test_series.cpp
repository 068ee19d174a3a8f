#include <random>

#include <gtest/gtest.h>

#include "overflow_lab/map_parser.hpp"
#include "overflow_lab/series.hpp"

using namespace overflow_lab;

namespace {

RationalSeries random_series(std::mt19937_64& rng, std::size_t order, bool unit_linear) {
    std::uniform_int_distribution<int> num(-9, 9), den(1, 7);
    RationalSeries s(order);
    for (std::size_t i = 1; i <= order; ++i) {
        s[i] = Rational(num(rng), den(rng));
        s[i].canonicalize();
    }
    if (unit_linear && sgn(s[1]) == 0) s[1] = 1;
    return s;
}

}  // namespace

TEST(Compose, IdentityIsNeutral) {
    RationalSeries g{0, 3, Rational(1, 2), -4};
    EXPECT_EQ(compose(RationalSeries::variable(3), g), g);
}

TEST(Compose, MonomialScaling) {
    RationalSeries f{0, 0, 1};
    RationalSeries g{0, 2, 0};
    EXPECT_EQ(compose(f, g), (RationalSeries{0, 0, 4}));
}

TEST(Compose, HandExpansion) {
    // (X - X^2) + (X - X^2)^2 = X - 2X^3 + X^4
    RationalSeries f{0, 1, 1, 0};
    RationalSeries g{0, 1, -1, 0};
    EXPECT_EQ(compose(f, g), (RationalSeries{0, 1, 0, -2}));
}

TEST(Compose, RejectsNonzeroConstantTerm) {
    EXPECT_THROW(compose(RationalSeries{0, 1}, RationalSeries{1, 1}), NonzeroConstantTerm);
}

TEST(Compose, TruncatesToShorterOrder) {
    RationalSeries f{0, 1, 1, 1, 1, 1};
    RationalSeries g{0, 1, 1};
    EXPECT_EQ(compose(f, g).order(), 2u);
}

TEST(Inverse, LinearCase) {
    RationalSeries g{0, 5, 0, 0};
    EXPECT_EQ(compositional_inverse(g), (RationalSeries{0, Rational(1, 5), 0, 0}));
}

TEST(Inverse, CatalanLikeOracle) {
    RationalSeries g{0, 1, 1, 0, 0};
    EXPECT_EQ(compositional_inverse(g), (RationalSeries{0, 1, -1, 2, -5}));
}

TEST(Inverse, NotInvertibleWithoutLinearTerm) {
    EXPECT_THROW(compositional_inverse(RationalSeries{0, 0, 1}), NotInvertible);
}

TEST(Inverse, TwoSidedOnRandomRationalSeries) {
    std::mt19937_64 rng(2024);
    for (int k = 0; k < 50; ++k) {
        std::size_t order = 1 + std::size_t(k % 32);
        RationalSeries g = random_series(rng, order, true);
        RationalSeries h = compositional_inverse(g);
        EXPECT_EQ(compose(h, g), RationalSeries::variable(order)) << "case " << k;
        EXPECT_EQ(compose(g, h), RationalSeries::variable(order)) << "case " << k;
    }
}

TEST(Inverse, FloatBackendCloseToExact) {
    RationalSeries g{0, 2, Rational(1, 3), -1, Rational(5, 7)};
    FloatSeries hf = compositional_inverse(to_float(g));
    RationalSeries h = compositional_inverse(g);
    for (std::size_t i = 0; i <= 4; ++i) EXPECT_NEAR(hf[i], h[i].get_d(), 1e-14);
}

TEST(Valuation, LeadingTerm) {
    auto v = valuation_and_leading(RationalSeries{0, 2, 3}, false);
    EXPECT_EQ(v.e, 1u);
    EXPECT_EQ(v.leading, 2);
}

TEST(Valuation, DropConstant) {
    auto v = valuation_and_leading(RationalSeries{5, 0, 0, 1}, true);
    EXPECT_EQ(v.e, 3u);
    EXPECT_EQ(v.leading, 1);
}

TEST(Valuation, AllZero) {
    EXPECT_THROW(valuation_and_leading(RationalSeries(4), false), AllZero);
}

TEST(Rational, ParsesFractionsAndDecimals) {
    EXPECT_EQ(parse_rational("3/7"), Rational(3, 7));
    EXPECT_EQ(parse_rational("-0.25"), Rational(-1, 4));
    EXPECT_EQ(parse_rational("1e-3"), Rational(1, 1000));
}

TEST(Rational, ParseErrorCarriesOffset) {
    try {
        parse_rational("12/x");
        FAIL();
    } catch (const ParseError& e) {
        ASSERT_TRUE(e.position().has_value());
        EXPECT_EQ(*e.position(), 3);
    }
}

TEST(MapParser, PolynomialAndRational) {
    DiskMap a = parse_map("z^3+z");
    EXPECT_TRUE(a.is_polynomial());
    EXPECT_EQ(a.numerator_degree(), 3);
    DiskMap m = parse_map("(z-2)/(z+2)");
    EXPECT_FALSE(m.is_polynomial());
    EXPECT_NEAR(std::abs(m(Complex(1.0)) - Complex(-1.0 / 3.0)), 0.0, 1e-15);
}

TEST(MapParser, RejectsGarbage) {
    EXPECT_THROW(parse_map("z^^2"), ParseError);
    EXPECT_THROW(parse_map(""), ParseError);
}
