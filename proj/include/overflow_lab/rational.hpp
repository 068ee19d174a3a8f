#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace overflow_lab {

using Integer = mpz_class;
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline Integer floor_of(const Rational& x) {
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return q;
}

inline bool is_integer(const Rational& x) { return x.get_den() == 1; }

// Nearest integer, exact halves rounded toward zero.
inline Integer round_half_toward_zero(const Rational& x) {
    Integer f = floor_of(x);
    Rational frac = x - Rational(f);
    Rational half(1, 2);
    if (frac > half) return f + 1;
    if (frac < half) return f;
    return sgn(x) > 0 ? f : Integer(f + 1);
}

inline std::string to_string(const Rational& x) { return x.get_str(); }

inline double to_double(const Rational& x) { return x.get_d(); }

// log|x| for a nonzero rational without overflowing the double range.
inline double log_abs(const Rational& x) {
    long en = 0, ed = 0;
    double mn = mpz_get_d_2exp(&en, x.get_num_mpz_t());
    double md = mpz_get_d_2exp(&ed, x.get_den_mpz_t());
    return std::log(std::fabs(mn)) - std::log(md) + double(en - ed) * std::log(2.0);
}

namespace detail {

inline Integer parse_digits(std::string_view s, std::size_t& i, long base_offset) {
    std::size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == start)
        throw ParseError("expected digit at offset " + std::to_string(base_offset + long(i)),
                         base_offset + long(i));
    return Integer(std::string(s.substr(start, i - start)));
}

}  // namespace detail

// Accepts "p", "p/q", decimals "1.25", and scientific "3e-2"; all parsed exactly.
// base_offset shifts the reported error position when s is embedded in a larger text.
inline Rational parse_rational(std::string_view s, long base_offset = 0) {
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        neg = s[i] == '-';
        ++i;
    }
    Rational value;
    bool int_digits = i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]));
    if (int_digits || i >= s.size() || s[i] != '.') value = Rational(detail::parse_digits(s, i, base_offset));
    if (i < s.size() && s[i] == '.') {
        ++i;
        std::size_t start = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == start && !int_digits)
            throw ParseError("expected digit at offset " + std::to_string(base_offset + long(i)),
                             base_offset + long(i));
        if (i > start) {
            Integer frac(std::string(s.substr(start, i - start)));
            Integer scale;
            mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(i - start));
            value += Rational(frac, scale);
        }
    }
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
            eneg = s[i] == '-';
            ++i;
        }
        Integer ex = detail::parse_digits(s, i, base_offset);
        if (ex > 4000) throw ParseError("exponent too large", base_offset + long(i));
        Integer scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, ex.get_ui());
        value = eneg ? Rational(value / Rational(scale)) : Rational(value * Rational(scale));
    } else if (i < s.size() && s[i] == '/') {
        ++i;
        Integer den = detail::parse_digits(s, i, base_offset);
        if (den == 0) throw ParseError("zero denominator", base_offset + long(i) - 1);
        value /= Rational(den);
    }
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i != s.size())
        throw ParseError("unexpected character '" + std::string(1, s[i]) + "' at offset " +
                             std::to_string(base_offset + long(i)),
                         base_offset + long(i));
    value.canonicalize();
    return neg ? Rational(-value) : value;
}

}  // namespace overflow_lab
