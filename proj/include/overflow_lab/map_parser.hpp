#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "disk_map.hpp"
#include "errors.hpp"
#include "polynomial.hpp"
#include "rational.hpp"

namespace overflow_lab {

namespace detail {

struct RationalFunction {
    QPoly num{Rational(0)};
    QPoly den{Rational(1)};
};

inline RationalFunction rf_add(const RationalFunction& a, const RationalFunction& b, int sign) {
    QPoly rhs = qmul(b.num, a.den);
    if (sign < 0) rhs = qscale(rhs, Rational(-1));
    return {qadd(qmul(a.num, b.den), rhs), qmul(a.den, b.den)};
}

// Recursive descent over: expr := term (('+'|'-') term)*,
// term := factor (('*'|'/')? factor)*, factor := ('-'|'+') factor | atom ('^' int)?,
// atom := number | 'z' | '(' expr ')'.
class MapParser {
public:
    explicit MapParser(std::string_view text) : s_(text) {}

    RationalFunction parse() {
        RationalFunction r = expr();
        skip();
        if (i_ != s_.size()) fail("unexpected character '" + std::string(1, s_[i_]) + "'");
        return r;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(what + " at offset " + std::to_string(i_), long(i_));
    }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool peek(char c) {
        skip();
        return i_ < s_.size() && s_[i_] == c;
    }

    RationalFunction expr() {
        RationalFunction acc = term();
        while (true) {
            if (peek('+')) {
                ++i_;
                acc = rf_add(acc, term(), +1);
            } else if (peek('-')) {
                ++i_;
                acc = rf_add(acc, term(), -1);
            } else {
                return acc;
            }
        }
    }

    bool starts_factor() {
        skip();
        if (i_ >= s_.size()) return false;
        char c = s_[i_];
        return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'z' || c == '(';
    }

    RationalFunction term() {
        RationalFunction acc = factor();
        while (true) {
            if (peek('*')) {
                ++i_;
                RationalFunction b = factor();
                acc = {qmul(acc.num, b.num), qmul(acc.den, b.den)};
            } else if (peek('/')) {
                std::size_t at = i_;
                ++i_;
                RationalFunction b = factor();
                if (degree(b.num) < 0) {
                    i_ = at;
                    fail("division by zero");
                }
                acc = {qmul(acc.num, b.den), qmul(acc.den, b.num)};
            } else if (starts_factor()) {
                RationalFunction b = factor();
                acc = {qmul(acc.num, b.num), qmul(acc.den, b.den)};
            } else {
                return acc;
            }
        }
    }

    RationalFunction factor() {
        if (peek('-')) {
            ++i_;
            RationalFunction f = factor();
            return {qscale(f.num, Rational(-1)), f.den};
        }
        if (peek('+')) {
            ++i_;
            return factor();
        }
        RationalFunction base = atom();
        if (peek('^')) {
            ++i_;
            skip();
            std::size_t start = i_;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
            if (start == i_) fail("expected integer exponent");
            if (i_ - start > 3) fail("exponent too large");
            int k = std::stoi(std::string(s_.substr(start, i_ - start)));
            RationalFunction r;
            r.num = QPoly{Rational(1)};
            for (int j = 0; j < k; ++j) r = {qmul(r.num, base.num), qmul(r.den, base.den)};
            return r;
        }
        return base;
    }

    RationalFunction atom() {
        skip();
        if (i_ >= s_.size()) fail("unexpected end of input");
        char c = s_[i_];
        if (c == 'z') {
            ++i_;
            return {QPoly{Rational(0), Rational(1)}, QPoly{Rational(1)}};
        }
        if (c == '(') {
            ++i_;
            RationalFunction r = expr();
            if (!peek(')')) fail("expected ')'");
            ++i_;
            return r;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t start = i_;
            while (i_ < s_.size() &&
                   (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.'))
                ++i_;
            if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E') && i_ + 1 < s_.size() &&
                (std::isdigit(static_cast<unsigned char>(s_[i_ + 1])) || s_[i_ + 1] == '-' ||
                 s_[i_ + 1] == '+')) {
                ++i_;
                if (s_[i_] == '-' || s_[i_] == '+') ++i_;
                while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
            }
            Rational v = parse_rational(s_.substr(start, i_ - start), long(start));
            return {QPoly{v}, QPoly{Rational(1)}};
        }
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    std::string_view s_;
    std::size_t i_ = 0;
};

}  // namespace detail

// Parses expressions such as "z^3+z", "2z^4 + 3z", "(z-2)/(z+2)" with exact rational coefficients.
inline DiskMap parse_map(std::string_view text) {
    detail::RationalFunction f = detail::MapParser(text).parse();
    return DiskMap(f.num, f.den);
}

}  // namespace overflow_lab
