#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <type_traits>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace overflow_lab {

enum class Backend { rational, floating };

template <class T>
struct coefficient_traits;

template <>
struct coefficient_traits<Rational> {
    static constexpr Backend backend = Backend::rational;
    static bool is_zero(const Rational& x, double) { return sgn(x) == 0; }
};

template <>
struct coefficient_traits<double> {
    static constexpr Backend backend = Backend::floating;
    static bool is_zero(double x, double tol) { return std::fabs(x) <= tol; }
};

inline constexpr double default_float_zero_tol = 1e-12;

// Power series c_0 + c_1 X + ... + c_N X^N taken modulo X^{N+1}.
template <class T>
class TruncatedSeries {
public:
    using value_type = T;

    explicit TruncatedSeries(std::size_t order = 0) : c_(order + 1, T(0)) {}
    TruncatedSeries(std::vector<T> coeffs) : c_(std::move(coeffs)) {
        if (c_.empty()) c_.push_back(T(0));
    }
    TruncatedSeries(std::initializer_list<T> coeffs) : TruncatedSeries(std::vector<T>(coeffs)) {}

    static TruncatedSeries variable(std::size_t order) {
        TruncatedSeries s(order);
        if (order >= 1) s.c_[1] = T(1);
        return s;
    }
    static TruncatedSeries monomial(std::size_t order, std::size_t k, T coeff = T(1)) {
        TruncatedSeries s(order);
        if (k <= order) s.c_[k] = coeff;
        return s;
    }

    std::size_t order() const noexcept { return c_.size() - 1; }
    static constexpr Backend backend() noexcept { return coefficient_traits<T>::backend; }

    const T& operator[](std::size_t i) const { return c_[i]; }
    T& operator[](std::size_t i) { return c_[i]; }
    T coeff(std::size_t i) const { return i < c_.size() ? c_[i] : T(0); }
    const std::vector<T>& coefficients() const noexcept { return c_; }

    TruncatedSeries truncated(std::size_t order) const {
        TruncatedSeries r(order);
        for (std::size_t i = 0; i <= order && i < c_.size(); ++i) r.c_[i] = c_[i];
        return r;
    }

    TruncatedSeries& operator+=(const TruncatedSeries& o) {
        resize_to_common(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    TruncatedSeries& operator-=(const TruncatedSeries& o) {
        resize_to_common(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    TruncatedSeries& operator*=(const T& s) {
        for (auto& x : c_) x *= s;
        return *this;
    }

    friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) { return a += b; }
    friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) { return a -= b; }
    friend TruncatedSeries operator*(TruncatedSeries a, const T& s) { return a *= s; }
    friend TruncatedSeries operator*(const T& s, TruncatedSeries a) { return a *= s; }
    friend TruncatedSeries operator-(TruncatedSeries a) {
        for (auto& x : a.c_) x = -x;
        return a;
    }

    friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
        std::size_t n = std::min(a.order(), b.order());
        TruncatedSeries r(n);
        for (std::size_t i = 0; i <= n; ++i) {
            if (coefficient_traits<T>::is_zero(a.c_[i], 0.0)) continue;
            for (std::size_t j = 0; i + j <= n; ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
        }
        return r;
    }

    // Coefficientwise equality up to the common order.
    friend bool operator==(const TruncatedSeries& a, const TruncatedSeries& b) {
        std::size_t n = std::min(a.order(), b.order());
        for (std::size_t i = 0; i <= n; ++i)
            if (!(a.c_[i] == b.c_[i])) return false;
        return true;
    }
    friend bool operator!=(const TruncatedSeries& a, const TruncatedSeries& b) { return !(a == b); }

private:
    void resize_to_common(const TruncatedSeries& o) {
        if (o.c_.size() < c_.size()) c_.resize(o.c_.size());
    }

    std::vector<T> c_;
};

using RationalSeries = TruncatedSeries<Rational>;
using FloatSeries = TruncatedSeries<double>;

inline FloatSeries to_float(const RationalSeries& s) {
    std::vector<double> c(s.order() + 1);
    for (std::size_t i = 0; i <= s.order(); ++i) c[i] = s[i].get_d();
    return FloatSeries(std::move(c));
}

// f(g(X)) mod X^{N+1}, N the smaller of the two orders.
template <class T>
TruncatedSeries<T> compose(const TruncatedSeries<T>& f, const TruncatedSeries<T>& g) {
    if (!coefficient_traits<T>::is_zero(g[0], 0.0))
        throw NonzeroConstantTerm("compose: inner series has nonzero constant term");
    std::size_t n = std::min(f.order(), g.order());
    TruncatedSeries<T> gn = g.truncated(n);
    TruncatedSeries<T> r(n);
    r[0] = f[n];
    for (std::size_t k = n; k-- > 0;) {
        r = r * gn;
        r[0] += f[k];
    }
    return r;
}

// h with h(g(X)) = g(h(X)) = X, solved one coefficient at a time.
template <class T>
TruncatedSeries<T> compositional_inverse(const TruncatedSeries<T>& g) {
    if (!coefficient_traits<T>::is_zero(g[0], 0.0))
        throw NonzeroConstantTerm("compositional_inverse: nonzero constant term");
    std::size_t n = g.order();
    if (n == 0) return TruncatedSeries<T>(0);
    if (coefficient_traits<T>::is_zero(g[1], 0.0)) throw NotInvertible("compositional_inverse: g'(0) = 0");
    TruncatedSeries<T> h(n);
    // pw[k][m] = [X^m] h^k, filled column by column as h_m becomes known.
    std::vector<std::vector<T>> pw(n + 1, std::vector<T>(n + 1, T(0)));
    T inv1 = T(1) / g[1];
    for (std::size_t m = 1; m <= n; ++m) {
        T rest(0);
        for (std::size_t k = 2; k <= m; ++k) {
            T acc(0);
            for (std::size_t j = 1; j + (k - 1) <= m; ++j) acc += h[j] * pw[k - 1][m - j];
            pw[k][m] = acc;
            rest += g[k] * acc;
        }
        h[m] = m == 1 ? inv1 : T(-rest * inv1);
        pw[1][m] = h[m];
    }
    return h;
}

template <class T>
struct ValuationLeading {
    std::size_t e;
    T leading;
};

template <class T>
ValuationLeading<T> valuation_and_leading(const TruncatedSeries<T>& s, bool drop_constant,
                                          double float_zero_tol = default_float_zero_tol) {
    std::size_t start = drop_constant ? 1 : 0;
    for (std::size_t i = start; i <= s.order(); ++i) {
        if (!coefficient_traits<T>::is_zero(s[i], float_zero_tol)) {
            if (i == 0)
                throw InvalidArgument("valuation_and_leading: nonzero constant term; pass drop_constant");
            return {i, s[i]};
        }
    }
    throw AllZero("valuation_and_leading: series vanishes to order " + std::to_string(s.order()));
}

template <class T>
TruncatedSeries<T> derivative(const TruncatedSeries<T>& s) {
    std::size_t n = s.order();
    TruncatedSeries<T> r(n == 0 ? 0 : n - 1);
    for (std::size_t i = 1; i <= n; ++i) r[i - 1] = s[i] * T(static_cast<long>(i));
    return r;
}

template <class T>
TruncatedSeries<T> power(const TruncatedSeries<T>& s, std::size_t k) {
    TruncatedSeries<T> r = TruncatedSeries<T>::monomial(s.order(), 0);
    for (std::size_t i = 0; i < k; ++i) r = r * s;
    return r;
}

}  // namespace overflow_lab
