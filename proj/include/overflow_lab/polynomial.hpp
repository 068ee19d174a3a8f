#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace overflow_lab {

using Complex = std::complex<double>;

// Coefficients in ascending order of degree.
using CPoly = std::vector<Complex>;
using QPoly = std::vector<Rational>;

template <class P>
void trim(P& p) {
    while (p.size() > 1 && p.back() == typename P::value_type(0)) p.pop_back();
    if (p.empty()) p.push_back(typename P::value_type(0));
}

template <class P>
int degree(const P& p) {
    for (std::size_t i = p.size(); i-- > 0;)
        if (!(p[i] == typename P::value_type(0))) return int(i);
    return -1;
}

inline Complex horner(const CPoly& p, Complex z) {
    Complex acc(0.0);
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * z + p[i];
    return acc;
}

// Value and first derivative in one pass.
inline void horner2(const CPoly& p, Complex z, Complex& val, Complex& der) {
    val = 0.0;
    der = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) {
        der = der * z + val;
        val = val * z + p[i];
    }
}

inline CPoly derivative(const CPoly& p) {
    if (p.size() <= 1) return CPoly{0.0};
    CPoly d(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * double(i);
    return d;
}

inline CPoly to_complex(const QPoly& p) {
    CPoly c(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) c[i] = p[i].get_d();
    return c;
}

// Divides p by (z - root); the remainder is discarded.
inline CPoly deflate(const CPoly& p, Complex root) {
    int d = degree(p);
    if (d <= 0) return CPoly{0.0};
    CPoly q(std::size_t(d), 0.0);
    Complex acc = p[std::size_t(d)];
    for (int i = d - 1; i >= 0; --i) {
        q[std::size_t(i)] = acc;
        acc = acc * root + p[std::size_t(i)];
    }
    return q;
}

struct RootSet {
    std::vector<Complex> roots;
    double max_residual = 0.0;  // max |p(z)| / sum |p_k||z|^k over the roots
    int iterations = 0;
};

inline double relative_residual(const CPoly& p, Complex z) {
    Complex val(0.0);
    double scale = 0.0;
    double az = std::abs(z);
    for (std::size_t i = p.size(); i-- > 0;) {
        val = val * z + p[i];
        scale = scale * az + std::abs(p[i]);
    }
    return scale == 0.0 ? 0.0 : std::abs(val) / scale;
}

// Aberth-Ehrlich simultaneous iteration followed by Newton polishing.
inline RootSet polynomial_roots(CPoly p, double residual_target = 1e-10, int max_iter = 500) {
    trim(p);
    int d = degree(p);
    RootSet out;
    if (d <= 0) return out;
    if (d == 1) {
        out.roots.push_back(-p[0] / p[1]);
        return out;
    }
    const std::size_t n = std::size_t(d);
    // Initial guesses on a circle of radius from the Fujiwara-type bound, slightly rotated.
    double lead = std::abs(p[n]);
    double rad = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        rad = std::max(rad, std::pow(std::abs(p[k]) / lead, 1.0 / double(n - k)));
    if (rad == 0.0) rad = 1.0;
    std::vector<Complex> z(n);
    for (std::size_t k = 0; k < n; ++k) {
        double th = 2.0 * M_PI * (double(k) + 0.25) / double(n) + 0.4;
        z[k] = std::polar(rad, th);
    }
    std::vector<bool> done(n, false);
    int it = 0;
    for (; it < max_iter; ++it) {
        std::size_t moving = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (done[k]) continue;
            Complex val, der;
            horner2(p, z[k], val, der);
            if (val == Complex(0.0)) {
                done[k] = true;
                continue;
            }
            Complex ratio = val / der;
            Complex s(0.0);
            for (std::size_t j = 0; j < n; ++j)
                if (j != k) s += 1.0 / (z[k] - z[j]);
            Complex step = ratio / (1.0 - ratio * s);
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) step = ratio;
            z[k] -= step;
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z[k])))
                done[k] = true;
            else
                ++moving;
        }
        if (moving == 0) break;
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (int j = 0; j < 3; ++j) {
            Complex val, der;
            horner2(p, z[k], val, der);
            if (der == Complex(0.0)) break;
            Complex step = val / der;
            if (std::abs(step) > 1e-8 * std::max(1.0, std::abs(z[k]))) break;
            z[k] -= step;
        }
    }
    out.iterations = it;
    for (auto& r : z) out.max_residual = std::max(out.max_residual, relative_residual(p, r));
    if (out.max_residual > residual_target)
        throw RootConditioning("polynomial_roots: residual " + std::to_string(out.max_residual) +
                               " above target");
    out.roots = std::move(z);
    return out;
}

// Exact polynomial arithmetic over Q.
inline QPoly qadd(const QPoly& a, const QPoly& b) {
    QPoly r(std::max(a.size(), b.size()), Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    trim(r);
    return r;
}

inline QPoly qscale(QPoly a, const Rational& s) {
    for (auto& x : a) x *= s;
    trim(a);
    return a;
}

inline QPoly qsub(const QPoly& a, const QPoly& b) { return qadd(a, qscale(b, Rational(-1))); }

inline QPoly qmul(const QPoly& a, const QPoly& b) {
    QPoly r(a.size() + b.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (sgn(a[i]) == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    trim(r);
    return r;
}

inline void qdivmod(const QPoly& a, const QPoly& b, QPoly& q, QPoly& r) {
    int db = degree(b);
    if (db < 0) throw InvalidArgument("polynomial division by zero");
    r = a;
    trim(r);
    int da = degree(r);
    q.assign(std::size_t(std::max(da - db, 0) + 1), Rational(0));
    while ((da = degree(r)) >= db) {
        Rational c = r[std::size_t(da)] / b[std::size_t(db)];
        std::size_t shift = std::size_t(da - db);
        q[shift] = c;
        for (int i = 0; i <= db; ++i) r[shift + std::size_t(i)] -= c * b[std::size_t(i)];
        trim(r);
        if (da == 0) break;
    }
    trim(q);
}

inline QPoly qgcd(QPoly a, QPoly b) {
    trim(a);
    trim(b);
    while (degree(b) >= 0) {
        QPoly q, r;
        qdivmod(a, b, q, r);
        a = std::move(b);
        b = std::move(r);
    }
    int d = degree(a);
    if (d < 0) return QPoly{Rational(0)};
    return qscale(a, Rational(1) / a[std::size_t(d)]);
}

inline Rational qeval(const QPoly& p, const Rational& x) {
    Rational acc(0);
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
    return acc;
}

}  // namespace overflow_lab
