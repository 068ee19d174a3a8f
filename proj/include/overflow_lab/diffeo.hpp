#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "parallel.hpp"
#include "rational.hpp"
#include "series.hpp"

namespace overflow_lab {

// X + a_2 X^2 + ... + a_{n+1} X^{n+1} mod X^{n+2}.
template <class T>
class TruncatedDiffeo {
public:
    explicit TruncatedDiffeo(std::size_t level = 0) : n_(level), s_(TruncatedSeries<T>::variable(level + 1)) {}

    // coeffs = (a_2, ..., a_{n+1})
    static TruncatedDiffeo from_coefficients(const std::vector<T>& coeffs) {
        TruncatedDiffeo g(coeffs.size());
        for (std::size_t i = 0; i < coeffs.size(); ++i) g.s_[i + 2] = coeffs[i];
        return g;
    }
    static TruncatedDiffeo from_series(const TruncatedSeries<T>& s, std::size_t level) {
        if (s.order() < level + 1) throw OrderMismatch("diffeo: series too short for the level");
        if (!coefficient_traits<T>::is_zero(s[0], 0.0) || s[1] != T(1))
            throw InvalidArgument("diffeo: series must be X + higher terms");
        TruncatedDiffeo g(level);
        g.s_ = s.truncated(level + 1);
        return g;
    }

    std::size_t level() const noexcept { return n_; }
    const TruncatedSeries<T>& series() const noexcept { return s_; }
    const T& coeff(std::size_t i) const { return s_[i]; }
    T& coeff(std::size_t i) { return s_[i]; }
    std::vector<T> coefficients() const {
        std::vector<T> v;
        for (std::size_t i = 2; i <= n_ + 1; ++i) v.push_back(s_[i]);
        return v;
    }

    friend bool operator==(const TruncatedDiffeo& a, const TruncatedDiffeo& b) {
        return a.n_ == b.n_ && a.s_.coefficients() == b.s_.coefficients();
    }

private:
    std::size_t n_;
    TruncatedSeries<T> s_;
};

template <class T>
TruncatedDiffeo<T> group_compose(const TruncatedDiffeo<T>& x, const TruncatedDiffeo<T>& y) {
    if (x.level() != y.level()) throw LevelMismatch("group_compose: levels differ");
    return TruncatedDiffeo<T>::from_series(compose(x.series(), y.series()), x.level());
}

template <class T>
TruncatedDiffeo<T> group_invert(const TruncatedDiffeo<T>& x) {
    return TruncatedDiffeo<T>::from_series(compositional_inverse(x.series()), x.level());
}

// a X^e + c_{e+1} X^{e+1} + ... + c_{e+n} X^{e+n} mod X^{n+e+1}.
template <class T>
struct OrbitElement {
    int e = 1;
    T a = T(1);
    std::size_t level = 0;
    TruncatedSeries<T> s;

    // trailing = (c_{e+1}, ..., c_{e+n})
    static OrbitElement make(int e, const T& a, const std::vector<T>& trailing) {
        if (e < 1) throw InvalidArgument("orbit element: e must be at least 1");
        if (coefficient_traits<T>::is_zero(a, 0.0)) throw InvalidArgument("orbit element: a must be nonzero");
        OrbitElement phi;
        phi.e = e;
        phi.a = a;
        phi.level = trailing.size();
        phi.s = TruncatedSeries<T>(std::size_t(e) + trailing.size());
        phi.s[std::size_t(e)] = a;
        for (std::size_t j = 0; j < trailing.size(); ++j) phi.s[std::size_t(e) + 1 + j] = trailing[j];
        return phi;
    }
    std::vector<T> trailing() const {
        std::vector<T> v;
        for (std::size_t j = 1; j <= level; ++j) v.push_back(s[std::size_t(e) + j]);
        return v;
    }
    friend bool operator==(const OrbitElement& x, const OrbitElement& y) {
        return x.e == y.e && x.a == y.a && x.level == y.level && x.s.coefficients() == y.s.coefficients();
    }
};

namespace detail {

// Pads g to order m with zero coefficients; valid because coefficient e+j of phi o g
// only involves g up to X^{j+1}.
template <class T>
TruncatedSeries<T> padded(const TruncatedSeries<T>& g, std::size_t m) {
    TruncatedSeries<T> r(m);
    for (std::size_t i = 0; i <= g.order() && i <= m; ++i) r[i] = g[i];
    return r;
}

}  // namespace detail

// g . phi = phi o g^{-1}
template <class T>
OrbitElement<T> act(const TruncatedDiffeo<T>& g, const OrbitElement<T>& phi) {
    if (g.level() != phi.level) throw LevelMismatch("act: diffeo and orbit element have different levels");
    TruncatedSeries<T> ginv = compositional_inverse(g.series());
    OrbitElement<T> out = phi;
    out.s = compose(phi.s, detail::padded(ginv, phi.s.order()));
    return out;
}

struct FundamentalReduction {
    TruncatedDiffeo<Rational> gamma;  // act(gamma, delta) = phi
    OrbitElement<Rational> delta;     // trailing coefficients in [0, e|a|)
};

// Chooses b_k one coefficient at a time: acting by X + b X^k shifts c_{e+k-1} by -a e b
// and leaves the lower coefficients alone.
inline FundamentalReduction reduce_to_fundamental(const OrbitElement<Rational>& phi) {
    for (std::size_t i = 0; i <= phi.s.order(); ++i)
        if (!is_integer(phi.s[i]))
            throw NotIntegral("reduce_to_fundamental: coefficient " + std::to_string(i) + " is not an integer", long(i));
    const std::size_t n = phi.level;
    const Integer m = phi.a.get_num() * phi.e;
    const Integer am = abs(m);
    TruncatedDiffeo<Rational> total(n);
    OrbitElement<Rational> cur = phi;
    for (std::size_t k = 2; k <= n + 1; ++k) {
        std::size_t idx = std::size_t(phi.e) + k - 1;
        Integer c = cur.s[idx].get_num();
        Integer q;
        mpz_fdiv_q(q.get_mpz_t(), c.get_mpz_t(), am.get_mpz_t());
        Integer b = sgn(m) > 0 ? q : Integer(-q);
        if (b == 0) continue;
        TruncatedDiffeo<Rational> x(n);
        x.coeff(k) = Rational(b);
        cur = act(x, cur);
        total = group_compose(x, total);
    }
    return {group_invert(total), cur};
}

inline bool in_fundamental_domain(const OrbitElement<Rational>& phi) {
    Rational bound(abs(phi.a.get_num() * phi.e));
    for (std::size_t j = 1; j <= phi.level; ++j) {
        const Rational& c = phi.s[std::size_t(phi.e) + j];
        if (!is_integer(c) || sgn(c) < 0 || c >= bound) return false;
    }
    return true;
}

// Doubles in [0, 1) from the top 53 bits, identical on every platform.
inline double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

inline std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{std::uint32_t(seed & 0xffffffffu), std::uint32_t(seed >> 32), std::uint32_t(stream & 0xffffffffu),
                      std::uint32_t(stream >> 32)};
    return std::mt19937_64(seq);
}

inline TruncatedDiffeo<double> haar_sample(std::size_t n, std::mt19937_64& rng) {
    TruncatedDiffeo<double> g(n);
    for (std::size_t i = 2; i <= n + 1; ++i) g.coeff(i) = uniform01(rng);
    return g;
}

inline TruncatedDiffeo<double> haar_sample(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("haar_sample: level must be at least 1");
    auto rng = seeded_engine(seed);
    return haar_sample(n, rng);
}

// Representative of h D_n(Z) with coefficients in [0, 1): h o (X + b X^j) moves only a_j and above.
inline TruncatedDiffeo<double> reduce_mod_integers(TruncatedDiffeo<double> h) {
    const std::size_t n = h.level();
    for (std::size_t j = 2; j <= n + 1; ++j) {
        double b = -std::floor(h.coeff(j));
        if (b == 0.0) continue;
        TruncatedDiffeo<double> x(n);
        x.coeff(j) = b;
        h = group_compose(h, x);
        // guard the half-open interval against rounding at the top end
        if (h.coeff(j) >= 1.0) h.coeff(j) -= 1.0;
        if (h.coeff(j) < 0.0) h.coeff(j) = 0.0;
    }
    return h;
}

struct JacobianReport {
    double determinant = 1.0;
    double determinant_half_step = 1.0;
    double expected = 1.0;  // (e a)^n
    double relative_error = 0.0;
};

// Central differences of g -> phi o g in the coordinates (a_2..a_{n+1}) -> (c_{e+1}..c_{e+n}).
inline JacobianReport jacobian_check(const OrbitElement<double>& phi, const TruncatedDiffeo<double>& g, double h = 1e-3,
                                     double stability_tol = 1e-6) {
    if (g.level() != phi.level) throw LevelMismatch("jacobian_check: levels differ");
    const std::size_t n = phi.level;
    if (n > 6) throw InvalidArgument("jacobian_check: level above 6");
    if (!(h > 0.0)) throw InvalidArgument("jacobian_check: step must be positive");
    const std::size_t e = std::size_t(phi.e);
    JacobianReport rep;
    rep.expected = std::pow(double(phi.e) * phi.a, double(n));
    if (n == 0) return rep;
    auto image = [&](const TruncatedDiffeo<double>& x) {
        FloatSeries c = compose(phi.s, detail::padded(x.series(), phi.s.order()));
        Eigen::VectorXd v(n);
        for (std::size_t j = 0; j < n; ++j) v[Eigen::Index(j)] = c[e + 1 + j];
        return v;
    };
    auto det_at = [&](double step) {
        Eigen::MatrixXd J(n, n);
        for (std::size_t k = 0; k < n; ++k) {
            TruncatedDiffeo<double> up = g, dn = g;
            up.coeff(k + 2) += step;
            dn.coeff(k + 2) -= step;
            J.col(Eigen::Index(k)) = (image(up) - image(dn)) / (2.0 * step);
        }
        return J.partialPivLu().determinant();
    };
    rep.determinant = det_at(h);
    rep.determinant_half_step = det_at(0.5 * h);
    double scale = std::max(std::fabs(rep.determinant), std::fabs(rep.determinant_half_step));
    if (std::fabs(rep.determinant - rep.determinant_half_step) > stability_tol * scale)
        throw StepTooSmall("jacobian_check: determinant changes between h and h/2");
    rep.relative_error = std::fabs(rep.determinant - rep.expected) / std::fabs(rep.expected);
    return rep;
}

struct MeasureParams {
    int e = 1;
    long a = 1;
    double rho = 2.0;
    double R = 1.0;
    std::size_t n = 3;
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
    std::size_t shards = 8;
};

struct MeasureReport {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::size_t hits = 0;
    std::size_t samples = 0;
    double stated_bound = 0.0;    // (2R)^n rho^{-(n+2e+2)(n-1)/2}
    double product_bound = 0.0;  // volume of the box, (2R)^n rho^{-(e+1) - ... - (e+n)}
    bool informative = true;     // rho > 1
    std::size_t enumeration_size = 0;
    std::uint64_t seed = 0;
    std::size_t shards = 0;
};

inline constexpr double enumeration_cap = 1e4;

namespace detail {

// Is there d in Delta(e,a)_n with every coefficient of d o h inside the box?
// Coefficient e+j is d_j + F_j(d_1..d_{j-1}), so each level admits an integer interval.
inline bool box_hit(const std::vector<FloatSeries>& pw, int e, long a, long range, const std::vector<double>& bound,
                    std::vector<double>& d, std::size_t j) {
    const std::size_t n = bound.size();
    if (j > n) return true;
    std::size_t idx = std::size_t(e) + j;
    double F = double(a) * pw[0][idx];
    for (std::size_t i = 1; i < j; ++i) F += d[i] * pw[i][idx];
    double lo = std::max(0.0, std::ceil(-bound[j - 1] - F));
    double hi = std::min(double(range - 1), std::floor(bound[j - 1] - F));
    for (double v = lo; v <= hi; v += 1.0) {
        d[j] = v;
        if (box_hit(pw, e, a, range, bound, d, j + 1)) return true;
    }
    return false;
}

}  // namespace detail

// Monte Carlo over Haar samples g of the event that some d in Delta(e,a)_n has g . d in the box
// |c_i| <= R rho^{-i}, i = e+1..e+n.
inline MeasureReport measure_bound_mc(const MeasureParams& p) {
    if (p.e < 1) throw InvalidArgument("measure_bound_mc: e must be at least 1");
    if (p.a == 0) throw InvalidArgument("measure_bound_mc: a must be nonzero");
    if (p.n < 1 || p.n > 4) throw InvalidArgument("measure_bound_mc: level must lie in [1, 4]");
    if (!(p.rho > 0.0) || !(p.R >= 0.0)) throw InvalidArgument("measure_bound_mc: need rho > 0 and R >= 0");
    if (p.samples < 1 || p.shards < 1) throw InvalidArgument("measure_bound_mc: samples and shards must be positive");
    const long range = long(p.e) * std::labs(p.a);
    double count = std::pow(double(range), double(p.n));
    if (count > enumeration_cap)
        throw EnumerationTooLarge("measure_bound_mc: (e|a|)^n = " + std::to_string(count) + " exceeds 1e4");

    MeasureReport rep;
    rep.enumeration_size = std::size_t(count);
    rep.samples = p.samples;
    rep.seed = p.seed;
    rep.shards = p.shards;
    rep.informative = p.rho > 1.0;
    const double n = double(p.n), e = double(p.e);
    rep.stated_bound = std::pow(2.0 * p.R, n) * std::pow(p.rho, -(n + 2.0 * e + 2.0) * (n - 1.0) / 2.0);
    rep.product_bound = std::pow(2.0 * p.R, n) * std::pow(p.rho, -n * (2.0 * e + n + 1.0) / 2.0);

    std::vector<double> bound(p.n);
    for (std::size_t j = 1; j <= p.n; ++j) bound[j - 1] = p.R * std::pow(p.rho, -double(p.e + int(j)));

    std::vector<std::size_t> hits(p.shards, 0);
    parallel_for(p.shards, [&](std::size_t s) {
        std::size_t quota = p.samples / p.shards + (s < p.samples % p.shards ? 1 : 0);
        auto rng = seeded_engine(p.seed, s);
        const std::size_t order = std::size_t(p.e) + p.n;
        std::vector<FloatSeries> pw(p.n);
        std::vector<double> d(p.n + 1, 0.0);
        for (std::size_t k = 0; k < quota; ++k) {
            TruncatedDiffeo<double> g = haar_sample(p.n, rng);
            FloatSeries h = detail::padded(compositional_inverse(g.series()), order);
            // pw[i] = h^{e+i}
            pw[0] = power(h, std::size_t(p.e));
            for (std::size_t i = 1; i < p.n; ++i) pw[i] = pw[i - 1] * h;
            if (detail::box_hit(pw, p.e, p.a, range, bound, d, 1)) ++hits[s];
        }
    });
    for (auto h : hits) rep.hits += h;
    double pr = double(rep.hits) / double(p.samples);
    rep.estimate = pr;
    rep.stderr_ = std::sqrt(pr * (1.0 - pr) / double(p.samples));
    return rep;
}

}  // namespace overflow_lab
