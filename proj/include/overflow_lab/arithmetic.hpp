#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "disk_map.hpp"
#include "errors.hpp"
#include "overflow.hpp"
#include "quadrature.hpp"
#include "rational.hpp"
#include "series.hpp"

namespace overflow_lab {

// Closed disk of radius r glued to the formal germ through psi.
struct SurfaceDescriptor {
    double radius = 1.0;
    RationalSeries psi = RationalSeries::variable(1);

    SurfaceDescriptor() = default;
    SurfaceDescriptor(double r, RationalSeries p) : radius(r), psi(std::move(p)) { validate(); }

    void validate() const {
        if (!(radius > 0.0)) throw InvalidArgument("surface: radius must be positive");
        if (sgn(psi[0]) != 0) throw NonzeroConstantTerm("surface: psi(0) must be 0");
        if (psi.order() < 1 || sgn(psi[1]) == 0) throw NotInvertible("surface: psi'(0) must be nonzero");
    }
    const Rational& lambda() const { return psi[1]; }
    double normal_degree() const { return std::log(radius) - log_abs(psi[1]); }
    bool pseudoconcave() const { return normal_degree() > 0.0; }
};

enum class LineTarget { A1, P1 };

struct MorphismToLine {
    SurfaceDescriptor surface;
    DiskMap alpha_an;
    LineTarget target = LineTarget::A1;
    // A1: alpha_hat = alpha_an o psi. P1: the coprime pair (A : B) with B/A = alpha_an o psi.
    RationalSeries alpha_hat;
    RationalSeries hom_A, hom_B;
    Integer x0 = 1, x1 = 0;  // alpha(0) = (x0 : x1), gcd 1, x0 > 0
    std::size_t certified_order = 0;
    int e = 0;
};

namespace detail {

inline RationalSeries poly_series(const QPoly& p, std::size_t order) {
    RationalSeries s(order);
    for (std::size_t i = 0; i < p.size() && i <= order; ++i) s[i] = p[i];
    return s;
}

// Index of the first non-integral coefficient, if any.
inline std::optional<std::size_t> first_non_integral(const RationalSeries& s) {
    for (std::size_t i = 0; i <= s.order(); ++i)
        if (!is_integer(s[i])) return i;
    return std::nullopt;
}

inline RationalSeries psi_to_order(const SurfaceDescriptor& d, std::size_t order) {
    if (d.psi.order() < order)
        throw OrderMismatch("psi is known to order " + std::to_string(d.psi.order()) + ", need " +
                            std::to_string(order));
    return d.psi.truncated(order);
}

inline const QPoly& exact_numerator_or_throw(const DiskMap& a, const char* what) {
    if (!a.is_exact()) throw InvalidArgument(std::string(what) + ": alpha_an needs rational coefficients");
    return *a.exact_numerator();
}

}  // namespace detail

// alpha_hat = alpha_an o psi to order N, with integrality checked coefficientwise.
inline MorphismToLine build_morphism(const SurfaceDescriptor& desc, const DiskMap& alpha_an, std::size_t order) {
    desc.validate();
    if (order < 1) throw InvalidArgument("build_morphism: order must be at least 1");
    const QPoly& num = detail::exact_numerator_or_throw(alpha_an, "build_morphism");
    if (!alpha_an.is_polynomial()) throw NotPolynomial("build_morphism: alpha_an must be a polynomial");
    if (alpha_an.is_constant()) throw ConstantMap("build_morphism: alpha_an is constant");
    QPoly p = qscale(num, Rational(1) / (*alpha_an.exact_denominator())[0]);
    MorphismToLine m;
    m.surface = desc;
    m.alpha_an = alpha_an;
    m.alpha_hat = compose(detail::poly_series(p, order), detail::psi_to_order(desc, order));
    if (auto bad = detail::first_non_integral(m.alpha_hat))
        throw NotIntegral("build_morphism: coefficient " + std::to_string(*bad) + " of alpha_hat is " +
                              to_string(m.alpha_hat[*bad]),
                          long(*bad));
    m.certified_order = order;
    m.e = int(valuation_and_leading(m.alpha_hat, true).e);
    m.x0 = 1;
    m.x1 = m.alpha_hat[0].get_num();
    return m;
}

// P1 variant: alpha_an = p/q, (A : B) = lambda (q o psi : p o psi) with lambda = x0 / q(0).
inline MorphismToLine build_morphism_P1(const SurfaceDescriptor& desc, const DiskMap& alpha_an, std::size_t order) {
    desc.validate();
    if (order < 1) throw InvalidArgument("build_morphism_P1: order must be at least 1");
    const QPoly& p = detail::exact_numerator_or_throw(alpha_an, "build_morphism_P1");
    const QPoly& q = *alpha_an.exact_denominator();
    if (sgn(q[0]) == 0) throw PoleAtOrigin("build_morphism_P1: alpha(0) = infinity");
    if (alpha_an.is_constant()) throw ConstantMap("build_morphism_P1: alpha_an is constant");
    Rational a0 = p[0] / q[0];
    MorphismToLine m;
    m.surface = desc;
    m.alpha_an = alpha_an;
    m.target = LineTarget::P1;
    m.x0 = a0.get_den();
    m.x1 = a0.get_num();
    Rational lambda = Rational(m.x0) / q[0];
    RationalSeries psi = detail::psi_to_order(desc, order);
    m.hom_A = compose(detail::poly_series(q, order), psi);
    m.hom_B = compose(detail::poly_series(p, order), psi);
    m.hom_A *= lambda;
    m.hom_B *= lambda;
    for (const auto* s : {&m.hom_A, &m.hom_B})
        if (auto bad = detail::first_non_integral(*s))
            throw NotIntegral("build_morphism_P1: coefficient " + std::to_string(*bad) +
                                  " of the homogeneous pair is " + to_string((*s)[*bad]),
                              long(*bad));
    m.certified_order = order;
    RationalSeries w = m.hom_B;
    w *= Rational(m.x0);
    RationalSeries t = m.hom_A;
    t *= Rational(m.x1);
    w -= t;
    m.e = int(valuation_and_leading(w, true).e);
    // The affine series B/A, kept for display; it is integral because A(0) = x0 may not be 1.
    m.alpha_hat = m.hom_B;
    return m;
}

// Norm from K to Q applied to a_e; only K = Q ships, where the norm is the identity.
using NormHook = std::function<Rational(const Rational&)>;

// log |N(a_e)| for an integral alpha_hat; 0 exactly when a_e is a unit.
inline double arithmetic_excess(const RationalSeries& alpha_hat, const NormHook& norm = {}) {
    if (auto bad = detail::first_non_integral(alpha_hat))
        throw NotIntegral("arithmetic_excess: coefficient " + std::to_string(*bad) + " is not an integer",
                          long(*bad));
    Rational ae = valuation_and_leading(alpha_hat, true).leading;
    return log_abs(norm ? norm(ae) : ae);
}

// Leading coefficient of x0 B - x1 A, which plays the role of a_e for the P1 target.
inline Rational p1_excess_coefficient(const MorphismToLine& m) {
    RationalSeries w = m.hom_B;
    w *= Rational(m.x0);
    RationalSeries t = m.hom_A;
    t *= Rational(m.x1);
    w -= t;
    return valuation_and_leading(w, true).leading;
}

inline double finite_excess(const MorphismToLine& m) {
    if (m.target == LineTarget::A1) return arithmetic_excess(m.alpha_hat);
    return log_abs(p1_excess_coefficient(m));
}

// Height of (x0 : x1) with coprime integer coordinates.
inline double height_P1(const Integer& x0, const Integer& x1) {
    if (x0 == 0 && x1 == 0) throw InvalidPoint("height_P1: (0, 0)");
    // log of x0^2 + x1^2 through the exact integer, then halved
    Integer s = x0 * x0 + x1 * x1;
    return 0.5 * log_abs(Rational(s));
}

inline double height_P1(const Rational& a) { return height_P1(a.get_den(), a.get_num()); }

struct SelfIntersection {
    double value = 0.0;
    std::map<std::string, double> parts;
    std::optional<double> disputed_doubled;  // twice the torus integral, reported beside the accepted value
    std::optional<double> upper_bound;
    std::optional<double> residual;  // against a second route when one ran
};

// e deg N + Ex(alpha_hat) + Ex(alpha_an -> C).
inline SelfIntersection self_intersection_A1(const MorphismToLine& m, const QuadratureSettings& s = {}) {
    if (m.target != LineTarget::A1) throw InvalidArgument("self_intersection_A1: morphism targets P1");
    OverflowReport ex = overflow_to_C(m.alpha_an, m.surface.radius, s);
    SelfIntersection out;
    out.parts["normal"] = double(m.e) * m.surface.normal_degree();
    out.parts["finite_excess"] = arithmetic_excess(m.alpha_hat);
    out.parts["archimedean_excess"] = ex.value;
    out.value = out.parts["normal"] + out.parts["finite_excess"] + out.parts["archimedean_excess"];
    out.parts["torus_log_integral"] = ex.parts["torus_log_integral"];
    out.disputed_doubled = 2.0 * ex.parts["torus_log_integral"];
    return out;
}

struct DirectOracleOptions {
    int directions = 8;
    double delta_scale = 1e-2;  // delta = scale * |a_e| R^e, further capped by the distance to the boundary image
    OracleOptions roots;
};

// kappa + integral of h against omega(h), h the pushforward of the disk Green function.
inline SelfIntersection self_intersection_direct_oracle(const MorphismToLine& m, const QuadratureSettings& s = {},
                                                        const DirectOracleOptions& opt = {}) {
    if (m.target != LineTarget::A1) throw InvalidArgument("self_intersection_direct_oracle: morphism targets P1");
    const DiskMap& a = m.alpha_an;
    const double R = m.surface.radius;
    CPoly p = detail::polynomial_coefficients(a, opt.roots.degree_bound, "self_intersection_direct_oracle");
    const Complex Q = a.value_at_origin();
    bool flagged = false;

    // H(w) = h(w) + log|w - Q| is harmonic near Q, so its mean over M equally spaced
    // directions on |w - Q| = delta equals H(Q) up to O(delta^M).
    double dist = INFINITY;
    for (std::size_t j = 0; j < 4096; ++j)
        dist = std::min(dist, std::abs(a(std::polar(R, 2.0 * M_PI * double(j) / 4096.0)) - Q));
    double delta = opt.delta_scale * std::abs(a.jet()) * std::pow(R, a.ramification_index());
    if (dist > 0.0) delta = std::min(delta, 0.25 * dist);
    auto kappa_at = [&](double d) {
        double acc = 0.0;
        for (int k = 0; k < opt.directions; ++k) {
            Complex w = Q + std::polar(d, 2.0 * M_PI * (double(k) + 0.5) / double(opt.directions));
            acc += detail::fiber_potential(p, w, R, opt.roots.boundary_band, flagged) + std::log(d);
        }
        return acc / double(opt.directions);
    };
    double k1 = kappa_at(delta), k2 = kappa_at(0.5 * delta);
    double w = std::ldexp(1.0, opt.directions);
    double kappa = (w * k2 - k1) / (w - 1.0);

    OverflowReport orc = overflow_definitional_oracle(a, R, s, opt.roots);
    SelfIntersection out;
    out.parts["kappa"] = kappa;
    out.parts["kappa_half_step_change"] = std::fabs(k2 - k1);
    out.parts["boundary_term"] = orc.parts["term2"];
    out.value = kappa + orc.parts["term2"];
    if ((flagged || orc.root_conditioning) && opt.roots.strict)
        throw RootConditioning("self_intersection_direct_oracle: root within the boundary band");
    return out;
}

// 2 ht(alpha(0)) + 2 T(r) - integral of g_P1(alpha, alpha).
inline SelfIntersection self_intersection_P1(const MorphismToLine& m, const QuadratureSettings& s = {}) {
    if (m.target != LineTarget::P1) throw InvalidArgument("self_intersection_P1: morphism targets A1");
    const double R = m.surface.radius;
    QuadratureResult T = nevanlinna_T(m.alpha_an, R, NevanlinnaMethod::area, s);
    QuadratureResult G = torus_green_P1_double_integral(m.alpha_an, R, s);
    SelfIntersection out;
    out.parts["height"] = height_P1(m.x0, m.x1);
    out.parts["nevanlinna_T"] = T.value;
    out.parts["green_double_integral"] = G.value;
    out.value = 2.0 * out.parts["height"] + 2.0 * T.value - G.value;
    out.upper_bound = 2.0 * out.parts["height"] + 2.0 * T.value;

    // Same quantity assembled as e deg N + Ex(alpha_hat) + Ex(alpha_an -> P1).
    double a0 = std::norm(m.alpha_an.value_at_origin());
    double ex_arch = 2.0 * T.value - G.value -
                     (std::log(std::abs(m.alpha_an.jet())) + double(m.alpha_an.ramification_index()) * std::log(R) -
                      std::log1p(a0));
    out.parts["normal"] = double(m.e) * m.surface.normal_degree();
    out.parts["finite_excess"] = finite_excess(m);
    out.parts["archimedean_excess"] = ex_arch;
    double decomposition = out.parts["normal"] + out.parts["finite_excess"] + ex_arch;
    out.parts["decomposition"] = decomposition;
    out.residual = std::fabs(decomposition - out.value);
    return out;
}

struct DInvariant {
    double value = 0.0;
    int e = 0;
    double normal_degree = 0.0;
    double finite_excess = 0.0;
    double archimedean_excess = 0.0;
};

inline DInvariant D_invariant(const MorphismToLine& m, const QuadratureSettings& s = {}) {
    if (!m.surface.pseudoconcave())
        throw NotPseudoconcave("D_invariant: log(r/|psi'(0)|) = " + std::to_string(m.surface.normal_degree()) +
                               " is not positive");
    DInvariant d;
    d.e = m.e;
    d.normal_degree = m.surface.normal_degree();
    d.finite_excess = finite_excess(m);
    if (m.target == LineTarget::A1) {
        d.archimedean_excess = overflow_to_C(m.alpha_an, m.surface.radius, s).value;
    } else {
        d.archimedean_excess = overflow_to_P1(m.alpha_an, m.surface.radius, s).value;
    }
    d.value = double(d.e) + (d.finite_excess + d.archimedean_excess) / d.normal_degree;
    return d;
}

struct HolonomyBound {
    long bound = 0;       // floor of D
    double D = 0.0;
    double cdt_bound = 0.0;  // Euler's number times the mean of log+|alpha| over the circle, per unit normal degree
};

// Slack allowed below an integer before flooring D; quadrature noise can put D = k at k - 1e-12.
inline constexpr double holonomy_floor_slack = 1e-6;

inline HolonomyBound holonomy_degree_bound(const MorphismToLine& m, const QuadratureSettings& s = {}) {
    DInvariant d = D_invariant(m, s);
    HolonomyBound h;
    h.D = d.value;
    h.bound = long(std::floor(d.value + holonomy_floor_slack));
    const double R = m.surface.radius;
    auto f = [&](double t) {
        return std::max(0.0, std::log(std::abs(m.alpha_an(std::polar(R, 2.0 * M_PI * t)))));
    };
    double mean = integrate_periodic(f, s, false, "holonomy_degree_bound").value;
    h.cdt_bound = std::exp(1.0) * mean / d.normal_degree;
    return h;
}

// Sum over i >= 0 of (n + 1 - i d)^+.
inline Integer dim_bound_C(long n, long d) {
    if (d < 1) throw InvalidArgument("dim_bound_C: d must be at least 1");
    if (n < 0) return 0;
    Integer m = n / d;  // last i with a positive term
    Integer np1 = n + 1;
    Integer dd = d;
    return (m + 1) * np1 - dd * m * (m + 1) / 2;
}

// Sum over 0 <= i <= floor(n / CD) of (1 + floor((n - i CD)/mu))^+.
inline Integer dim_bound_CNB(long n, const Rational& CD, long mu) {
    if (sgn(CD) <= 0) throw InvalidArgument("dim_bound_CNB: CD must be positive");
    if (mu < 1) throw InvalidArgument("dim_bound_CNB: mu must be at least 1");
    if (n < 0) return 0;
    Integer top = floor_of(Rational(n) / CD);
    Integer total = 0;
    Rational mu_q(mu);
    for (Integer i = 0; i <= top; ++i) {
        Integer t = 1 + floor_of((Rational(n) - Rational(i) * CD) / mu_q);
        if (t > 0) total += t;
    }
    return total;
}

struct GrelemResult {
    RationalSeries alpha_hat;  // integer coefficients, X^e + higher terms
    RationalSeries composed;   // alpha_hat o psi^{-1}
    Rational lambda;
    int e = 1;
    std::size_t order = 0;
    bool certificate = false;
    bool convergent = false;             // |lambda| > 1, where the sup bound applies
    std::optional<double> sup_bound;     // on the closed unit disk
};

// Greedy integer coefficients so that alpha_hat o psi^{-1} has |a_n| <= |lambda|^{-n}/2 for n > e.
inline GrelemResult grelem_construct(const RationalSeries& psi, int e, std::size_t order) {
    if (e < 1) throw InvalidArgument("grelem_construct: e must be at least 1");
    if (order < std::size_t(e)) throw InvalidArgument("grelem_construct: order below e");
    if (sgn(psi[0]) != 0) throw NonzeroConstantTerm("grelem_construct: psi(0) must be 0");
    if (psi.order() < order) throw OrderMismatch("grelem_construct: psi is shorter than the requested order");
    RationalSeries ps = psi.truncated(order);
    if (sgn(ps[1]) == 0) throw NotInvertible("grelem_construct: psi'(0) = 0");
    GrelemResult g;
    g.lambda = ps[1];
    g.e = e;
    g.order = order;
    RationalSeries phi = compositional_inverse(ps);

    // pw[m] = phi^m; [X^n] phi^n = lambda^{-n}.
    std::vector<RationalSeries> pw(order + 1);
    pw[0] = RationalSeries::monomial(order, 0);
    for (std::size_t m = 1; m <= order; ++m) pw[m] = pw[m - 1] * phi;

    g.alpha_hat = RationalSeries(order);
    g.alpha_hat[std::size_t(e)] = 1;
    Rational lam_n(1);
    for (int i = 0; i < e; ++i) lam_n *= g.lambda;
    for (std::size_t n = std::size_t(e) + 1; n <= order; ++n) {
        lam_n *= g.lambda;
        Rational P(0);
        for (std::size_t m = std::size_t(e); m < n; ++m)
            if (sgn(g.alpha_hat[m]) != 0) P += g.alpha_hat[m] * pw[m][n];
        g.alpha_hat[n] = Rational(round_half_toward_zero(-lam_n * P));
    }

    g.composed = compose(g.alpha_hat, phi);
    Rational lam_e(1);
    for (int i = 0; i < e; ++i) lam_e *= g.lambda;
    Rational abs_inv = abs(Rational(1) / g.lambda);
    Rational bound = abs_inv;
    for (int i = 1; i < e; ++i) bound *= abs_inv;
    for (std::size_t n = 0; n <= order; ++n) {
        bool ok;
        if (n < std::size_t(e)) {
            ok = sgn(g.composed[n]) == 0;
        } else if (n == std::size_t(e)) {
            ok = g.composed[n] * lam_e == 1;  // lambda^{-e}, sign included
        } else {
            bound *= abs_inv;
            ok = 2 * abs(g.composed[n]) <= bound;
        }
        if (!ok)
            throw CertificateViolation("grelem_construct: coefficient " + std::to_string(n) + " of alpha_hat o psi^-1 is " +
                                           to_string(g.composed[n]),
                                       long(n));
    }
    g.certificate = true;
    double lam = std::fabs(to_double(g.lambda));
    g.convergent = lam > 1.0;
    if (g.convergent) g.sup_bound = (1.0 - 0.5 / lam) / (1.0 - 1.0 / lam) * std::pow(lam, -double(e));
    return g;
}

// Largest |sum a_n z^n| over samples of the unit circle, for comparison with the sup bound.
inline double grelem_sup_norm(const GrelemResult& g, std::size_t samples = 4096) {
    FloatSeries c = to_float(g.composed);
    double best = 0.0;
    for (std::size_t j = 0; j < samples; ++j) {
        Complex z = std::polar(1.0, 2.0 * M_PI * double(j) / double(samples));
        Complex acc = 0.0;
        for (std::size_t k = c.order() + 1; k-- > 0;) acc = acc * z + c[k];
        best = std::max(best, std::abs(acc));
    }
    return best;
}

}  // namespace overflow_lab
