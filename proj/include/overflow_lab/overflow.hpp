#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "disk_map.hpp"
#include "errors.hpp"
#include "polynomial.hpp"
#include "quadrature.hpp"

namespace overflow_lab {

enum class OverflowTarget { C, P1 };

inline const char* to_string(OverflowTarget t) { return t == OverflowTarget::C ? "C" : "P1"; }

struct OverflowReport {
    double value = 0.0;
    std::string method;  // explicit, definitional, decomposition
    std::string target;  // C or P1
    double radius = 1.0;
    double tolerance = 0.0;  // size of the last accepted refinement step
    std::size_t grid = 0;
    std::optional<double> residual;  // filled when two methods ran
    bool root_conditioning = false;  // a root came within 1e-6 of the boundary circle
    std::map<std::string, double> parts;
};

namespace detail {

inline void require_nonconstant(const DiskMap& alpha, const char* what) {
    if (alpha.pole_at_origin()) throw PoleAtOrigin(std::string(what) + ": alpha(0) = infinity");
    if (alpha.is_constant()) throw ConstantMap(std::string(what) + ": alpha is constant");
}

inline double log_jet_norm(const DiskMap& alpha, double r) {
    return std::log(std::abs(alpha.jet())) + double(alpha.ramification_index()) * std::log(r);
}

}  // namespace detail

// Ex = integral of log|alpha(z1) - alpha(z2)| over the boundary torus minus log(|a_e| r^e).
inline OverflowReport overflow_to_C(const DiskMap& alpha, double r, const QuadratureSettings& s = {}) {
    detail::require_nonconstant(alpha, "overflow_to_C");
    QuadratureResult t = torus_log_double_integral(alpha, r, s);
    OverflowReport rep;
    rep.method = "explicit";
    rep.target = "C";
    rep.radius = r;
    rep.parts["torus_log_integral"] = t.value;
    rep.parts["log_jet_norm"] = detail::log_jet_norm(alpha, r);
    rep.value = t.value - rep.parts["log_jet_norm"];
    rep.tolerance = t.last_change;
    rep.grid = t.grid;
    return rep;
}

struct OracleOptions {
    int degree_bound = 8;
    double boundary_band = 1e-6;  // relative distance to |z| = r that raises the flag
    bool strict = false;          // throw RootConditioning instead of flagging
};

namespace detail {

// Monic-denominator polynomial coefficients of a polynomial DiskMap.
inline CPoly polynomial_coefficients(const DiskMap& alpha, int degree_bound, const char* what) {
    if (!alpha.is_polynomial()) throw NotPolynomial(std::string(what) + ": alpha must be a polynomial");
    if (alpha.numerator_degree() > degree_bound)
        throw DegreeTooLarge(std::string(what) + ": degree above the configured bound " +
                             std::to_string(degree_bound));
    CPoly p = alpha.numerator();
    Complex d0 = alpha.denominator()[0];
    for (auto& c : p) c /= d0;
    return p;
}

// Sum of log(r/|z|) over roots strictly inside the disk; flags roots near the circle.
inline double interior_log_sum(const std::vector<Complex>& roots, double r, double band, bool& flagged) {
    double acc = 0.0;
    for (const auto& z : roots) {
        double m = std::abs(z);
        if (std::fabs(m - r) <= band * r) flagged = true;
        if (m < r) acc += std::log(r / m);
    }
    return acc;
}

// h(w) = sum over alpha(zeta) = w, |zeta| < r of log(r/|zeta|), with the known root z0 removed.
inline double fiber_potential(const CPoly& p, Complex w, double r, double band, bool& flagged,
                              std::optional<Complex> known_root = std::nullopt) {
    CPoly q = p;
    q[0] -= w;
    if (known_root) q = deflate(q, *known_root);
    if (degree(q) <= 0) return 0.0;
    return interior_log_sum(polynomial_roots(q).roots, r, band, flagged);
}

}  // namespace detail

// term1 + term2 from the fibers of alpha, computed from polynomial roots.
inline OverflowReport overflow_definitional_oracle(const DiskMap& alpha, double r, const QuadratureSettings& s = {},
                                                   const OracleOptions& opt = {}) {
    detail::require_nonconstant(alpha, "overflow_definitional_oracle");
    if (!(r > 0.0)) throw InvalidArgument("overflow_definitional_oracle: radius must be positive");
    CPoly p = detail::polynomial_coefficients(alpha, opt.degree_bound, "overflow_definitional_oracle");
    int e = alpha.ramification_index();
    bool flagged = false;

    // alpha(z) - alpha(0) = z^e beta(z); the roots of beta are the nonzero points of the fiber.
    CPoly beta(p.begin() + e, p.end());
    double term1 = 0.0;
    std::vector<Complex> near_circle;
    if (degree(beta) > 0) {
        auto roots = polynomial_roots(beta).roots;
        term1 = detail::interior_log_sum(roots, r, opt.boundary_band, flagged);
        for (const auto& z : roots)
            if (std::fabs(std::abs(z) - r) <= 0.1 * r) near_circle.push_back(z);
    }

    // When alpha(r e(t)) passes near alpha(0), a fiber point runs into 0 and the integrand
    // picks up -log|r e(t) - z*| for the matching root z* of beta. That part integrates to
    // zero against log max(r, |z*|) and is removed before the midpoint rule.
    auto integrand = [&](double t) {
        Complex z0 = std::polar(r, 2.0 * M_PI * t);
        double v = detail::fiber_potential(p, horner(p, z0), r, opt.boundary_band, flagged, z0);
        for (const auto& z : near_circle) v += std::log(std::abs(z0 - z) / std::max(r, std::abs(z)));
        return v;
    };
    QuadratureResult t2 = integrate_periodic(integrand, s, false, "overflow_definitional_oracle");
    if (flagged && opt.strict)
        throw RootConditioning("overflow_definitional_oracle: root within the boundary band");

    OverflowReport rep;
    rep.method = "definitional";
    rep.target = "C";
    rep.radius = r;
    rep.parts["term1"] = term1;
    rep.parts["term2"] = t2.value;
    rep.value = term1 + t2.value;
    rep.tolerance = t2.last_change;
    rep.grid = t2.grid;
    rep.root_conditioning = flagged;
    return rep;
}

// Ex = 2 T(r) - integral of g_P1(alpha, alpha) - log(|a_e| r^e / (1 + |alpha(0)|^2)).
inline OverflowReport overflow_to_P1(const DiskMap& alpha, double r, const QuadratureSettings& s = {}) {
    detail::require_nonconstant(alpha, "overflow_to_P1");
    QuadratureResult T = nevanlinna_T(alpha, r, NevanlinnaMethod::area, s);
    QuadratureResult G = torus_green_P1_double_integral(alpha, r, s);
    double a0 = std::norm(alpha.value_at_origin());
    OverflowReport rep;
    rep.method = "explicit";
    rep.target = "P1";
    rep.radius = r;
    rep.parts["nevanlinna_T"] = T.value;
    rep.parts["green_double_integral"] = G.value;
    rep.parts["log_jet_norm"] = detail::log_jet_norm(alpha, r) - std::log1p(a0);
    rep.value = 2.0 * T.value - G.value - rep.parts["log_jet_norm"];
    rep.tolerance = 2.0 * T.last_change + G.last_change;
    rep.grid = G.grid;
    return rep;
}

struct NevanlinnaBound {
    double ex = 0.0;
    double bound = 0.0;
    double slack = 0.0;
    double green_integral = 0.0;  // the slack should reproduce this
    double nevanlinna_T = 0.0;
    std::string ex_method;
    std::string T_method;
};

// Ex <= 2T - e log r - log(|a_e|/(1+|alpha(0)|^2)); for pole-free maps Ex and T come
// from the C-target torus integral and the boundary form, independent of the slack integral.
inline NevanlinnaBound nevanlinna_bound_check(const DiskMap& alpha, double r, const QuadratureSettings& s = {}) {
    detail::require_nonconstant(alpha, "nevanlinna_bound_check");
    NevanlinnaBound out;
    bool holomorphic = !alpha.has_pole_in_closed_disk(r);
    if (holomorphic) {
        out.ex = overflow_to_C(alpha, r, s).value;
        out.nevanlinna_T = nevanlinna_T(alpha, r, NevanlinnaMethod::boundary, s).value;
        out.ex_method = "explicit C";
        out.T_method = "boundary";
    } else {
        out.ex = overflow_to_P1(alpha, r, s).value;
        out.nevanlinna_T = nevanlinna_T(alpha, r, NevanlinnaMethod::area, s).value;
        out.ex_method = "explicit P1";
        out.T_method = "area";
    }
    double a0 = std::norm(alpha.value_at_origin());
    out.bound = 2.0 * out.nevanlinna_T - double(alpha.ramification_index()) * std::log(r) -
                (std::log(std::abs(alpha.jet())) - std::log1p(a0));
    out.slack = out.bound - out.ex;
    out.green_integral = torus_green_P1_double_integral(alpha, r, s).value;
    return out;
}

struct AsymptoticFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // root mean square of the fit
    std::vector<double> radii;
    std::vector<double> values;
};

// Least-squares line through (log r_i, y_i).
inline AsymptoticFit fit_log_radius(const std::vector<double>& radii, const std::vector<double>& values) {
    if (radii.size() < 2 || radii.size() != values.size())
        throw InvalidArgument("fit_log_radius: need at least two (radius, value) pairs");
    AsymptoticFit fit;
    fit.radii = radii;
    fit.values = values;
    double n = double(radii.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        double x = std::log(radii[i]), y = values[i];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        double d = values[i] - (fit.slope * std::log(radii[i]) + fit.intercept);
        ss += d * d;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

// Least-squares fit of Ex(P; r) against log r.
inline AsymptoticFit polynomial_asymptotics(const DiskMap& P, const std::vector<double>& radii,
                                            const QuadratureSettings& s = {}) {
    if (!P.is_polynomial()) throw NotPolynomial("polynomial_asymptotics: P must be a polynomial");
    if (radii.size() < 2) throw InvalidArgument("polynomial_asymptotics: need at least two radii");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] > radii[i - 1])) throw InvalidArgument("polynomial_asymptotics: radii must increase");
    std::vector<double> values(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) values[i] = overflow_to_C(P, radii[i], s).value;
    return fit_log_radius(radii, values);
}

}  // namespace overflow_lab
