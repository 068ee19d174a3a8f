#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"

namespace overflow_lab {

// A real number or +infinity; reading the value of the infinite marker throws.
class ExtendedReal {
public:
    static ExtendedReal infinity() {
        ExtendedReal x;
        x.inf_ = true;
        return x;
    }
    ExtendedReal(double v = 0.0) : v_(v) {}

    bool is_infinite() const noexcept { return inf_; }
    double value() const {
        if (inf_) throw InvalidArgument("value of the infinite marker requested");
        return v_;
    }

private:
    double v_ = 0.0;
    bool inf_ = false;
};

// g(z) = log+(r/|z - a|).
struct DiskPotential {
    Complex center{0.0};
    double radius = 1.0;
};

inline ExtendedReal disk_green(const DiskPotential& g, Complex z) {
    double d = std::abs(z - g.center);
    if (d == 0.0) return ExtendedReal::infinity();
    return ExtendedReal(std::max(0.0, std::log(g.radius / d)));
}

inline double capacitary_degree(double r, double psi_prime0) {
    if (!(r > 0.0)) throw InvalidArgument("capacitary_degree: r must be positive");
    if (psi_prime0 == 0.0) throw InvalidArgument("capacitary_degree: psi'(0) must be nonzero");
    return std::log(r / std::fabs(psi_prime0));
}

enum class GreenVariant { C, P1 };

// Homogeneous coordinates (z0 : z1); the affine chart point is z1/z0.
struct ProjectivePoint {
    Complex z0{1.0};
    Complex z1{0.0};
    static ProjectivePoint affine(Complex w) { return {Complex(1.0), w}; }
};

inline ExtendedReal diagonal_green_C(Complex p1, Complex p2) {
    double d = std::abs(p1 - p2);
    if (d == 0.0) return ExtendedReal::infinity();
    return ExtendedReal(-std::log(d));
}

inline ExtendedReal diagonal_green_P1(const ProjectivePoint& p, const ProjectivePoint& q) {
    double np = std::sqrt(std::norm(p.z0) + std::norm(p.z1));
    double nq = std::sqrt(std::norm(q.z0) + std::norm(q.z1));
    if (np == 0.0 || nq == 0.0) throw InvalidPoint("diagonal_green: homogeneous pair (0,0)");
    Complex a0 = p.z0 / np, a1 = p.z1 / np, b0 = q.z0 / nq, b1 = q.z1 / nq;
    double w = std::abs(a0 * b1 - a1 * b0);
    if (w == 0.0) return ExtendedReal::infinity();
    // |a ^ b| <= 1 for unit vectors; clamp rounding so the value stays nonnegative.
    return ExtendedReal(std::max(0.0, -std::log(w)));
}

inline double capacitary_norm_P1(Complex w) { return 1.0 / (1.0 + std::norm(w)); }

namespace detail {

// Angles theta on |z - c| = s where |z - a| = rho.
inline void circle_crossings(Complex c, double s, Complex a, double rho, std::vector<double>& out) {
    Complex d = c - a;
    double dd = std::abs(d);
    if (dd == 0.0) return;
    double cosv = (rho * rho - s * s - dd * dd) / (2.0 * s * dd);
    if (cosv <= -1.0 || cosv >= 1.0) return;
    double phi = std::arg(d);
    double delta = std::acos(cosv);
    out.push_back(phi + delta);
    out.push_back(phi - delta);
}

// Mean of f over the circle |z - c| = s, split at the given kink angles.
template <class F>
double circle_mean_piecewise(F&& f, Complex c, double s, std::vector<double> kinks, double tol) {
    for (auto& k : kinks) {
        k = std::fmod(k, 2.0 * M_PI);
        if (k < 0) k += 2.0 * M_PI;
    }
    std::sort(kinks.begin(), kinks.end());
    std::vector<double> cuts;
    if (kinks.empty()) {
        cuts = {0.0, 2.0 * M_PI};
    } else {
        cuts = kinks;
        cuts.push_back(kinks.front() + 2.0 * M_PI);
    }
    double total = 0.0;
    auto g = [&](double th) { return f(c + std::polar(s, th)); };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double lo = cuts[i], hi = cuts[i + 1];
        if (hi - lo <= 0.0) continue;
        // Grade geometrically toward both kinks: next to a small truncation disk the
        // integrand changes on the scale of its radius.
        std::vector<double> pts{lo, hi};
        double half = 0.5 * (hi - lo);
        for (double h = half; h > 1e-14; h *= 0.5) {
            pts.push_back(lo + h);
            pts.push_back(hi - h);
        }
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            double a = pts[k], b = pts[k + 1];
            if (b <= a) continue;
            total += integrate_interval(g, a, b, tol * (b - a) / (2.0 * M_PI) + 1e-17, 1, 14).value;
        }
    }
    return total / (2.0 * M_PI);
}

}  // namespace detail

// Mean of g over the circle |z - b| = s, which is the integral of g against omega of DiskPotential(b, s).
inline double disk_potential_circle_mean(const DiskPotential& g, Complex b, double s, double tol = 1e-12) {
    std::vector<double> kinks;
    detail::circle_crossings(b, s, g.center, g.radius, kinks);
    auto f = [&](Complex z) {
        double d = std::abs(z - g.center);
        return std::max(0.0, std::log(g.radius / d));
    };
    return detail::circle_mean_piecewise(f, b, s, kinks, tol);
}

// g2(a1) + integral of g1 against the boundary measure of g2.
inline double star_product_integral(const DiskPotential& g1, const DiskPotential& g2, double tol = 1e-12) {
    if (g1.center == g2.center) throw CoincidentDivisors("star_product_integral: a1 = a2");
    double first = disk_green(g2, g1.center).value();
    return first + disk_potential_circle_mean(g1, g2.center, g2.radius, tol);
}

struct TruncationResult {
    double value = 0.0;
    std::vector<double> iterates;
    std::size_t steps = 0;
    double last_change = 0.0;
};

// Integral of g against the uniform measure on |z - b| = s as the limit of the
// integrals of min(g, log(r/rho_n)) along a decreasing radius schedule rho_n.
inline TruncationResult truncated_integral(const DiskPotential& g, Complex b, double s,
                                           const std::vector<double>& radii, double tol = 1e-10) {
    if (!(s > 0.0)) throw InvalidArgument("truncated_integral: circle radius must be positive");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw InvalidArgument("truncated_integral: radii must be positive");
        if (i > 0 && !(radii[i] < radii[i - 1]))
            throw InvalidArgument("truncated_integral: schedule must be strictly decreasing");
    }
    TruncationResult res;
    for (double rho : radii) {
        double cap = std::log(g.radius / rho);
        std::vector<double> kinks;
        detail::circle_crossings(b, s, g.center, g.radius, kinks);
        detail::circle_crossings(b, s, g.center, rho, kinks);
        auto f = [&](Complex z) {
            double d = std::abs(z - g.center);
            double v = d == 0.0 ? cap : std::log(g.radius / d);
            return std::max(0.0, std::min(v, cap));
        };
        double v = detail::circle_mean_piecewise(f, b, s, kinks, tol * 1e-2);
        res.iterates.push_back(v);
        ++res.steps;
        if (res.iterates.size() >= 2) {
            res.last_change = std::fabs(v - res.iterates[res.iterates.size() - 2]);
            if (res.last_change < tol) {
                res.value = v;
                return res;
            }
        }
    }
    throw NoConvergence("truncated_integral: schedule exhausted without stabilization");
}

// Geometric schedule rho_n = rho0 q^n.
inline std::vector<double> geometric_schedule(double rho0, double q, std::size_t count) {
    std::vector<double> r(count);
    for (std::size_t i = 0; i < count; ++i) r[i] = rho0 * std::pow(q, double(i));
    return r;
}

}  // namespace overflow_lab
