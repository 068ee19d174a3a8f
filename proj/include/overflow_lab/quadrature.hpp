#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "disk_map.hpp"
#include "errors.hpp"
#include "parallel.hpp"

namespace overflow_lab {

struct QuadratureSettings {
    std::size_t grid = 256;  // N0, a power of two
    double tol = 1e-6;
    int depth = 9;  // deep enough for self-crossing boundary images such as z^3+z at r = 10
    bool offset = true;  // stagger the second torus lattice by half a step

    void validate() const {
        if (grid < 2 || (grid & (grid - 1)) != 0)
            throw InvalidArgument("quadrature grid must be a power of two >= 2");
        if (!(tol > 0.0)) throw InvalidArgument("quadrature tolerance must be positive");
        if (depth < 0 || depth > 12) throw InvalidArgument("quadrature depth must lie in [0, 12]");
    }
};

// Value with the evidence that produced it.
struct QuadratureResult {
    double value = 0.0;
    double last_change = 0.0;  // |estimate(N) - estimate(N/2)| at acceptance
    std::size_t grid = 0;      // finest grid used
    int levels = 0;
};

inline double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

namespace detail {

// Successive doubling from N0 until the change between estimates stays below tol
// for two doublings in a row; a single small change can be a coincidence at coarse N.
// With richardson set, each estimate is 2 I(N) - I(N/2), which removes the
// O(1/N) bias of the staggered lattice along the diagonal.
template <class Eval>
QuadratureResult refine(Eval&& eval, const QuadratureSettings& s, bool richardson, const char* what) {
    s.validate();
    QuadratureResult res;
    std::size_t n = s.grid;
    double prev_raw = richardson ? eval(n / 2) : 0.0;
    double raw = eval(n);
    double est = richardson ? 2.0 * raw - prev_raw : raw;
    res.levels = 1;
    int passes = 0;
    for (int d = 1; d <= s.depth; ++d) {
        n *= 2;
        double next_raw = eval(n);
        double next_est = richardson ? 2.0 * next_raw - raw : next_raw;
        res.levels = d + 1;
        double change = std::fabs(next_est - est);
        raw = next_raw;
        est = next_est;
        if (!std::isfinite(est))
            throw NoConvergence(std::string(what) + ": non-finite estimate at N = " + std::to_string(n));
        passes = change < s.tol ? passes + 1 : 0;
        if (passes == 2) {
            res.value = est;
            res.last_change = change;
            res.grid = n;
            return res;
        }
        res.last_change = change;
    }
    throw NoConvergence(std::string(what) + ": tolerance not met at N = " + std::to_string(n) +
                        " (last change " + std::to_string(res.last_change) + ")");
}

inline double node(std::size_t j, std::size_t n, bool half) {
    return (double(j) + (half ? 0.5 : 0.0)) / double(n);
}

inline void require_no_pole(const DiskMap& alpha, double r, const char* what) {
    if (alpha.pole_at_origin()) throw PoleAtOrigin(std::string(what) + ": alpha(0) = infinity");
    if (alpha.has_pole_in_closed_disk(r))
        throw PoleOnDisk(std::string(what) + ": alpha has a pole on the closed disk");
}

inline std::vector<Complex> circle_values(const DiskMap& alpha, double r, std::size_t n, bool half) {
    std::vector<Complex> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = alpha(std::polar(r, 2.0 * M_PI * node(j, n, half)));
    return v;
}

// Unit-normalized homogeneous coordinates (p : q) of alpha on the circle.
inline std::vector<std::array<Complex, 2>> circle_points_P1(const DiskMap& alpha, double r, std::size_t n,
                                                            bool half) {
    std::vector<std::array<Complex, 2>> v(n);
    for (std::size_t j = 0; j < n; ++j) {
        Complex p, q;
        alpha.homogeneous(std::polar(r, 2.0 * M_PI * node(j, n, half)), p, q);
        double nm = std::sqrt(std::norm(p) + std::norm(q));
        v[j] = {p / nm, q / nm};
    }
    return v;
}

}  // namespace detail

// Midpoint rule on [0,1) for a 1-periodic integrand, refined by doubling.
template <class F>
QuadratureResult integrate_periodic(F&& f, const QuadratureSettings& s, bool richardson = false,
                                    const char* what = "integrate_periodic") {
    auto eval = [&](std::size_t n) {
        std::vector<double> vals(n);
        for (std::size_t j = 0; j < n; ++j) vals[j] = f(detail::node(j, n, true));
        return pairwise_sum(vals) / double(n);
    };
    return detail::refine(eval, s, richardson, what);
}

inline QuadratureResult circle_log_mean(const DiskMap& alpha, Complex c, double r,
                                        const QuadratureSettings& s = {}) {
    if (!(r > 0.0)) throw InvalidArgument("circle_log_mean: radius must be positive");
    detail::require_no_pole(alpha, r, "circle_log_mean");
    if (alpha.is_constant() && std::abs(alpha.value_at_origin() - c) == 0.0)
        throw InvalidArgument("circle_log_mean: alpha is identically c on the circle");
    auto f = [&](double t) { return std::log(std::abs(alpha(std::polar(r, 2.0 * M_PI * t)) - c)); };
    return integrate_periodic(f, s, true, "circle_log_mean");
}

// Integral over [0,1)^2 of a kernel K(alpha(r e(t1)), alpha(r e(t2))) on the staggered product grid.
enum class TorusKernel { log_distance, green_P1 };

namespace detail {

// Sum over j of log(x_j) for positive x_j given by term(j), as one log of a running product.
// Eight independent lanes keep the loop vectorizable; lanes are renormalized every
// eight factors, which is safe while every factor lies in [1e-30, 1e30].
template <class Term>
double log_product_sum(std::size_t n, Term&& term) {
    constexpr std::size_t L = 8;
    double acc[L];
    for (auto& a : acc) a = 1.0;
    long ex = 0;
    std::size_t j = 0;
    for (; j + L * L <= n; j += L * L) {
        for (std::size_t k = 0; k < L * L; k += L)
            for (std::size_t l = 0; l < L; ++l) acc[l] *= term(j + k + l);
        for (auto& a : acc) {
            int e;
            a = std::frexp(a, &e);
            ex += e;
        }
    }
    double tail = 1.0;
    for (; j < n; ++j) {
        tail *= term(j);
        int e;
        tail = std::frexp(tail, &e);
        ex += e;
    }
    double m = tail;
    for (auto a : acc) {
        m *= a;
        int e;
        m = std::frexp(m, &e);
        ex += e;
    }
    if (m == 0.0) return -INFINITY;
    return std::log(m) + double(ex) * M_LN2;
}

}  // namespace detail

inline QuadratureResult torus_double_integral(const DiskMap& alpha, double r, TorusKernel kernel,
                                              const QuadratureSettings& s) {
    // Real coefficients make row t and row -t equal on the symmetric lattices used here.
    const bool mirror = alpha.real_structure();
    auto eval = [&](std::size_t n) {
        std::vector<double> rows(n);
        std::size_t nrows = mirror ? n / 2 + 1 : n;
        if (kernel == TorusKernel::log_distance) {
            auto a = detail::circle_values(alpha, r, n, false);
            auto b = detail::circle_values(alpha, r, n, s.offset);
            // Rescale so that squared distances stay inside the renormalization window.
            double scale = 0.0;
            for (std::size_t j = 0; j < n; ++j) scale = std::max({scale, std::abs(a[j]), std::abs(b[j])});
            std::vector<double> bx(n), by(n);
            for (std::size_t j = 0; j < n; ++j) {
                bx[j] = b[j].real() / scale;
                by[j] = b[j].imag() / scale;
            }
            const double shift = std::log(scale);
            parallel_for(nrows, [&](std::size_t i) {
                const double ux = a[i].real() / scale, uy = a[i].imag() / scale;
                auto term = [&](std::size_t j) {
                    double dx = ux - bx[j], dy = uy - by[j];
                    double sq = dx * dx + dy * dy;
                    return sq == 0.0 && !s.offset ? 1.0 : sq;
                };
                rows[i] = 0.5 * detail::log_product_sum(n, term) + double(n) * shift;
            });
        } else {
            auto a = detail::circle_points_P1(alpha, r, n, false);
            auto b = detail::circle_points_P1(alpha, r, n, s.offset);
            std::vector<double> b0r(n), b0i(n), b1r(n), b1i(n);
            for (std::size_t j = 0; j < n; ++j) {
                b0r[j] = b[j][0].real();
                b0i[j] = b[j][0].imag();
                b1r[j] = b[j][1].real();
                b1i[j] = b[j][1].imag();
            }
            parallel_for(nrows, [&](std::size_t i) {
                const double a0r = a[i][0].real(), a0i = a[i][0].imag();
                const double a1r = a[i][1].real(), a1i = a[i][1].imag();
                auto term = [&](std::size_t j) {
                    // a0 * b1 - a1 * b0
                    double re = a0r * b1r[j] - a0i * b1i[j] - (a1r * b0r[j] - a1i * b0i[j]);
                    double im = a0r * b1i[j] + a0i * b1r[j] - (a1r * b0i[j] + a1i * b0r[j]);
                    double sq = re * re + im * im;
                    return sq == 0.0 && !s.offset ? 1.0 : sq;
                };
                rows[i] = -0.5 * detail::log_product_sum(n, term);
            });
        }
        if (mirror)
            for (std::size_t i = n / 2 + 1; i < n; ++i) rows[i] = rows[n - i];
        return pairwise_sum(rows) / (double(n) * double(n));
    };
    return detail::refine(eval, s, true, "torus_double_integral");
}

inline QuadratureResult torus_log_double_integral(const DiskMap& alpha, double r,
                                                  const QuadratureSettings& s = {}) {
    if (!(r > 0.0)) throw InvalidArgument("torus_log_double_integral: radius must be positive");
    detail::require_no_pole(alpha, r, "torus_log_double_integral");
    if (alpha.is_constant()) throw ConstantMap("torus_log_double_integral: alpha is constant");
    return torus_double_integral(alpha, r, TorusKernel::log_distance, s);
}

// Integral over [0,1)^2 of the Fubini-Study diagonal Green function along alpha(r e(t)).
inline QuadratureResult torus_green_P1_double_integral(const DiskMap& alpha, double r,
                                                       const QuadratureSettings& s = {}) {
    if (!(r > 0.0)) throw InvalidArgument("torus_green_P1_double_integral: radius must be positive");
    if (alpha.is_constant()) throw ConstantMap("torus_green_P1_double_integral: alpha is constant");
    return torus_double_integral(alpha, r, TorusKernel::green_P1, s);
}

namespace detail {

struct GaussRule {
    std::vector<double> x, w;  // on [0,1]
};

inline GaussRule gauss_legendre(std::size_t n) {
    GaussRule g;
    g.x.resize(n);
    g.w.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (double(i) + 0.75) / (double(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                double pk = ((2.0 * double(k) - 1.0) * x * p1 - (double(k) - 1.0) * p0) / double(k);
                p0 = p1;
                p1 = pk;
            }
            dp = double(n) * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) break;
        }
        {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                double pk = ((2.0 * double(k) - 1.0) * x * p1 - (double(k) - 1.0) * p0) / double(k);
                p0 = p1;
                p1 = pk;
            }
            dp = double(n) * (x * p1 - p0) / (x * x - 1.0);
        }
        g.x[i] = 0.5 * (1.0 - x);
        g.w[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return g;
}

inline const GaussRule& gauss16() {
    static const GaussRule rule = gauss_legendre(16);
    return rule;
}

}  // namespace detail

// Composite 16-point Gauss-Legendre on [a,b] with panel doubling.
template <class F>
QuadratureResult integrate_interval(F&& f, double a, double b, double tol, std::size_t panels0 = 1,
                                    int depth = 10) {
    const auto& g = detail::gauss16();
    auto eval = [&](std::size_t panels) {
        std::vector<double> parts(panels);
        double h = (b - a) / double(panels);
        for (std::size_t p = 0; p < panels; ++p) {
            double lo = a + h * double(p), acc = 0.0;
            for (std::size_t k = 0; k < g.x.size(); ++k) acc += g.w[k] * f(lo + h * g.x[k]);
            parts[p] = acc * h;
        }
        return pairwise_sum(parts);
    };
    QuadratureResult res;
    std::size_t panels = panels0;
    double est = eval(panels);
    for (int d = 1; d <= depth; ++d) {
        panels *= 2;
        double next = eval(panels);
        double change = std::fabs(next - est);
        est = next;
        res.levels = d + 1;
        res.grid = panels;
        res.last_change = change;
        if (change < tol) {
            res.value = est;
            return res;
        }
    }
    throw NoConvergence("integrate_interval: tolerance not met");
}

enum class NevanlinnaMethod { boundary, area };

inline const char* to_string(NevanlinnaMethod m) { return m == NevanlinnaMethod::boundary ? "boundary" : "area"; }

// Ahlfors-Shimizu characteristic T_alpha(r).
inline QuadratureResult nevanlinna_T(const DiskMap& alpha, double r, NevanlinnaMethod method,
                                     const QuadratureSettings& s = {}) {
    if (!(r > 0.0)) throw InvalidArgument("nevanlinna_T: radius must be positive");
    if (alpha.pole_at_origin()) throw PoleAtOrigin("nevanlinna_T: alpha(0) = infinity");
    if (alpha.is_constant()) return QuadratureResult{0.0, 0.0, 0, 0};
    if (method == NevanlinnaMethod::boundary) {
        if (alpha.has_pole_in_closed_disk(r)) throw PoleOnDisk("nevanlinna_T: boundary method needs a pole-free disk");
        double a0 = std::norm(alpha.value_at_origin());
        auto f = [&](double t) {
            Complex p, q;
            alpha.homogeneous(std::polar(r, 2.0 * M_PI * t), p, q);
            return 0.5 * (std::log(std::norm(p) + std::norm(q)) - std::log(std::norm(q)));
        };
        QuadratureResult res = integrate_periodic(f, s, false, "nevanlinna_T boundary");
        res.value -= 0.5 * std::log1p(a0);
        return res;
    }
    // rho = r u^2 turns the weight rho log(r/rho) d rho into -4 r^2 u^3 log(u) du.
    s.validate();
    const auto& g = detail::gauss16();
    auto eval = [&](std::size_t level) {
        std::size_t panels = std::size_t(8) << level;
        std::size_t nth = s.grid << level;
        std::vector<double> radial(panels * g.x.size());
        parallel_for(radial.size(), [&](std::size_t idx) {
            std::size_t p = idx / g.x.size(), k = idx % g.x.size();
            double h = 1.0 / double(panels);
            double u = h * (double(p) + g.x[k]);
            double rho = r * u * u;
            std::vector<double> ring(nth);
            for (std::size_t j = 0; j < nth; ++j) {
                Complex z = std::polar(rho, 2.0 * M_PI * detail::node(j, nth, true));
                Complex pz, qz;
                alpha.homogeneous(z, pz, qz);
                double den = std::norm(pz) + std::norm(qz);
                ring[j] = std::norm(alpha.wronskian(z)) / (den * den);
            }
            double A = 2.0 * pairwise_sum(ring) / double(nth);
            radial[idx] = h * g.w[k] * (-4.0 * r * r * u * u * u * std::log(u)) * A;
        });
        return pairwise_sum(radial);
    };
    QuadratureResult res;
    double est = eval(0);
    int passes = 0;
    for (int d = 1; d <= s.depth; ++d) {
        double next = eval(std::size_t(d));
        double change = std::fabs(next - est);
        est = next;
        res.levels = d + 1;
        res.grid = s.grid << d;
        res.last_change = change;
        passes = change < s.tol ? passes + 1 : 0;
        if (passes == 2) {
            res.value = est;
            return res;
        }
    }
    throw NoConvergence("nevanlinna_T area: tolerance not met");
}

}  // namespace overflow_lab
