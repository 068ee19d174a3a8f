#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "errors.hpp"
#include "polynomial.hpp"
#include "rational.hpp"

namespace overflow_lab {

// alpha(z) = num(z)/den(z) on a closed disk around 0.
class DiskMap {
public:
    DiskMap() : DiskMap(CPoly{0.0, 1.0}) {}

    explicit DiskMap(CPoly num, CPoly den = CPoly{1.0}) : num_(std::move(num)), den_(std::move(den)) {
        init();
    }

    DiskMap(QPoly num, QPoly den) {
        trim(num);
        trim(den);
        if (degree(den) < 0) throw InvalidArgument("DiskMap: zero denominator");
        QPoly g = qgcd(num, den);
        if (degree(g) > 0) {
            QPoly q, r;
            qdivmod(num, g, q, r);
            num = q;
            qdivmod(den, g, q, r);
            den = q;
        }
        // Normalize so the denominator is monic at its lowest nonzero term.
        for (const auto& c : den)
            if (sgn(c) != 0) {
                Rational s = Rational(1) / c;
                num = qscale(num, s);
                den = qscale(den, s);
                break;
            }
        qnum_ = num;
        qden_ = den;
        num_ = to_complex(num);
        den_ = to_complex(den);
        init();
    }

    static DiskMap polynomial(QPoly num) { return DiskMap(std::move(num), QPoly{Rational(1)}); }

    const CPoly& numerator() const noexcept { return num_; }
    const CPoly& denominator() const noexcept { return den_; }
    const std::optional<QPoly>& exact_numerator() const noexcept { return qnum_; }
    const std::optional<QPoly>& exact_denominator() const noexcept { return qden_; }
    bool is_exact() const noexcept { return qnum_.has_value(); }

    bool is_polynomial() const noexcept { return degree(den_) == 0; }
    bool real_structure() const noexcept { return real_; }
    int numerator_degree() const noexcept { return degree(num_); }
    int denominator_degree() const noexcept { return degree(den_); }

    Complex operator()(Complex z) const { return horner(num_, z) / horner(den_, z); }
    void homogeneous(Complex z, Complex& p, Complex& q) const {
        p = horner(num_, z);
        q = horner(den_, z);
    }

    bool pole_at_origin() const { return den_[0] == Complex(0.0); }
    Complex value_at_origin() const {
        if (pole_at_origin()) throw PoleAtOrigin("alpha(0) = infinity");
        return num_[0] / den_[0];
    }

    bool is_constant() const { return constant_; }

    // Ramification index at 0 and the jet alpha^(e)(0)/e!.
    int ramification_index() const {
        require_jet();
        return e_;
    }
    Complex jet() const {
        require_jet();
        return jet_;
    }
    std::optional<Rational> exact_jet() const {
        require_jet();
        return qjet_;
    }

    // Denominator zeros in the closed disk of radius r (tolerance relative to r).
    bool has_pole_in_closed_disk(double r) const {
        if (is_polynomial()) return false;
        for (const auto& z : polynomial_roots(den_).roots)
            if (std::abs(z) <= r * (1.0 + 1e-12)) return true;
        return false;
    }

    // p'(z) q(z) - p(z) q'(z), the numerator of alpha'.
    Complex wronskian(Complex z) const {
        Complex p, dp, q, dq;
        horner2(num_, z, p, dp);
        horner2(den_, z, q, dq);
        return dp * q - p * dq;
    }

    // alpha(s z), used for rescaling to the unit disk.
    DiskMap rescaled(double s) const {
        if (qnum_) {
            Rational qs(s);
            QPoly n = *qnum_, d = *qden_;
            Rational pw(1);
            for (std::size_t i = 0; i < n.size(); ++i, pw *= qs) n[i] *= pw;
            pw = 1;
            for (std::size_t i = 0; i < d.size(); ++i, pw *= qs) d[i] *= pw;
            return DiskMap(n, d);
        }
        CPoly n = num_, d = den_;
        double pw = 1.0;
        for (auto& c : n) c *= pw, pw *= s;
        pw = 1.0;
        for (auto& c : d) c *= pw, pw *= s;
        return DiskMap(n, d);
    }

private:
    void init() {
        trim(num_);
        trim(den_);
        if (degree(den_) < 0) throw InvalidArgument("DiskMap: zero denominator");
        real_ = true;
        for (const auto& c : num_) real_ = real_ && c.imag() == 0.0;
        for (const auto& c : den_) real_ = real_ && c.imag() == 0.0;
        compute_jet();
    }

    void require_jet() const {
        if (pole_at_origin()) throw PoleAtOrigin("alpha(0) = infinity");
        if (constant_) throw ConstantMap("map is constant");
    }

    // alpha - alpha(0) = (num - alpha(0) den)/den; its valuation at 0 is e.
    void compute_jet() {
        constant_ = false;
        if (den_[0] == Complex(0.0)) return;
        if (qnum_) {
            Rational a0 = (*qnum_)[0] / (*qden_)[0];
            QPoly w = qsub(*qnum_, qscale(*qden_, a0));
            int d = degree(w);
            if (d < 0) {
                constant_ = true;
                return;
            }
            for (std::size_t i = 1; i < w.size(); ++i)
                if (sgn(w[i]) != 0) {
                    e_ = int(i);
                    qjet_ = w[i] / (*qden_)[0];
                    jet_ = qjet_->get_d();
                    return;
                }
            constant_ = true;
            return;
        }
        Complex a0 = num_[0] / den_[0];
        std::size_t n = std::max(num_.size(), den_.size());
        double scale = 0.0;
        CPoly w(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            Complex p = i < num_.size() ? num_[i] : 0.0;
            Complex q = i < den_.size() ? den_[i] : 0.0;
            w[i] = p - a0 * q;
            scale = std::max(scale, std::abs(p) + std::abs(a0 * q));
        }
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(w[i]) > 1e-12 * scale) {
                e_ = int(i);
                jet_ = w[i] / den_[0];
                return;
            }
        constant_ = true;
    }

    CPoly num_, den_;
    std::optional<QPoly> qnum_, qden_;
    bool real_ = true;
    bool constant_ = false;
    int e_ = 0;
    Complex jet_ = 0.0;
    std::optional<Rational> qjet_;
};

}  // namespace overflow_lab
