/** @file poly.hpp
    @brief Dense univariate polynomials in the monomial basis.

    Used for the gluing functions (linear alpha, beta and the quadratic
    composed beta), so only low degrees appear.
*/
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "c1shell/gauss.hpp"

namespace c1shell {

class Poly {
public:
    Poly() : c_{0.0} {}
    explicit Poly(std::vector<double> coeffs) : c_(std::move(coeffs))
    {
        if (c_.empty()) c_.push_back(0.0);
    }
    static Poly constant(double a) { return Poly({a}); }
    static Poly linear(double a0, double a1) { return Poly({a0, a1}); }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    double coeff(int i) const { return i < static_cast<int>(c_.size()) ? c_[i] : 0.0; }
    const std::vector<double>& coeffs() const { return c_; }

    double operator()(double x) const
    {
        double v = 0.0;
        for (int i = degree(); i >= 0; --i) v = v * x + c_[i];
        return v;
    }

    double deriv(double x, int order = 1) const
    {
        if (order == 0) return (*this)(x);
        double v = 0.0;
        for (int i = degree(); i >= order; --i) {
            double f = 1.0;
            for (int j = 0; j < order; ++j) f *= (i - j);
            v = v * x + f * c_[i];
        }
        return v;
    }

    Poly operator+(const Poly& o) const
    {
        std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
        for (size_t i = 0; i < r.size(); ++i) r[i] = coeff(static_cast<int>(i)) + o.coeff(static_cast<int>(i));
        return Poly(r);
    }
    Poly operator-(const Poly& o) const
    {
        std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
        for (size_t i = 0; i < r.size(); ++i) r[i] = coeff(static_cast<int>(i)) - o.coeff(static_cast<int>(i));
        return Poly(r);
    }
    Poly operator*(const Poly& o) const
    {
        std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
        for (size_t i = 0; i < c_.size(); ++i)
            for (size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
        return Poly(r);
    }
    Poly operator*(double s) const
    {
        std::vector<double> r = c_;
        for (double& v : r) v *= s;
        return Poly(r);
    }

    /// Value at the reversed argument: q(x) = p(1-x), as a polynomial.
    Poly reversedArg() const
    {
        const int d = degree();
        std::vector<double> r(d + 1, 0.0);
        // expand c_i (1-x)^i
        for (int i = 0; i <= d; ++i) {
            double binom = 1.0;
            for (int j = 0; j <= i; ++j) {
                r[j] += c_[i] * binom * ((j % 2) ? -1.0 : 1.0);
                binom = binom * (i - j) / (j + 1);
            }
        }
        return Poly(r);
    }

    /// L2([0,1]) inner product, exact Gauss quadrature.
    static double innerL2(const Poly& a, const Poly& b)
    {
        const int n = (a.degree() + b.degree()) / 2 + 1;
        QuadratureRule q = gaussLegendre(std::max(1, n));
        double s = 0.0;
        for (size_t i = 0; i < q.points.size(); ++i) s += q.weights[i] * a(q.points[i]) * b(q.points[i]);
        return s;
    }

    double maxAbsOn01(int samples = 64) const
    {
        double m = 0.0;
        for (int i = 0; i <= samples; ++i) m = std::max(m, std::abs((*this)(static_cast<double>(i) / samples)));
        return m;
    }

private:
    std::vector<double> c_; // c_[i] x^i
};

inline Poly operator*(double s, const Poly& p) { return p * s; }

} // namespace c1shell
