/** @file bspline.hpp
    @brief Univariate B-spline spaces on [0,1] with open uniform knots.

    A space is determined by the degree p, the interior regularity r and the
    number of elements k; the mesh size is h = 1/k and interior knots carry
    multiplicity p - r. The dimension is n = p + (k-1)(p-r) + 1.
*/
#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "c1shell/errors.hpp"

namespace c1shell {

class BSplineBasis {
public:
    BSplineBasis(int degree, int regularity, int elements)
        : p_(degree), r_(regularity), k_(elements)
    {
        C1SHELL_REQUIRE(p_ >= 1, ParameterError, "BSplineBasis: degree must be >= 1");
        C1SHELL_REQUIRE(r_ >= -1 && r_ <= p_ - 1, ParameterError,
                        "BSplineBasis: regularity must satisfy -1 <= r <= p-1");
        C1SHELL_REQUIRE(k_ >= 1, ParameterError, "BSplineBasis: element count must be >= 1");
        const int mult = p_ - r_;
        knots_.assign(p_ + 1, 0.0);
        const double h = 1.0 / k_;
        for (int j = 1; j < k_; ++j)
            for (int m = 0; m < mult; ++m) knots_.push_back(j * h);
        for (int i = 0; i <= p_; ++i) knots_.push_back(1.0);
    }

    int degree() const { return p_; }
    int regularity() const { return r_; }
    int elements() const { return k_; }
    double meshSize() const { return 1.0 / k_; }
    int dimension() const { return p_ + (k_ - 1) * (p_ - r_) + 1; }
    const std::vector<double>& knots() const { return knots_; }

    bool operator==(const BSplineBasis& o) const
    {
        return p_ == o.p_ && r_ == o.r_ && k_ == o.k_;
    }

    /// Index of the knot span containing x (last span for x = 1).
    int findSpan(double x) const
    {
        C1SHELL_REQUIRE(x >= 0.0 && x <= 1.0, DomainError, "findSpan: parameter outside [0,1]");
        const int n = dimension();
        if (x >= 1.0) return n - 1;
        // knots_[span] <= x < knots_[span+1]
        int lo = p_, hi = n;
        while (lo + 1 < hi) {
            int mid = (lo + hi) / 2;
            if (x < knots_[mid])
                hi = mid;
            else
                lo = mid;
        }
        return lo;
    }

    struct EvalResult {
        int first;              ///< index of the first active basis function
        Eigen::MatrixXd values; ///< (maxDeriv+1) x (p+1), row d = d-th derivative
    };

    /// Values and derivatives of the p+1 active B-splines at x (triangular
    /// Cox-de Boor recursion with the standard derivative table).
    EvalResult evalBasis(double x, int maxDeriv) const
    {
        C1SHELL_REQUIRE(x >= 0.0 && x <= 1.0, DomainError, "evalBasis: parameter outside [0,1]");
        const int span = findSpan(x);
        const int p = p_;
        const int nd = std::min(maxDeriv, p);

        // ndu[j][r]: triangular table of basis values and knot differences
        Eigen::MatrixXd ndu(p + 1, p + 1);
        std::vector<double> left(p + 1), right(p + 1);
        ndu(0, 0) = 1.0;
        for (int j = 1; j <= p; ++j) {
            left[j] = x - knots_[span + 1 - j];
            right[j] = knots_[span + j] - x;
            double saved = 0.0;
            for (int rr = 0; rr < j; ++rr) {
                ndu(j, rr) = right[rr + 1] + left[j - rr];
                double temp = ndu(rr, j - 1) / ndu(j, rr);
                ndu(rr, j) = saved + right[rr + 1] * temp;
                saved = left[j - rr] * temp;
            }
            ndu(j, j) = saved;
        }

        EvalResult res;
        res.first = span - p;
        res.values = Eigen::MatrixXd::Zero(maxDeriv + 1, p + 1);
        for (int j = 0; j <= p; ++j) res.values(0, j) = ndu(j, p);

        // derivative table (NURBS book A2.3)
        Eigen::MatrixXd a(2, p + 1);
        for (int rr = 0; rr <= p; ++rr) {
            int s1 = 0, s2 = 1;
            a(0, 0) = 1.0;
            for (int kk = 1; kk <= nd; ++kk) {
                double d = 0.0;
                const int rk = rr - kk, pk = p - kk;
                if (rr >= kk) {
                    a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                    d = a(s2, 0) * ndu(rk, pk);
                }
                const int j1 = (rk >= -1) ? 1 : -rk;
                const int j2 = (rr - 1 <= pk) ? kk - 1 : p - rr;
                for (int j = j1; j <= j2; ++j) {
                    a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                    d += a(s2, j) * ndu(rk + j, pk);
                }
                if (rr <= pk) {
                    a(s2, kk) = -a(s1, kk - 1) / ndu(pk + 1, rr);
                    d += a(s2, kk) * ndu(rr, pk);
                }
                res.values(kk, rr) = d;
                std::swap(s1, s2);
            }
        }
        double f = p;
        for (int kk = 1; kk <= nd; ++kk) {
            for (int j = 0; j <= p; ++j) res.values(kk, j) *= f;
            f *= (p - kk);
        }
        return res;
    }

    /// Single basis function N_j (0 if not active at x).
    double evalOne(int j, double x, int deriv = 0) const
    {
        C1SHELL_REQUIRE(j >= 0 && j < dimension(), ParameterError, "evalOne: index out of range");
        EvalResult r = evalBasis(x, deriv);
        const int loc = j - r.first;
        if (loc < 0 || loc > p_) return 0.0;
        return r.values(deriv, loc);
    }

    /// Greville abscissae (knot averages); strictly increasing, endpoints 0 and 1.
    std::vector<double> greville() const
    {
        const int n = dimension();
        std::vector<double> g(n);
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 1; i <= p_; ++i) s += knots_[j + i];
            g[j] = s / p_;
        }
        g.front() = 0.0;
        g.back() = 1.0;
        return g;
    }

    /// Collocation matrix A(i,j) = d^deriv N_j (points[i]).
    Eigen::MatrixXd collocation(const std::vector<double>& points, int deriv = 0) const
    {
        const int n = dimension();
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<int>(points.size()), n);
        for (size_t i = 0; i < points.size(); ++i) {
            EvalResult r = evalBasis(points[i], deriv);
            for (int j = 0; j <= p_; ++j) A(static_cast<int>(i), r.first + j) = r.values(deriv, j);
        }
        return A;
    }

    /// Spline coefficients of a function known to lie in this space, obtained
    /// by interpolation at the Greville abscissae. Entries below
    /// 1e-13 * max|c| are snapped to zero to recover the exact support.
    Eigen::VectorXd expand(const std::function<double(double)>& f) const
    {
        ensureLU();
        const std::vector<double> g = greville();
        Eigen::VectorXd rhs(dimension());
        for (int i = 0; i < dimension(); ++i) rhs(i) = f(g[i]);
        Eigen::VectorXd c = lu_->solve(rhs);
        const double thresh = 1e-13 * c.cwiseAbs().maxCoeff();
        for (int i = 0; i < c.size(); ++i)
            if (std::abs(c(i)) < thresh) c(i) = 0.0;
        return c;
    }

private:
    void ensureLU() const
    {
        if (!lu_) {
            Eigen::MatrixXd A = collocation(greville());
            lu_ = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXd>>(A);
        }
    }

    int p_, r_, k_;
    std::vector<double> knots_;
    mutable std::shared_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
};

/// The three univariate families used by the smooth space over a multi-patch
/// surface: S^{p,r} itself plus the trace space S^{p,r+1} (dimension n0) and
/// the transversal space S^{p-1,r} (dimension n1).
struct SpaceFamilies {
    SpaceFamilies(int p, int r, int k)
        : p(p), r(r), k(k), full(p, r, k), plus(p, r + 1, k), minus(p - 1, r, k)
    {
        C1SHELL_REQUIRE(p >= 3, ParameterError, "SpaceFamilies: degree must be >= 3");
        C1SHELL_REQUIRE(r >= 1 && r <= p - 2, ParameterError,
                        "SpaceFamilies: regularity must satisfy 1 <= r <= p-2");
    }
    int p, r, k;
    BSplineBasis full;
    BSplineBasis plus;
    BSplineBasis minus;
};

/// Boundary-localized functions M_i used by the smooth basis construction.
/// `fam` must be one of the three families of SpaceFamilies(p,r,k); the
/// admissible indices are {0,1} for S^{p,r} and S^{p-1,r} and {0,1,2} for
/// S^{p,r+1}.
inline double mFunction(const BSplineBasis& fam, int p, int r, int index, double x, int deriv = 0)
{
    C1SHELL_REQUIRE(deriv >= 0 && deriv <= 2, ParameterError, "mFunction: derivative order out of range");
    const double h = fam.meshSize();
    const bool isPlus = (fam.degree() == p && fam.regularity() == r + 1);
    const bool isFull = (fam.degree() == p && fam.regularity() == r);
    const bool isMinus = (fam.degree() == p - 1 && fam.regularity() == r);
    C1SHELL_REQUIRE(isPlus || isFull || isMinus, ParameterError, "mFunction: basis is not one of the three families");

    if (isPlus) {
        C1SHELL_REQUIRE(index >= 0 && index <= 2, ParameterError, "mFunction: index out of range");
        const bool maxreg = (r == p - 2);
        const double theta1 = maxreg ? 1.0 : 1.0;
        const double theta2 = maxreg ? 3.0 : 2.0;
        const double mu = maxreg ? 2.0 : 1.0;
        switch (index) {
        case 0:
            return fam.evalOne(0, x, deriv) + fam.evalOne(1, x, deriv) + fam.evalOne(2, x, deriv);
        case 1:
            return h / p * (theta1 * fam.evalOne(1, x, deriv) + theta2 * fam.evalOne(2, x, deriv));
        default:
            return h * h * mu / (p * (p - 1.0)) * fam.evalOne(2, x, deriv);
        }
    }
    C1SHELL_REQUIRE(index >= 0 && index <= 1, ParameterError, "mFunction: index out of range");
    if (index == 0) return fam.evalOne(0, x, deriv) + fam.evalOne(1, x, deriv);
    // scaled by the family's own degree so that M_1'(0) = 1 in every family;
    // this normalization is what the vertex coefficient calculus relies on
    return h / fam.degree() * fam.evalOne(1, x, deriv);
}

} // namespace c1shell
