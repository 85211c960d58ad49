/** @file tensor.hpp
    @brief Tensor-product spline spaces, patches and scalar spline functions.

    A patch stores one coefficient matrix per physical component, following
    the representation p(x1,x2) = N(x1)^T C N(x2).
*/
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "c1shell/bspline.hpp"
#include "c1shell/errors.hpp"

namespace c1shell {

class TensorSplineSpace {
public:
    TensorSplineSpace(int p, int r, int k) : b1_(p, r, k), b2_(p, r, k) {}

    const BSplineBasis& basis(int dir) const { return dir == 0 ? b1_ : b2_; }
    int degree() const { return b1_.degree(); }
    int regularity() const { return b1_.regularity(); }
    int elements() const { return b1_.elements(); }
    double meshSize() const { return b1_.meshSize(); }
    int dim1() const { return b1_.dimension(); }
    int dim2() const { return b2_.dimension(); }
    int dimension() const { return dim1() * dim2(); }

    bool operator==(const TensorSplineSpace& o) const { return b1_ == o.b1_ && b2_ == o.b2_; }

private:
    BSplineBasis b1_, b2_;
};

/// Point, Jacobian and (symmetric) Hessian of a spline map at a parameter.
struct PatchEval {
    Eigen::VectorXd point;  ///< d
    Eigen::MatrixXd jac;    ///< d x 2
    Eigen::MatrixXd hess;   ///< d x 3, columns (11, 22, 12)
};

namespace detail {

/// Contraction of a coefficient table with univariate basis evaluations.
inline double contract(const Eigen::MatrixXd& C, const BSplineBasis::EvalResult& e1,
                       const BSplineBasis::EvalResult& e2, int d1, int d2, int p)
{
    double s = 0.0;
    for (int i = 0; i <= p; ++i) {
        double row = 0.0;
        for (int j = 0; j <= p; ++j) row += C(e1.first + i, e2.first + j) * e2.values(d2, j);
        s += e1.values(d1, i) * row;
    }
    return s;
}

} // namespace detail

class TensorPatch {
public:
    TensorPatch(TensorSplineSpace space, std::vector<Eigen::MatrixXd> coefs)
        : space_(std::move(space)), C_(std::move(coefs))
    {
        for (const auto& c : C_)
            C1SHELL_REQUIRE(c.rows() == space_.dim1() && c.cols() == space_.dim2(), ParameterError,
                            "TensorPatch: coefficient table does not match the space dimension");
    }

    const TensorSplineSpace& space() const { return space_; }
    int dim() const { return static_cast<int>(C_.size()); }
    const Eigen::MatrixXd& coefs(int component) const { return C_[component]; }
    Eigen::MatrixXd& coefs(int component) { return C_[component]; }
    const std::vector<Eigen::MatrixXd>& allCoefs() const { return C_; }

    Eigen::VectorXd controlPoint(int j1, int j2) const
    {
        Eigen::VectorXd x(dim());
        for (int c = 0; c < dim(); ++c) x(c) = C_[c](j1, j2);
        return x;
    }

    PatchEval eval(double x1, double x2, int maxDeriv = 2) const
    {
        C1SHELL_REQUIRE(x1 >= 0.0 && x1 <= 1.0 && x2 >= 0.0 && x2 <= 1.0, DomainError,
                        "TensorPatch::eval: parameter outside [0,1]^2");
        const int p1 = space_.basis(0).degree();
        auto e1 = space_.basis(0).evalBasis(x1, maxDeriv);
        auto e2 = space_.basis(1).evalBasis(x2, maxDeriv);
        PatchEval out;
        const int d = dim();
        out.point.resize(d);
        if (maxDeriv >= 1) out.jac.resize(d, 2);
        if (maxDeriv >= 2) out.hess.resize(d, 3);
        for (int c = 0; c < d; ++c) {
            out.point(c) = detail::contract(C_[c], e1, e2, 0, 0, p1);
            if (maxDeriv >= 1) {
                out.jac(c, 0) = detail::contract(C_[c], e1, e2, 1, 0, p1);
                out.jac(c, 1) = detail::contract(C_[c], e1, e2, 0, 1, p1);
            }
            if (maxDeriv >= 2) {
                out.hess(c, 0) = detail::contract(C_[c], e1, e2, 2, 0, p1);
                out.hess(c, 1) = detail::contract(C_[c], e1, e2, 0, 2, p1);
                out.hess(c, 2) = detail::contract(C_[c], e1, e2, 1, 1, p1);
            }
        }
        return out;
    }

    /// Bounding-box diagonal of the control net.
    double bboxDiagonal() const
    {
        double s = 0.0;
        for (const auto& c : C_) {
            const double ext = c.maxCoeff() - c.minCoeff();
            s += ext * ext;
        }
        return std::sqrt(s);
    }

private:
    TensorSplineSpace space_;
    std::vector<Eigen::MatrixXd> C_;
};

/// Scalar-valued spline function on one patch domain.
struct ScalarSplineFunction {
    TensorSplineSpace space;
    Eigen::MatrixXd D;

    double eval(double x1, double x2, int d1 = 0, int d2 = 0) const
    {
        auto e1 = space.basis(0).evalBasis(x1, d1);
        auto e2 = space.basis(1).evalBasis(x2, d2);
        return detail::contract(D, e1, e2, d1, d2, space.degree());
    }
};

/// Bilinear patch from four corners (tensor corners c00, c10, c01, c11).
inline TensorPatch makeBilinearPatch(const Eigen::VectorXd& c00, const Eigen::VectorXd& c10,
                                     const Eigen::VectorXd& c01, const Eigen::VectorXd& c11)
{
    const int d = static_cast<int>(c00.size());
    TensorSplineSpace s(1, 0, 1);
    std::vector<Eigen::MatrixXd> C(d, Eigen::MatrixXd(2, 2));
    for (int c = 0; c < d; ++c) {
        C[c](0, 0) = c00(c);
        C[c](1, 0) = c10(c);
        C[c](0, 1) = c01(c);
        C[c](1, 1) = c11(c);
    }
    return TensorPatch(std::move(s), std::move(C));
}

/// True if every function of `src` lies in `dst` (open uniform spaces only).
inline bool spaceNests(const TensorSplineSpace& src, const TensorSplineSpace& dst)
{
    if (dst.degree() < src.degree()) return false;
    if (dst.elements() % src.elements() != 0) return false;
    if (src.elements() > 1 && dst.regularity() > src.regularity()) return false;
    return true;
}

/// Re-represent a patch exactly in a containing space by interpolation at the
/// tensor Greville abscissae. Throws if the target does not nest the source.
inline TensorPatch representIn(const TensorPatch& src, const TensorSplineSpace& target)
{
    C1SHELL_REQUIRE(spaceNests(src.space(), target), ParameterError,
                    "representIn: target space does not nest the source space");
    const auto g1 = target.basis(0).greville();
    const auto g2 = target.basis(1).greville();
    const int n1 = target.dim1(), n2 = target.dim2();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu1(target.basis(0).collocation(g1));
    Eigen::PartialPivLU<Eigen::MatrixXd> lu2(target.basis(1).collocation(g2));
    std::vector<Eigen::MatrixXd> out(src.dim());
    for (int c = 0; c < src.dim(); ++c) out[c].resize(n1, n2);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            PatchEval e = src.eval(g1[i], g2[j], 0);
            for (int c = 0; c < src.dim(); ++c) out[c](i, j) = e.point(c);
        }
    for (int c = 0; c < src.dim(); ++c) {
        out[c] = lu1.solve(out[c]);
        out[c] = lu2.solve(out[c].transpose()).transpose();
    }
    return TensorPatch(target, std::move(out));
}

/// Uniform h-refinement (element doubling per level).
inline TensorPatch refineUniform(const TensorPatch& src, int levels = 1)
{
    int k = src.space().elements() << levels;
    TensorSplineSpace target(src.space().degree(), src.space().regularity(), k);
    return representIn(src, target);
}

/// Degree elevation by one, keeping the continuity class.
inline TensorPatch elevateDegree(const TensorPatch& src)
{
    TensorSplineSpace target(src.space().degree() + 1, src.space().regularity(),
                             src.space().elements());
    return representIn(src, target);
}

} // namespace c1shell
