#include <catch2/catch_amalgamated.hpp>

#include <c1shell/tensor.hpp>

#include "oracles.hpp"

using namespace c1shell;

namespace {

Eigen::Vector2d v2(double x, double y) { return Eigen::Vector2d(x, y); }

/// Exact biquadratic representation of (x1, x2, x1^2 - x2^2) on [0,1]^2,
/// interpolated independently of representIn.
TensorPatch hyperbolicUnitPatch()
{
    TensorSplineSpace s(2, 1, 1);
    const auto g = s.basis(0).greville();
    const int n = s.dim1();
    Eigen::MatrixXd B = s.basis(0).collocation(g);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    std::vector<Eigen::MatrixXd> C(3, Eigen::MatrixXd(n, n));
    Eigen::MatrixXd F0(n, n), F1(n, n), F2(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            F0(i, j) = g[i];
            F1(i, j) = g[j];
            F2(i, j) = g[i] * g[i] - g[j] * g[j];
        }
    C[0] = lu.solve(F0);
    C[0] = lu.solve(C[0].transpose()).transpose();
    C[1] = lu.solve(F1);
    C[1] = lu.solve(C[1].transpose()).transpose();
    C[2] = lu.solve(F2);
    C[2] = lu.solve(C[2].transpose()).transpose();
    return TensorPatch(s, C);
}

} // namespace

TEST_CASE("identity bilinear square patch")
{
    TensorPatch p = makeBilinearPatch(v2(0, 0), v2(1, 0), v2(0, 1), v2(1, 1));
    for (double x : {0.0, 0.3, 1.0})
        for (double y : {0.0, 0.6, 1.0}) {
            PatchEval e = p.eval(x, y, 1);
            CHECK(e.point(0) == Catch::Approx(x).margin(1e-15));
            CHECK(e.point(1) == Catch::Approx(y).margin(1e-15));
            CHECK(e.jac(0, 0) == Catch::Approx(1.0));
            CHECK(e.jac(1, 1) == Catch::Approx(1.0));
            CHECK(e.jac(0, 1) == Catch::Approx(0.0).margin(1e-15));
        }
}

TEST_CASE("hyperbolic surface Hessian")
{
    TensorPatch p = hyperbolicUnitPatch();
    PatchEval e = p.eval(0.0, 0.0, 2);
    // hess columns: (11, 22, 12); third surface component
    CHECK(e.hess(2, 0) == Catch::Approx(2.0));
    CHECK(e.hess(2, 1) == Catch::Approx(-2.0));
    CHECK(e.hess(2, 2) == Catch::Approx(0.0).margin(1e-12));
    CHECK(e.hess(0, 0) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("patch Jacobian and Hessian match finite differences")
{
    TensorSplineSpace s(3, 1, 3);
    const int n = s.dim1();
    std::vector<Eigen::MatrixXd> C(3);
    for (int c = 0; c < 3; ++c) C[c] = Eigen::MatrixXd::Random(n, n);
    TensorPatch p(s, C);
    for (int t = 0; t < 5; ++t) {
        double x = oracles::uniform(0.05, 0.95), y = oracles::uniform(0.05, 0.95);
        PatchEval e = p.eval(x, y, 2);
        for (int c = 0; c < 3; ++c) {
            auto fx = [&](double u) { return p.eval(u, y, 0).point(c); };
            auto fy = [&](double v) { return p.eval(x, v, 0).point(c); };
            CHECK(std::abs(e.jac(c, 0) - oracles::fdDeriv(fx, x, 1)) <=
                  1e-7 * std::max(1.0, std::abs(e.jac(c, 0))));
            CHECK(std::abs(e.jac(c, 1) - oracles::fdDeriv(fy, y, 1)) <=
                  1e-7 * std::max(1.0, std::abs(e.jac(c, 1))));
            const double hscale = std::max(1.0, e.hess.cwiseAbs().maxCoeff());
            CHECK(std::abs(e.hess(c, 0) - oracles::fdDeriv(fx, x, 2)) <= 1e-6 * hscale);
            CHECK(std::abs(e.hess(c, 1) - oracles::fdDeriv(fy, y, 2)) <= 1e-6 * hscale);
            auto gxy = [&](double v) { return p.eval(x, v, 1).jac(c, 0); };
            CHECK(std::abs(e.hess(c, 2) - oracles::fdDeriv(gxy, y, 1)) <= 1e-6 * hscale);
        }
    }
}

TEST_CASE("knot insertion reproduces the point map")
{
    TensorPatch p = hyperbolicUnitPatch();
    TensorPatch fine = refineUniform(p, 1);
    CHECK(fine.space().elements() == 2);
    for (int t = 0; t < 100; ++t) {
        double x = oracles::uniform(), y = oracles::uniform();
        CHECK((p.eval(x, y, 0).point - fine.eval(x, y, 0).point).norm() <= 1e-12);
    }
}

TEST_CASE("degree elevation reproduces the point map")
{
    TensorPatch p = hyperbolicUnitPatch();
    TensorPatch up = elevateDegree(p);
    CHECK(up.space().degree() == 3);
    for (int t = 0; t < 100; ++t) {
        double x = oracles::uniform(), y = oracles::uniform();
        CHECK((p.eval(x, y, 0).point - up.eval(x, y, 0).point).norm() <= 1e-12);
    }
}

TEST_CASE("non-nesting refinement is rejected")
{
    TensorPatch p(TensorSplineSpace(3, 1, 2), std::vector<Eigen::MatrixXd>(2, Eigen::MatrixXd::Zero(6, 6)));
    CHECK_THROWS_AS(representIn(p, TensorSplineSpace(2, 1, 2)), ParameterError); // degree drop
    CHECK_THROWS_AS(representIn(p, TensorSplineSpace(3, 1, 3)), ParameterError); // 3 not multiple of 2
    CHECK_THROWS_AS(representIn(p, TensorSplineSpace(3, 2, 2)), ParameterError); // smoother target
}
