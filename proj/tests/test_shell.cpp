#include <catch2/catch_amalgamated.hpp>

#include <c1shell/shell.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace c1shell;

namespace {

struct Setup {
    MultiPatchSurface surf;
    Topology topo;
    C1Space space;
    ShellAssembler assembler;

    Setup(MultiPatchSurface s, ShellMaterial mat, LoadCase loads = {}, BoundaryConditionSet bcs = {},
          int p = 3, int r = 1, int k = 4)
        : surf(std::move(s)), topo(buildTopology(surf)), space(surf, topo, p, r, k),
          assembler(space, mat, std::move(loads), std::move(bcs))
    {
    }
};

ShellMaterial steel() { return ShellMaterial(2e11, 0.3, 0.01); }

/// Coefficients of the displacement field built from per-component fits.
Eigen::VectorXd fitDisplacement(const C1Space& space,
                                const std::function<Eigen::Vector3d(int, double, double)>& f)
{
    Eigen::VectorXd u(3 * space.dim());
    for (int c = 0; c < 3; ++c) {
        auto [coef, res] = fitFunction(space, [&](int ip, double a, double b) { return f(ip, a, b)(c); });
        for (int i = 0; i < space.dim(); ++i) u(3 * i + c) = coef(i);
    }
    return u;
}

} // namespace

TEST_CASE("fundamental forms")
{
    SECTION("flat unit square: a = I, b = 0")
    {
        Setup s(fixtures::twoSquares(), steel());
        ShellState state(s.space);
        auto ff = s.assembler.fundamentalForms(state, 0, 0.3, 0.7, Configuration::Undeformed);
        CHECK(ff.a.isApprox(Eigen::Matrix2d::Identity(), 1e-13));
        CHECK(ff.b.cwiseAbs().maxCoeff() <= 1e-13);
        CHECK((ff.normal - Eigen::Vector3d(0, 0, 1)).norm() <= 1e-13);
    }

    SECTION("hyperbolic surface at the center: b = diag(2, -2)")
    {
        Setup s(fixtures::centeredHyperbolicPatch(), steel());
        ShellState state(s.space);
        auto ff = s.assembler.fundamentalForms(state, 0, 0.5, 0.5, Configuration::Undeformed);
        CHECK(ff.b(0, 0) == Catch::Approx(2.0));
        CHECK(ff.b(1, 1) == Catch::Approx(-2.0));
        CHECK(ff.b(0, 1) == Catch::Approx(0.0).margin(1e-12));
    }

    SECTION("Weingarten consistency by finite differences")
    {
        Setup s(fixtures::hyperbolicTwoPatch(), steel());
        ShellState state(s.space);
        for (int trial = 0; trial < 4; ++trial) {
            const int ip = trial % 2;
            const double x1 = oracles::uniform(0.1, 0.9), x2 = oracles::uniform(0.1, 0.9);
            auto ff = s.assembler.fundamentalForms(state, ip, x1, x2, Configuration::Undeformed);
            for (int beta = 0; beta < 2; ++beta) {
                auto n_of = [&](double t) {
                    const double a = (beta == 0) ? t : x1;
                    const double b = (beta == 0) ? x2 : t;
                    return s.assembler.fundamentalForms(state, ip, a, b, Configuration::Undeformed).normal;
                };
                const double t0 = (beta == 0) ? x1 : x2;
                const double hfd = 1e-6;
                Eigen::Vector3d dn = (n_of(t0 + hfd) - n_of(t0 - hfd)) / (2 * hfd);
                for (int alpha = 0; alpha < 2; ++alpha) {
                    const double lhs = -dn.dot(ff.basis.col(alpha));
                    CHECK(std::abs(lhs - ff.b(alpha, beta)) <=
                          1e-6 * std::max(1.0, std::abs(ff.b(alpha, beta))));
                }
            }
        }
    }
}

TEST_CASE("strains")
{
    Setup s(fixtures::hyperbolicTwoPatch(), steel());

    SECTION("zero displacement gives zero strains")
    {
        ShellState state(s.space);
        Eigen::Matrix2d eps, kap;
        s.assembler.strains(state, 0, 0.4, 0.6, eps, kap);
        CHECK(eps.cwiseAbs().maxCoeff() == 0.0);
        CHECK(kap.cwiseAbs().maxCoeff() == 0.0);
    }

    SECTION("rigid translation gives zero strains")
    {
        ShellState state(s.space);
        Eigen::Vector3d t(0.3, -0.2, 0.7);
        Eigen::VectorXd u =
            fitDisplacement(s.space, [&](int, double, double) { return t; });
        state.setDisplacement(u);
        for (int trial = 0; trial < 4; ++trial) {
            Eigen::Matrix2d eps, kap;
            s.assembler.strains(state, trial % 2, oracles::uniform(), oracles::uniform(), eps, kap);
            CHECK(eps.cwiseAbs().maxCoeff() <= 1e-12);
            CHECK(kap.cwiseAbs().maxCoeff() <= 1e-11);
        }
    }

    SECTION("uniaxial stretch of a flat plate is Green-Lagrange exact")
    {
        Setup flat(fixtures::twoSquares(), steel());
        ShellState state(flat.space);
        const double e = 0.05;
        Eigen::VectorXd u = fitDisplacement(flat.space, [&](int ip, double a, double b) {
            PatchEval pe = flat.surf.patch(ip).eval(a, b, 0);
            return Eigen::Vector3d(e * pe.point(0), 0.0, 0.0);
        });
        state.setDisplacement(u);
        Eigen::Matrix2d eps, kap;
        flat.assembler.strains(state, 0, 0.37, 0.61, eps, kap);
        CHECK(eps(0, 0) == Catch::Approx(e + 0.5 * e * e).epsilon(1e-9));
        CHECK(std::abs(eps(1, 1)) <= 1e-12);
        CHECK(kap.cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("von Mises membrane stress")
{
    Setup flat(fixtures::twoSquares(), steel());
    ShellState state(flat.space);
    CHECK(flat.assembler.vonMisesMembrane(state, 0, 0.5, 0.5) == 0.0);

    const double e = 1e-6;
    Eigen::VectorXd u = fitDisplacement(flat.space, [&](int ip, double a, double b) {
        PatchEval pe = flat.surf.patch(ip).eval(a, b, 0);
        return Eigen::Vector3d(e * pe.point(0), 0.0, 0.0);
    });
    state.setDisplacement(u);
    const double E = 2e11, nu = 0.3;
    const double expected = E * e / (1 - nu * nu) * std::sqrt(1 - nu + nu * nu);
    CHECK(flat.assembler.vonMisesMembrane(state, 1, 0.3, 0.8) ==
          Catch::Approx(expected).epsilon(1e-4));
}

TEST_CASE("assembled operators")
{
    LoadCase loads;
    loads.distributed = Eigen::Vector3d(0, 0, -80.0);
    Setup s(fixtures::hyperbolicTwoPatch(), steel(), loads);

    SECTION("residual at zero equals minus the external load")
    {
        ShellState state(s.space);
        Eigen::VectorXd r = s.assembler.residual(state, 1.0);
        CHECK((r + s.assembler.externalScaled()).norm() <= 1e-12 * s.assembler.externalScaled().norm());
    }

    SECTION("stiffness is symmetric")
    {
        ShellState state(s.space);
        Eigen::VectorXd u = Eigen::VectorXd::Random(3 * s.space.dim()) * 1e-3;
        state.setDisplacement(u);
        Eigen::SparseMatrix<double> K = s.assembler.tangent(state, 1.0);
        Eigen::SparseMatrix<double> Kt = Eigen::SparseMatrix<double>(K.transpose());
        double scale = 0.0, worst = 0.0;
        for (int k = 0; k < K.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(K, k); it; ++it) {
                scale = std::max(scale, std::abs(it.value()));
                worst = std::max(worst, std::abs(it.value() - Kt.coeff(it.row(), it.col())));
            }
        CHECK(worst <= 1e-9 * scale);
    }

    SECTION("free-floating rigid translations are in the nullspace")
    {
        Eigen::SparseMatrix<double> K = s.assembler.linearStiffness();
        const double knorm = Eigen::RowVectorXd::Ones(K.rows()) * K.cwiseAbs() *
                             Eigen::VectorXd::Ones(K.cols()); // cheap upper bound on scale
        for (int c = 0; c < 3; ++c) {
            Eigen::Vector3d t = Eigen::Vector3d::Zero();
            t(c) = 1.0;
            Eigen::VectorXd u = fitDisplacement(s.space, [&](int, double, double) { return t; });
            CHECK((K * u).norm() <= 1e-8 * std::sqrt(knorm) * u.norm());
        }
    }

    SECTION("rigid translation leaves the internal residual unchanged")
    {
        ShellState state(s.space);
        Eigen::VectorXd u0 = Eigen::VectorXd::Random(3 * s.space.dim()) * 1e-3;
        state.setDisplacement(u0);
        Eigen::VectorXd r0 = s.assembler.residual(state, 0.0);
        Eigen::VectorXd shift =
            fitDisplacement(s.space, [&](int, double, double) { return Eigen::Vector3d(0.1, 0.2, -0.3); });
        state.setDisplacement(u0 + shift);
        Eigen::VectorXd r1 = s.assembler.residual(state, 0.0);
        CHECK((r1 - r0).norm() <= 1e-9 * std::max(1.0, r0.norm()));
    }
}

TEST_CASE("tangent and residual are consistent derivatives")
{
    LoadCase loads;
    loads.distributed = Eigen::Vector3d(0, 0, -80.0);
    BoundaryConditionSet bcs;
    bcs.conditions.push_back({0, BoundaryConditionType::ClampedWeak});
    Setup pre(fixtures::hyperbolicTwoPatch(), steel());
    // clamp the west boundary edges (x = -1)
    BoundaryConditionSet clamped;
    for (int e = pre.topo.numInterfaces(); e < pre.topo.numEdges(); ++e) {
        PatchSide ps = pre.topo.edgeSideA(e);
        TensorPatch q = transformedPatch(pre.surf.patch(ps.patch), cornerRotation(0));
        Eigen::VectorXd mid = pre.surf.patch(ps.patch).eval(ps.side == 0 ? 0 : (ps.side == 1 ? 1 : 0.5),
                                                            ps.side == 2 ? 0 : (ps.side == 3 ? 1 : 0.5), 0)
                                  .point;
        if (std::abs(mid(0) + 1.0) < 1e-9) clamped.conditions.push_back({e, BoundaryConditionType::ClampedWeak});
    }
    REQUIRE(clamped.conditions.size() == 1);
    Setup s(fixtures::hyperbolicTwoPatch(), ShellMaterial(2e5, 0.3, 0.02), loads, clamped);

    const int ndof = 3 * s.space.dim();
    Eigen::VectorXd u = Eigen::VectorXd::Random(ndof) * 1e-3;
    ShellState state(s.space);
    state.setDisplacement(u);
    const double lambda = 1.0;

    SECTION("K v matches finite differences of R")
    {
        Eigen::SparseMatrix<double> K = s.assembler.tangent(state, lambda);
        for (int trial = 0; trial < 3; ++trial) {
            Eigen::VectorXd v = Eigen::VectorXd::Random(ndof);
            v.normalize();
            const double hfd = 1e-6;
            ShellState sp(s.space), sm(s.space);
            sp.setDisplacement(u + hfd * v);
            sm.setDisplacement(u - hfd * v);
            Eigen::VectorXd fd =
                (s.assembler.residual(sp, lambda) - s.assembler.residual(sm, lambda)) / (2 * hfd);
            Eigen::VectorXd kv = K * v;
            CHECK((fd - kv).norm() <= 1e-6 * std::max(1.0, kv.norm()));
        }
    }

    SECTION("R v matches finite differences of the energy")
    {
        Eigen::VectorXd r = s.assembler.residual(state, lambda);
        for (int trial = 0; trial < 3; ++trial) {
            Eigen::VectorXd v = Eigen::VectorXd::Random(ndof);
            v.normalize();
            const double hfd = 1e-6;
            ShellState sp(s.space), sm(s.space);
            sp.setDisplacement(u + hfd * v);
            sm.setDisplacement(u - hfd * v);
            const double fd =
                (s.assembler.energy(sp, lambda) - s.assembler.energy(sm, lambda)) / (2 * hfd);
            CHECK(std::abs(fd - r.dot(v)) <= 1e-6 * std::max(1.0, std::abs(r.dot(v))));
        }
    }
}

TEST_CASE("weak clamp tightens monotonically with the penalty scale")
{
    LoadCase loads;
    loads.distributed = Eigen::Vector3d(0, 0, -80.0);
    Setup pre(fixtures::hyperbolicTwoPatch(), steel());
    std::vector<int> west;
    for (int e = pre.topo.numInterfaces(); e < pre.topo.numEdges(); ++e) {
        PatchSide ps = pre.topo.edgeSideA(e);
        Eigen::VectorXd mid = pre.surf.patch(ps.patch).eval(ps.side == 0 ? 0 : (ps.side == 1 ? 1 : 0.5),
                                                            ps.side == 2 ? 0 : (ps.side == 3 ? 1 : 0.5), 0)
                                  .point;
        if (std::abs(mid(0) + 1.0) < 1e-9) west.push_back(e);
    }

    double prevDisp = 1e300, prevRot = 1e300;
    for (double scale : {1e3, 1e4, 1e5, 1e6}) {
        BoundaryConditionSet bcs;
        bcs.penaltyScale = scale;
        for (int e : west) bcs.conditions.push_back({e, BoundaryConditionType::ClampedWeak});
        ShellAssembler assembler(pre.space, steel(), loads, bcs);
        Eigen::SparseMatrix<double> K = assembler.linearStiffness();
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
        REQUIRE(solver.info() == Eigen::Success);
        Eigen::VectorXd u = solver.solve(assembler.externalScaled());
        ShellState state(pre.space);
        state.setDisplacement(u);
        auto [dispM, rotM] = assembler.boundaryConditionMeasures(state);
        CHECK(dispM < prevDisp);
        CHECK(rotM < prevRot);
        prevDisp = dispM;
        prevRot = rotM;
    }
}
