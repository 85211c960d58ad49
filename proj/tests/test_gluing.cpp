#include <catch2/catch_amalgamated.hpp>

#include <c1shell/gluing.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace c1shell;

namespace {

double directResidual(const MultiPatchSurface& surf, const Topology& topo, int edge,
                      const EdgeGluingData& g, int samples = 50)
{
    EdgeFrame fr = standardFormEdge(topo, edge);
    TensorPatch q1 = transformedPatch(surf.patch(fr.patch1), fr.sym1);
    TensorPatch q2 = transformedPatch(surf.patch(fr.patch2), fr.sym2);
    Poly beta = g.beta();
    double worst = 0.0;
    for (int i = 0; i <= samples; ++i) {
        double s = static_cast<double>(i) / samples;
        Eigen::VectorXd d2 = q2.eval(s, 0, 1).jac.col(1);
        Eigen::VectorXd d1 = q1.eval(0, s, 1).jac.col(0);
        Eigen::VectorXd t = q1.eval(0, s, 1).jac.col(1);
        double scale = std::max({d2.norm(), d1.norm(), t.norm()});
        worst = std::max(worst, (g.alpha1(s) * d2 + g.alpha2(s) * d1 + beta(s) * t).norm() / scale);
    }
    return worst;
}

} // namespace

TEST_CASE("two axis-aligned squares glue trivially")
{
    auto surf = fixtures::twoSquares();
    Topology topo = buildTopology(surf);
    EdgeGluingData g = computeGluing(surf, topo, 0);
    CHECK(g.alpha1(0.0) == Catch::Approx(1.0).margin(1e-12));
    CHECK(g.alpha1(1.0) == Catch::Approx(1.0).margin(1e-12));
    CHECK(g.alpha2(0.3) == Catch::Approx(1.0).margin(1e-12));
    CHECK(std::abs(g.beta1(0.7)) <= 1e-12);
    CHECK(std::abs(g.beta2(0.2)) <= 1e-12);
    CHECK(std::abs(g.beta()(0.5)) <= 1e-12);
}

TEST_CASE("boundary edges carry alpha=1, beta=0")
{
    auto surf = fixtures::twoSquares();
    Topology topo = buildTopology(surf);
    EdgeGluingData g = computeGluing(surf, topo, topo.numInterfaces());
    CHECK(g.boundary);
    CHECK(g.alpha1(0.3) == 1.0);
    CHECK(g.beta1(0.3) == 0.0);
}

TEST_CASE("slanted planar pair satisfies the identity")
{
    auto surf = fixtures::slantedPair();
    Topology topo = buildTopology(surf);
    EdgeGluingData g = computeGluing(surf, topo, 0);
    CHECK(directResidual(surf, topo, 0, g) <= 1e-12);
    // split is consistent: beta = alpha1 beta2 + alpha2 beta1 holds by
    // construction, and alpha must stay positive
    for (int i = 0; i <= 10; ++i) {
        double s = i / 10.0;
        CHECK(g.alpha1(s) * g.alpha2(s) > 0.0);
    }
}

TEST_CASE("minimization picks the normalized representative")
{
    // doubling one patch's parametric speed scales the gluing family; the
    // minimizer of ||a1-1||^2+||a2-1||^2 within that family is unique
    auto surf = fixtures::twoSquares();
    Topology topo = buildTopology(surf);
    EdgeGluingData g = computeGluing(surf, topo, 0);
    // family here is gamma * (1,1,0): best gamma is 1
    CHECK(g.alpha1(0.5) == Catch::Approx(1.0).margin(1e-12));

    // scale covariance: uniform scaling leaves alpha and beta unchanged
    std::vector<TensorPatch> scaled;
    for (int i = 0; i < surf.numPatches(); ++i) {
        TensorPatch p = surf.patch(i);
        for (int c = 0; c < p.dim(); ++c) p.coefs(c) *= 7.5;
        scaled.push_back(p);
    }
    MultiPatchSurface ssurf(std::move(scaled));
    Topology stopo = buildTopology(ssurf);
    EdgeGluingData gs = computeGluing(ssurf, stopo, 0);
    for (int i = 0; i <= 5; ++i) {
        double s = i / 5.0;
        CHECK(gs.alpha1(s) == Catch::Approx(g.alpha1(s)).margin(1e-11));
        CHECK(gs.beta1(s) == Catch::Approx(g.beta1(s)).margin(1e-11));
    }
}

TEST_CASE("swapping roles transforms the data by the documented symmetry")
{
    auto surf = fixtures::slantedPair();
    Topology topo = buildTopology(surf);
    EdgeGluingData g = computeGluing(surf, topo, 0);
    EdgeGluingData r = g.reversed();
    // the reversed data solves the identity of the reversed frame; its
    // residual is therefore invariant
    CHECK(g.alpha1(0.25) == Catch::Approx(r.alpha2(0.75)));
    CHECK(g.beta1(0.25) == Catch::Approx(-r.beta2(0.75)));
    Poly b = g.beta(), br = r.beta();
    CHECK(b(0.3) == Catch::Approx(-br(0.7)));
}

TEST_CASE("verify reports every edge and flags perturbations")
{
    auto surf = fixtures::twoSquares();
    Topology topo = buildTopology(surf);
    auto reports = verifyASG1(surf, topo);
    CHECK(static_cast<int>(reports.size()) == topo.numEdges());
    CHECK(allASG1(reports));

    SECTION("single patch vacuously passes")
    {
        auto sp = fixtures::singleSquare();
        Topology t1 = buildTopology(sp);
        CHECK(allASG1(verifyASG1(sp, t1)));
    }

    SECTION("perturbing an interior control point breaks AS-G1")
    {
        // refine first so an interior control point exists next to the
        // interface whose motion cannot be matched by linear gluing data
        TensorSplineSpace fine(2, 1, 4);
        std::vector<TensorPatch> patches;
        for (int i = 0; i < surf.numPatches(); ++i) patches.push_back(representIn(surf.patch(i), fine));
        patches[1].coefs(2)(1, 2) += 1e-3; // out-of-plane bump off the interface row? no: row 1 = first interior
        MultiPatchSurface bumped(std::move(patches));
        Topology t2 = buildTopology(bumped);
        auto rep = verifyASG1(bumped, t2);
        bool anyFail = false;
        for (const auto& r : rep) anyFail = anyFail || !r.pass(1e-10);
        CHECK(anyFail);
        CHECK_THROWS_AS(computeGluing(bumped, t2, 0), NotASG1Error);
    }
}

TEST_CASE("linearization projects onto exact AS-G1 form")
{
    SECTION("already AS-G1 input is a fixed point")
    {
        auto surf = fixtures::slantedPair();
        Topology topo = buildTopology(surf);
        MultiPatchSurface out = asG1Linearize(surf, topo);
        for (int i = 0; i < surf.numPatches(); ++i)
            for (int c = 0; c < surf.dim(); ++c)
                CHECK((out.patch(i).coefs(c) - surf.patch(i).coefs(c)).cwiseAbs().maxCoeff() <= 1e-12);
    }

    SECTION("non-AS-G1 planar pair is repaired, traces preserved")
    {
        // quadratic two-patch with a bent transversal flow: not AS-G1
        TensorSplineSpace s(2, 1, 2);
        auto baseA = makeBilinearPatch(fixtures::p3(-1, 0).head<2>(), fixtures::p3(0, 0).head<2>(),
                                       fixtures::p3(-1, 1).head<2>(), fixtures::p3(0, 1).head<2>());
        auto baseB = makeBilinearPatch(fixtures::p3(0, 0).head<2>(), fixtures::p3(1, 0).head<2>(),
                                       fixtures::p3(0, 1).head<2>(), fixtures::p3(1, 1).head<2>());
        TensorPatch A = representIn(baseA, s), B = representIn(baseB, s);
        // swirl the interior of B: nonlinear transversal derivative along the interface
        B.coefs(1)(1, 2) += 0.08;
        B.coefs(0)(1, 1) += 0.05;
        std::vector<TensorPatch> patches{A, B};
        MultiPatchSurface bent(std::move(patches));
        Topology topo = buildTopology(bent);
        auto before = verifyASG1(bent, topo);
        REQUIRE(before[0].maxResidual > 1e-4);

        MultiPatchSurface fixed = asG1Linearize(bent, topo);
        auto after = verifyASG1(fixed, topo);
        CHECK(allASG1(after, 1e-10));
        // interface trace rows are bit-identical
        EdgeFrame fr = standardFormEdge(topo, 0);
        TensorPatch q1a = transformedPatch(bent.patch(fr.patch1), fr.sym1);
        TensorPatch q1b = transformedPatch(fixed.patch(fr.patch1), fr.sym1);
        for (int c = 0; c < 2; ++c)
            CHECK((q1a.coefs(c).row(0) - q1b.coefs(c).row(0)).cwiseAbs().maxCoeff() == 0.0);
        // only first interior lines changed
        for (int c = 0; c < 2; ++c) {
            CHECK((bent.patch(0).coefs(c).bottomRows(1) - fixed.patch(0).coefs(c).bottomRows(1))
                      .cwiseAbs()
                      .maxCoeff() <= 1e-15);
        }
    }
}
