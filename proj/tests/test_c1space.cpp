#include <catch2/catch_amalgamated.hpp>

#include <c1shell/c1space.hpp>

#include "c1checks.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace c1shell;

namespace {

C1Space makeSpace(const MultiPatchSurface& surf, const Topology& topo, int p = 3, int r = 1, int k = 4)
{
    return C1Space(surf, topo, p, r, k);
}

} // namespace

TEST_CASE("function counts per entity")
{
    auto surf = fixtures::twoSquares();
    Topology topo = buildTopology(surf);
    C1Space space(surf, topo, 3, 1, 4);

    // n = 10, n0 = 7, n1 = 6: 36 per patch, 3 per edge, 6 per vertex
    int byKind[3] = {0, 0, 0};
    for (const auto& f : space.functions()) byKind[static_cast<int>(f.kind)]++;
    CHECK(byKind[0] == 2 * 36);
    CHECK(byKind[1] == 7 * 3);
    CHECK(byKind[2] == 6 * 6);
    CHECK(space.dim() == 129);
    CHECK(space.dim() == space.expectedDimension());
}

TEST_CASE("parameter bounds")
{
    auto surf = fixtures::twoSquares();
    Topology topo = buildTopology(surf);
    CHECK_THROWS_AS(makeSpace(surf, topo, 3, 1, 2), ParameterError); // k below (4-r)/(p-r-1)
    CHECK_THROWS_AS(makeSpace(surf, topo, 2, 0, 4), ParameterError); // degree too low

    // non-AS-G1 surface is rejected during construction
    TensorSplineSpace fine(2, 1, 4);
    std::vector<TensorPatch> patches;
    for (int i = 0; i < surf.numPatches(); ++i) patches.push_back(representIn(surf.patch(i), fine));
    patches[1].coefs(2)(1, 2) += 1e-3;
    MultiPatchSurface bumped(std::move(patches));
    Topology t2 = buildTopology(bumped);
    CHECK_THROWS_AS(makeSpace(bumped, t2), NotASG1Error);
}

TEST_CASE("patch functions are interior B-splines")
{
    auto surf = fixtures::twoSquares();
    Topology topo = buildTopology(surf);
    C1Space space(surf, topo, 3, 1, 4);

    const auto& fn = space.functions()[0];
    REQUIRE(fn.kind == C1Function::Kind::Patch);
    Eigen::MatrixXd D = space.functionTable(0, fn.entity);
    CHECK(D(fn.j1, fn.j2) == 1.0);
    CHECK(D.cwiseAbs().sum() == 1.0);
    // vanishes with vanishing gradient on all patch sides
    for (double s : {0.0, 0.33, 1.0}) {
        for (auto [x1, x2] : {std::pair{0.0, s}, {1.0, s}, {s, 0.0}, {s, 1.0}}) {
            CHECK(space.evalFunction(0, fn.entity, x1, x2) == 0.0);
            CHECK(space.evalFunction(0, fn.entity, x1, x2, 1, 0) == 0.0);
            CHECK(space.evalFunction(0, fn.entity, x1, x2, 0, 1) == 0.0);
        }
    }
    // equals the tensor B-spline in patch coordinates
    double x1 = oracles::uniform(), x2 = oracles::uniform();
    double expected = space.families().full.evalOne(fn.j1, x1) * space.families().full.evalOne(fn.j2, x2);
    CHECK(space.evalFunction(0, fn.entity, x1, x2) == Catch::Approx(expected).margin(1e-14));
}

TEST_CASE("edge function traces")
{
    auto surf = fixtures::twoSquares();
    Topology topo = buildTopology(surf);
    C1Space space(surf, topo, 3, 1, 4);
    const auto& fam = space.families();

    for (int f = 0; f < space.dim(); ++f) {
        const auto& fn = space.functions()[f];
        if (fn.kind != C1Function::Kind::Edge || fn.entity != 0) continue;
        const EdgeFrame& fr = space.edgeFrame(0);
        for (int t = 0; t <= 50; ++t) {
            const double s = t / 50.0;
            auto o1 = fr.sym1.apply(0.0, s);
            const double v = space.evalFunction(f, fr.patch1, o1[0], o1[1]);
            if (fn.j2 == 0) {
                CHECK(std::abs(v - fam.plus.evalOne(fn.j1, s)) <= 1e-12);
            } else {
                CHECK(std::abs(v) <= 1e-13); // transversal functions have zero trace
            }
        }
    }
}

TEST_CASE("straight interface reduces the trace function to a product")
{
    // beta = 0 on the two-square fixture: f = N_{j1}(s) M_0(t)
    auto surf = fixtures::twoSquares();
    Topology topo = buildTopology(surf);
    C1Space space(surf, topo, 3, 1, 4);
    const auto& fam = space.families();
    for (int f = 0; f < space.dim(); ++f) {
        const auto& fn = space.functions()[f];
        if (fn.kind != C1Function::Kind::Edge || fn.entity != 0 || fn.j2 != 0) continue;
        const EdgeFrame& fr = space.edgeFrame(0);
        for (int t = 0; t < 12; ++t) {
            double a = oracles::uniform(), b = oracles::uniform();
            auto o = fr.sym1.apply(a, b);
            double expected = fam.plus.evalOne(fn.j1, b) * mFunction(fam.full, fam.p, fam.r, 0, a);
            CHECK(space.evalFunction(f, fr.patch1, o[0], o[1]) == Catch::Approx(expected).margin(1e-12));
        }
    }
}

TEST_CASE("global C1 smoothness on planar fixtures")
{
    for (auto builder : {&fixtures::twoSquares, &fixtures::flatCross, &fixtures::slantedPair}) {
        auto surf = builder();
        Topology topo = buildTopology(surf);
        C1Space space(surf, topo, 3, 1, 4);
        auto res = c1checks::checkInterfaceSmoothness(space);
        INFO("functions checked: " << res.functionsChecked);
        CHECK(res.worstValue <= 1e-9);
        CHECK(res.worstGrad <= 1e-9);
    }
}

TEST_CASE("vertex functions carry the prescribed jet")
{
    auto surf = fixtures::flatCross();
    Topology topo = buildTopology(surf);
    C1Space space(surf, topo, 3, 1, 4);
    const auto& fam = space.families();

    int interior = -1;
    for (size_t v = 0; v < topo.vertices.size(); ++v)
        if (topo.vertices[v].interior) interior = static_cast<int>(v);
    REQUIRE(interior >= 0);
    VertexFrame fr = standardFormVertex(surf, topo, interior);

    // sigma from its defining formula (flat unit cross: all Jacobians are I2)
    const double h = fam.full.meshSize();
    const double sigma = 1.0 / (h / (fam.p * 4.0) * 4.0 * std::sqrt(2.0));

    for (int f = 0; f < space.dim(); ++f) {
        const auto& fn = space.functions()[f];
        if (fn.kind != C1Function::Kind::Vertex || fn.entity != interior) continue;
        for (size_t l = 0; l < fr.patches.size(); ++l) {
            const int ip = fr.patches[l];
            auto corner = fr.syms[l].apply(0.0, 0.0);
            const double v = space.evalFunction(f, ip, corner[0], corner[1]);
            if (fn.j1 == 0 && fn.j2 == 0) {
                CHECK(v == Catch::Approx(1.0).margin(1e-12));
            } else {
                CHECK(std::abs(v) <= 1e-12);
            }
            if (fn.j1 + fn.j2 == 1) {
                ScalarSplineFunction sf{TensorSplineSpace(fam.p, fam.r, fam.k),
                                        space.functionTable(f, ip)};
                Eigen::Vector3d g =
                    fr.rotation * c1checks::surfaceGradient(surf.patch(ip), sf, corner[0], corner[1]);
                Eigen::Vector3d expected(fn.j1 == 1 ? sigma : 0.0, fn.j2 == 1 ? sigma : 0.0, 0.0);
                CHECK((g - expected).norm() <= 1e-9 * sigma);
            }
        }
    }
}

TEST_CASE("extraction is linear and locally supported")
{
    auto surf = fixtures::twoSquares();
    Topology topo = buildTopology(surf);
    C1Space space(surf, topo, 3, 1, 4);

    Eigen::VectorXd x = Eigen::VectorXd::Random(space.dim());
    Eigen::VectorXd y = Eigen::VectorXd::Random(space.dim());
    const double a = 1.7, b = -0.3;
    for (int ip = 0; ip < 2; ++ip) {
        Eigen::MatrixXd lin = space.patchTable(ip, a * x + b * y);
        Eigen::MatrixXd sep = a * space.patchTable(ip, x) + b * space.patchTable(ip, y);
        CHECK((lin - sep).cwiseAbs().maxCoeff() <= 1e-12 * lin.cwiseAbs().maxCoeff());
    }

    // support locality: tables on patches outside the support are empty
    for (int f = 0; f < space.dim(); ++f) {
        const auto& fn = space.functions()[f];
        for (int ip = 0; ip < 2; ++ip) {
            bool inSupport = false;
            for (int sp : fn.supportPatches) inSupport = inSupport || sp == ip;
            if (!inSupport) CHECK(space.functionTable(f, ip).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("constants are reproduced exactly")
{
    for (auto builder : {&fixtures::twoSquares, &fixtures::flatCross}) {
        auto surf = builder();
        Topology topo = buildTopology(surf);
        C1Space space(surf, topo, 3, 1, 4);
        auto [c, residual] = fitFunction(space, [](int, double, double) { return 1.0; });
        CHECK(residual <= 1e-10);
    }
}

TEST_CASE("coarse space embeds into the refined space")
{
    auto surf = fixtures::twoSquares();
    Topology topo = buildTopology(surf);
    C1Space coarse(surf, topo, 3, 1, 4);
    C1Space fine(surf, topo, 3, 1, 8);

    Eigen::VectorXd c = Eigen::VectorXd::Random(coarse.dim());
    TensorSplineSpace cs(3, 1, 4);
    std::vector<ScalarSplineFunction> coarseFns;
    for (int ip = 0; ip < surf.numPatches(); ++ip)
        coarseFns.push_back({cs, coarse.patchTable(ip, c)});
    auto [cf, residual] = fitFunction(fine, [&](int ip, double x1, double x2) {
        return coarseFns[ip].eval(x1, x2);
    });
    const double scale = c.cwiseAbs().maxCoeff();
    CHECK(residual <= 1e-10 * std::max(1.0, scale));
}

TEST_CASE("dimension is stable under patch permutation")
{
    auto surf = fixtures::flatCross();
    Topology t1 = buildTopology(surf);
    const int d1 = C1Space(surf, t1, 3, 1, 4).dim();
    std::vector<TensorPatch> shuffled;
    for (int i : {3, 1, 0, 2}) shuffled.push_back(surf.patch(i));
    MultiPatchSurface s2(std::move(shuffled));
    Topology t2 = buildTopology(s2);
    CHECK(C1Space(s2, t2, 3, 1, 4).dim() == d1);
}
