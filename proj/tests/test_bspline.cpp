#include <catch2/catch_amalgamated.hpp>

#include <c1shell/bspline.hpp>

#include "oracles.hpp"

using namespace c1shell;

TEST_CASE("open uniform knot structure and dimensions")
{
    for (int p : {3, 4, 5})
        for (int r = 1; r <= p - 2; ++r)
            for (int k = 1; k <= 16; ++k) {
                BSplineBasis b(p, r, k);
                const int n = p + (k - 1) * (p - r) + 1;
                CHECK(b.dimension() == n);
                // knot-vector arithmetic: #knots = n + p + 1
                CHECK(static_cast<int>(b.knots().size()) == n + p + 1);
                // first/last multiplicity p+1, interior uniformly spaced
                for (int i = 0; i <= p; ++i) {
                    CHECK(b.knots()[i] == 0.0);
                    CHECK(b.knots()[b.knots().size() - 1 - i] == 1.0);
                }
            }

    BSplineBasis b(3, 1, 4);
    CHECK(b.dimension() == 10);
    CHECK(BSplineBasis(3, 2, 4).dimension() == 7);  // S^{p,r+1}: n0
    CHECK(BSplineBasis(2, 1, 4).dimension() == 6);  // S^{p-1,r}: n1
}

TEST_CASE("hat functions at p=1")
{
    BSplineBasis b(1, 0, 2);
    auto e = b.evalBasis(0.25, 0);
    REQUIRE(e.values.cols() == 2);
    CHECK(e.values(0, 0) == Catch::Approx(0.5));
    CHECK(e.values(0, 1) == Catch::Approx(0.5));
}

TEST_CASE("partition of unity")
{
    for (auto [p, r, k] : {std::tuple{3, 1, 4}, {4, 2, 8}, {5, 3, 3}, {2, 1, 5}}) {
        BSplineBasis b(p, r, k);
        for (int t = 0; t < 1000; ++t) {
            double x = oracles::uniform();
            auto e = b.evalBasis(x, 0);
            double s = e.values.row(0).sum();
            REQUIRE(std::abs(s - 1.0) <= 1e-13);
            for (int j = 0; j <= p; ++j) REQUIRE(e.values(0, j) >= -1e-14);
        }
    }
}

TEST_CASE("derivatives match central differences")
{
    BSplineBasis b(4, 2, 5);
    for (int j : {0, 2, 5, 8, b.dimension() - 1}) {
        auto f = [&](double x) { return b.evalOne(j, x, 0); };
        for (double x : {0.11, 0.37, 0.52, 0.93}) {
            double d1 = b.evalOne(j, x, 1);
            double d2 = b.evalOne(j, x, 2);
            double fd1 = oracles::fdDeriv(f, x, 1);
            double fd2 = oracles::fdDeriv(f, x, 2);
            CHECK(std::abs(d1 - fd1) <= 1e-6 * std::max(1.0, std::abs(d1)));
            CHECK(std::abs(d2 - fd2) <= 1e-4 * std::max(1.0, std::abs(d2)));
        }
    }
}

TEST_CASE("domain errors")
{
    BSplineBasis b(3, 1, 4);
    CHECK_THROWS_AS(b.evalBasis(-0.01, 0), DomainError);
    CHECK_THROWS_AS(b.evalBasis(1.01, 0), DomainError);
}

TEST_CASE("greville abscissae")
{
    BSplineBasis lin(1, 0, 2);
    auto g = lin.greville();
    REQUIRE(g.size() == 3);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == Catch::Approx(0.5));
    CHECK(g[2] == 1.0);

    BSplineBasis b(3, 1, 4);
    auto gb = b.greville();
    REQUIRE(gb.size() == 10);
    CHECK(gb.front() == 0.0);
    CHECK(gb.back() == 1.0);
    for (size_t i = 1; i < gb.size(); ++i) CHECK(gb[i] > gb[i - 1]);
    for (size_t i = 0; i < gb.size(); ++i)
        CHECK(gb[i] + gb[gb.size() - 1 - i] == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("boundary M functions")
{
    // both theta/mu branches: (p,r) = (3,1) has r = p-2, (5,1) has r < p-2
    for (auto [p, r] : {std::pair{3, 1}, {4, 2}, {5, 1}, {5, 3}, {4, 1}}) {
        const int k = 4;
        SpaceFamilies fam(p, r, k);

        // M_0^{p,r}(0) = 1, M_1^{p,r}(0) = 0, (M_1^{p,r})'(0) = 1
        CHECK(mFunction(fam.full, p, r, 0, 0.0) == Catch::Approx(1.0));
        CHECK(mFunction(fam.full, p, r, 1, 0.0) == Catch::Approx(0.0).margin(1e-15));
        CHECK(mFunction(fam.full, p, r, 1, 0.0, 1) == Catch::Approx(1.0));
        CHECK(mFunction(fam.full, p, r, 0, 0.0, 1) == Catch::Approx(0.0).margin(1e-12));

        // trace family S^{p,r+1}: 2-jet identity at 0
        for (int i = 0; i <= 2; ++i)
            for (int d = 0; d <= 2; ++d) {
                double expected = (i == d) ? 1.0 : 0.0;
                double scale = std::pow(fam.plus.meshSize(), -d);
                CHECK(mFunction(fam.plus, p, r, i, 0.0, d) ==
                      Catch::Approx(expected).margin(1e-11 * scale));
            }

        // transversal family S^{p-1,r}: same 1-jet normalization
        CHECK(mFunction(fam.minus, p, r, 0, 0.0) == Catch::Approx(1.0));
        CHECK(mFunction(fam.minus, p, r, 1, 0.0) == Catch::Approx(0.0).margin(1e-15));
        CHECK(mFunction(fam.minus, p, r, 1, 0.0, 1) == Catch::Approx(1.0));

        // all M vanish away from the boundary (beyond the first few spans)
        if (k >= 4) {
            CHECK(mFunction(fam.full, p, r, 0, 0.9) == 0.0);
            CHECK(mFunction(fam.plus, p, r, 2, 0.9) == 0.0);
        }

        // derivative cross-check by finite differences
        auto f = [&](double x) { return mFunction(fam.plus, p, r, 2, x, 0); };
        CHECK(std::abs(mFunction(fam.plus, p, r, 2, 0.01, 1) - oracles::fdDeriv(f, 0.01, 1)) <= 1e-5);
    }

    SpaceFamilies fam(3, 1, 4);
    CHECK_THROWS_AS(mFunction(fam.full, 3, 1, 2, 0.0), ParameterError);
    CHECK_THROWS_AS(mFunction(fam.plus, 3, 1, 3, 0.0), ParameterError);
}

TEST_CASE("expansion by Greville interpolation is exact for members")
{
    BSplineBasis b(4, 2, 5);
    // a member: random coefficients, re-expanded
    Eigen::VectorXd c = Eigen::VectorXd::Random(b.dimension());
    auto f = [&](double x) {
        auto e = b.evalBasis(x, 0);
        double s = 0;
        for (int j = 0; j <= b.degree(); ++j) s += c(e.first + j) * e.values(0, j);
        return s;
    };
    Eigen::VectorXd c2 = b.expand(f);
    CHECK((c - c2).cwiseAbs().maxCoeff() <= 1e-12);
}
