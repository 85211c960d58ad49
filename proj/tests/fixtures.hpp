// Shared small multi-patch fixtures for the unit tests.
#pragma once

#include <c1shell/multipatch.hpp>

namespace fixtures {

inline Eigen::Vector3d p3(double x, double y, double z = 0.0) { return Eigen::Vector3d(x, y, z); }

/// Two axis-aligned unit squares [-1,0]x[0,1] and [0,1]x[0,1] in the z=0 plane.
inline c1shell::MultiPatchSurface twoSquares()
{
    using c1shell::makeBilinearPatch;
    std::vector<c1shell::TensorPatch> patches;
    patches.push_back(makeBilinearPatch(p3(-1, 0), p3(0, 0), p3(-1, 1), p3(0, 1)));
    patches.push_back(makeBilinearPatch(p3(0, 0), p3(1, 0), p3(0, 1), p3(1, 1)));
    return c1shell::MultiPatchSurface(std::move(patches));
}

/// Four unit squares around the origin (flat valence-4 cross).
inline c1shell::MultiPatchSurface flatCross()
{
    using c1shell::makeBilinearPatch;
    std::vector<c1shell::TensorPatch> patches;
    patches.push_back(makeBilinearPatch(p3(0, 0), p3(1, 0), p3(0, 1), p3(1, 1)));    // NE
    patches.push_back(makeBilinearPatch(p3(-1, 0), p3(0, 0), p3(-1, 1), p3(0, 1)));  // NW
    patches.push_back(makeBilinearPatch(p3(-1, -1), p3(0, -1), p3(-1, 0), p3(0, 0))); // SW
    patches.push_back(makeBilinearPatch(p3(0, -1), p3(1, -1), p3(0, 0), p3(1, 0)));  // SE
    return c1shell::MultiPatchSurface(std::move(patches));
}

/// Generic planar two-patch geometry with a slanted interface.
inline c1shell::MultiPatchSurface slantedPair()
{
    using c1shell::makeBilinearPatch;
    std::vector<c1shell::TensorPatch> patches;
    // shared side from (0,0) to (0.2,1)
    patches.push_back(makeBilinearPatch(p3(-1, 0), p3(0, 0), p3(-1.2, 1), p3(0.2, 1)));
    patches.push_back(makeBilinearPatch(p3(0, 0), p3(1.1, -0.1), p3(0.2, 1), p3(1.3, 1.2)));
    return c1shell::MultiPatchSurface(std::move(patches));
}

inline c1shell::MultiPatchSurface singleSquare()
{
    std::vector<c1shell::TensorPatch> patches;
    patches.push_back(c1shell::makeBilinearPatch(p3(0, 0), p3(1, 0), p3(0, 1), p3(1, 1)));
    return c1shell::MultiPatchSurface(std::move(patches));
}

/// Exact biquadratic patch (x, y, x^2 - y^2) over a planar bilinear quad.
inline c1shell::TensorPatch composedHyperbolicPatch(const Eigen::Vector2d& c00,
                                                    const Eigen::Vector2d& c10,
                                                    const Eigen::Vector2d& c01,
                                                    const Eigen::Vector2d& c11)
{
    using namespace c1shell;
    TensorSplineSpace s(2, 1, 1);
    const auto g = s.basis(0).greville();
    const int n = s.dim1();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(s.basis(0).collocation(g));
    auto plane = [&](double a, double b) {
        return Eigen::Vector2d((1 - a) * (1 - b) * c00 + a * (1 - b) * c10 + (1 - a) * b * c01 +
                               a * b * c11);
    };
    std::vector<Eigen::MatrixXd> C(3, Eigen::MatrixXd(n, n));
    for (int c = 0; c < 3; ++c) {
        Eigen::MatrixXd F(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Eigen::Vector2d xy = plane(g[i], g[j]);
                F(i, j) = (c == 0) ? xy(0) : (c == 1) ? xy(1) : xy(0) * xy(0) - xy(1) * xy(1);
            }
        C[c] = lu.solve(F);
        C[c] = lu.solve(C[c].transpose()).transpose();
    }
    return TensorPatch(s, C);
}

/// Two-patch hyperbolic surface over [-1,1] x [-1/2,1/2], AS-G1 by
/// construction (composition of a quadratic polynomial with bilinear maps).
inline c1shell::MultiPatchSurface hyperbolicTwoPatch()
{
    using Eigen::Vector2d;
    std::vector<c1shell::TensorPatch> patches;
    patches.push_back(composedHyperbolicPatch(Vector2d(-1, -0.5), Vector2d(0, -0.5),
                                              Vector2d(-1, 0.5), Vector2d(0, 0.5)));
    patches.push_back(composedHyperbolicPatch(Vector2d(0, -0.5), Vector2d(1, -0.5),
                                              Vector2d(0, 0.5), Vector2d(1, 0.5)));
    return c1shell::MultiPatchSurface(std::move(patches));
}

/// Single centered hyperbolic patch over [-1/2,1/2]^2.
inline c1shell::MultiPatchSurface centeredHyperbolicPatch()
{
    std::vector<c1shell::TensorPatch> patches;
    patches.push_back(composedHyperbolicPatch(Eigen::Vector2d(-0.5, -0.5), Eigen::Vector2d(0.5, -0.5),
                                              Eigen::Vector2d(-0.5, 0.5), Eigen::Vector2d(0.5, 0.5)));
    return c1shell::MultiPatchSurface(std::move(patches));
}

} // namespace fixtures
