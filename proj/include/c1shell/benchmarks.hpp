/** @file benchmarks.hpp
    @brief Benchmark geometries and load cases: hyperboloid shells built by
           exact polynomial-spline composition over bilinear multi-patch
           layouts, the 4-patch hyperboloid with a hole, and the L-shaped
           post-buckling problems.
*/
#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "c1shell/gluing.hpp"
#include "c1shell/multipatch.hpp"
#include "c1shell/shell.hpp"

namespace c1shell {

/// Bivariate polynomial surface map with coordinate-wise degree <= 2,
/// F_c(x,y) = sum_{i,j<=2} coef[c](i,j) x^i y^j.
struct QuadraticSurfaceMap {
    std::array<Eigen::Matrix3d, 3> coef{Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero(),
                                        Eigen::Matrix3d::Zero()};

    Eigen::Vector3d eval(double x, double y) const
    {
        Eigen::Vector3d px(1, x, x * x), py(1, y, y * y);
        return Eigen::Vector3d(px.dot(coef[0] * py), px.dot(coef[1] * py), px.dot(coef[2] * py));
    }

    int degree() const
    {
        int d = 0;
        for (const auto& A : coef)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    if (A(i, j) != 0.0) d = std::max({d, i, j});
        return d;
    }

    /// The hyperbolic surface (x, y, x^2 - y^2).
    static QuadraticSurfaceMap hyperbolic()
    {
        QuadraticSurfaceMap f;
        f.coef[0](1, 0) = 1.0;
        f.coef[1](0, 1) = 1.0;
        f.coef[2](2, 0) = 1.0;
        f.coef[2](0, 2) = -1.0;
        return f;
    }

    /// Planar embedding (x, y, 0).
    static QuadraticSurfaceMap planarEmbed()
    {
        QuadraticSurfaceMap f;
        f.coef[0](1, 0) = 1.0;
        f.coef[1](0, 1) = 1.0;
        return f;
    }
};

/// Exact spline representation of F composed with a planar patch. A patch of
/// bidegree p composed with a degree-d map lands in bidegree d*p with the
/// patch's interior regularity, where it is recovered by interpolation.
inline TensorPatch composeSurface(const QuadraticSurfaceMap& F, const TensorPatch& planar)
{
    C1SHELL_REQUIRE(planar.dim() == 2, ParameterError, "composeSurface: planar patch must be 2D");
    const int dF = F.degree();
    C1SHELL_REQUIRE(dF >= 1 && dF <= 2, ParameterError, "composeSurface: unsupported map degree");
    const auto& s = planar.space();
    const int pt = dF * s.degree();
    const int rt = (s.elements() > 1) ? s.regularity() : pt - 1;
    TensorSplineSpace target(pt, rt, s.elements());

    const auto g = target.basis(0).greville();
    const int n = target.dim1();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(target.basis(0).collocation(g));
    std::vector<Eigen::MatrixXd> C(3, Eigen::MatrixXd(n, n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            PatchEval pe = planar.eval(g[i], g[j], 0);
            Eigen::Vector3d v = F.eval(pe.point(0), pe.point(1));
            for (int c = 0; c < 3; ++c) C[c](i, j) = v(c);
        }
    for (int c = 0; c < 3; ++c) {
        C[c] = lu.solve(C[c]);
        C[c] = lu.solve(C[c].transpose()).transpose();
    }
    return TensorPatch(target, std::move(C));
}

struct BenchmarkCase {
    std::string name;
    MultiPatchSurface surface;
    Topology topology;
    ShellMaterial material;
    LoadCase loads;
    BoundaryConditionSet bcs;
    struct Monitor {
        int patch = 0;
        double x1 = 0, x2 = 0;
    } monitor;
    double monitorDeviation = 0.0; ///< distance from the paper's reference point
    double stressToMPa = 1.0;      ///< unit conversion for stress exports
};

inline const std::vector<std::string>& benchmarkNames()
{
    static const std::vector<std::string> names = {
        "hyperboloid_6p_1", "hyperboloid_6p_2", "hyperboloid_hole_4p",
        "lshape_2p",        "lshape_holes_25p", "single_patch_hyperboloid"};
    return names;
}

namespace detail {

inline TensorPatch bilinear2(double x00, double y00, double x10, double y10, double x01, double y01,
                             double x11, double y11)
{
    return makeBilinearPatch(Eigen::Vector2d(x00, y00), Eigen::Vector2d(x10, y10),
                             Eigen::Vector2d(x01, y01), Eigen::Vector2d(x11, y11));
}

/// Planar 6-patch layout of Geometry 1: each half of the square is split into
/// three quads around an interior valence-3 vertex.
inline std::vector<TensorPatch> hyperboloidLayout1()
{
    const double O = 0.3; // interior vertex offset |x|
    std::vector<TensorPatch> q;
    // left half: A(-.5,-.5) B(0,-.5) C(0,.5) D(-.5,.5), O=(-0.3,0),
    // M_DA=(-.5,0), M_AB=(-.25,-.5)
    q.push_back(bilinear2(-0.25, -0.5, 0.0, -0.5, -O, 0.0, 0.0, 0.5));  // Q1
    q.push_back(bilinear2(-O, 0.0, 0.0, 0.5, -0.5, 0.0, -0.5, 0.5));    // Q2
    q.push_back(bilinear2(-0.5, 0.0, -0.5, -0.5, -O, 0.0, -0.25, -0.5)); // Q3
    // right half: mirrored, reoriented counterclockwise
    q.push_back(bilinear2(0.25, -0.5, O, 0.0, 0.0, -0.5, 0.0, 0.5)); // Q1'
    q.push_back(bilinear2(O, 0.0, 0.5, 0.0, 0.0, 0.5, 0.5, 0.5));    // Q2'
    q.push_back(bilinear2(0.5, 0.0, O, 0.0, 0.5, -0.5, 0.25, -0.5)); // Q3'
    return q;
}

/// Planar 6-patch layout of Geometry 2: a center quad ringed by five patches;
/// two patches join C0 at the SW, SE and NE corners of the domain.
inline std::vector<TensorPatch> hyperboloidLayout2()
{
    const double a = 0.2;
    const Eigen::Vector2d k1(-a, -a), k2(a, -a), k3(a, a), k4(-a, a);
    const Eigen::Vector2d SW(-0.5, -0.5), SE(0.5, -0.5), NE(0.5, 0.5), NW(-0.5, 0.5);
    const Eigen::Vector2d Mtop(-0.1, 0.5), Mleft(-0.5, 0.1);
    std::vector<TensorPatch> q;
    q.push_back(makeBilinearPatch(k1, k2, k4, k3));    // center
    q.push_back(makeBilinearPatch(SW, SE, k1, k2));    // bottom
    q.push_back(makeBilinearPatch(SE, NE, k2, k3));    // right
    q.push_back(makeBilinearPatch(NE, Mtop, k3, k4));  // top-right
    q.push_back(makeBilinearPatch(Mtop, NW, k4, Mleft)); // NW corner
    q.push_back(makeBilinearPatch(Mleft, SW, k4, k1)); // left
    return q;
}

inline MultiPatchSurface composeAll(const std::vector<TensorPatch>& planar,
                                    const QuadraticSurfaceMap& F)
{
    std::vector<TensorPatch> out;
    out.reserve(planar.size());
    for (const auto& q : planar) out.push_back(composeSurface(F, q));
    return MultiPatchSurface(std::move(out));
}

/// Boundary edges whose whole control polygon satisfies a predicate.
template <typename Pred>
std::vector<int> boundaryEdgesWhere(const MultiPatchSurface& surf, const Topology& topo, Pred&& pred)
{
    std::vector<int> edges;
    for (int e = topo.numInterfaces(); e < topo.numEdges(); ++e) {
        PatchSide ps = topo.edgeSideA(e);
        const auto& p = surf.patch(ps.patch);
        const int n1 = p.space().dim1(), n2 = p.space().dim2();
        const int len = (ps.side < 2) ? n2 : n1;
        bool all = true;
        for (int t = 0; t < len; ++t) {
            int j1, j2;
            switch (ps.side) {
            case 0: j1 = 0; j2 = t; break;
            case 1: j1 = n1 - 1; j2 = t; break;
            case 2: j1 = t; j2 = 0; break;
            default: j1 = t; j2 = n2 - 1; break;
            }
            all = all && pred(p.controlPoint(j1, j2));
        }
        if (all) edges.push_back(e);
    }
    return edges;
}

/// Quarter-circle arc of radius R around the origin as a quadratic C1 spline
/// (4 elements), interpolated at the Greville abscissae.
inline void quarterArcNet(double R, double angle0, Eigen::MatrixXd& X, Eigen::MatrixXd& Y)
{
    BSplineBasis b(2, 1, 4);
    const auto g = b.greville();
    const int n = b.dimension();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b.collocation(g));
    Eigen::VectorXd fx(n), fy(n);
    for (int i = 0; i < n; ++i) {
        const double th = angle0 + g[i] * M_PI / 2.0;
        fx(i) = R * std::cos(th);
        fy(i) = R * std::sin(th);
    }
    X = lu.solve(fx);
    Y = lu.solve(fy);
}

/// Planar ring between the approximated circle of radius R and the square
/// [-1/2,1/2]^2: four patches, radial direction x1 from the circle outwards.
/// The interior rows carry a tangential swirl, so the raw ring is not AS-G1;
/// it is meant to be passed through asG1Linearize.
inline MultiPatchSurface holeRingPrecursor(double R = 0.15, double swirl = 0.05)
{
    TensorSplineSpace s(2, 1, 4);
    const int n = s.dim1();
    const auto g = s.basis(0).greville();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(s.basis(0).collocation(g));

    std::vector<TensorPatch> patches;
    for (int quad = 0; quad < 4; ++quad) {
        const double a0 = -M_PI / 4.0 + quad * M_PI / 2.0;
        Eigen::MatrixXd cx, cy;
        quarterArcNet(R, a0, cx, cy);

        // outer side: one square edge traversed counterclockwise
        Eigen::Vector2d o0, o1;
        switch (quad) {
        case 0: o0 = {0.5, -0.5}; o1 = {0.5, 0.5}; break;
        case 1: o0 = {0.5, 0.5}; o1 = {-0.5, 0.5}; break;
        case 2: o0 = {-0.5, 0.5}; o1 = {-0.5, -0.5}; break;
        default: o0 = {-0.5, -0.5}; o1 = {0.5, -0.5}; break;
        }
        Eigen::VectorXd sx(n), sy(n);
        for (int i = 0; i < n; ++i) {
            Eigen::Vector2d pt = o0 + g[i] * (o1 - o0);
            sx(i) = pt(0);
            sy(i) = pt(1);
        }
        sx = lu.solve(sx);
        sy = lu.solve(sy);

        // ruled net: radial Greville blend of inner and outer control rows
        std::vector<Eigen::MatrixXd> C(2, Eigen::MatrixXd(n, n));
        for (int j1 = 0; j1 < n; ++j1)
            for (int j2 = 0; j2 < n; ++j2) {
                const double tr = g[j1];
                C[0](j1, j2) = (1 - tr) * cx(j2) + tr * sx(j2);
                C[1](j1, j2) = (1 - tr) * cy(j2) + tr * sy(j2);
            }
        // tangential swirl on interior control points (traces untouched)
        for (int j1 = 1; j1 < n - 1; ++j1)
            for (int j2 = 1; j2 < n - 1; ++j2) {
                Eigen::Vector2d t(C[0](j1, j2 + 1) - C[0](j1, j2 - 1),
                                  C[1](j1, j2 + 1) - C[1](j1, j2 - 1));
                t.normalize();
                const double bump = swirl * g[j1] * (1 - g[j1]) * std::sin(M_PI * g[j2]);
                C[0](j1, j2) += bump * t(0);
                C[1](j1, j2) += bump * t(1);
            }
        patches.emplace_back(s, std::move(C));
    }
    return MultiPatchSurface(std::move(patches));
}

inline std::vector<TensorPatch> lshapeTwoPatchLayout(double L, double W)
{
    std::vector<TensorPatch> q;
    // horizontal leg plus half of the mitered corner
    q.push_back(bilinear2(0, 0, L - W, 0, 0, W, L, W));
    // vertical leg (downwards) plus the other half
    q.push_back(bilinear2(L - W, -(L - W), L, -(L - W), L - W, 0, L, W));
    return q;
}

inline std::vector<TensorPatch> lshapeHolesLayout(double L, double W, double Lh, double Wh)
{
    std::vector<TensorPatch> q;
    auto rect = [&](double x0, double y0, double x1, double y1) {
        q.push_back(bilinear2(x0, y0, x1, y0, x0, y1, x1, y1));
    };
    const double leg = L - W;          // 225
    const double strip = W / 3.0;      // 10
    const double solid = (leg - Lh) / 2.0; // 85
    const std::array<double, 4> xcts = {0.0, solid, solid + Lh, leg};

    // horizontal leg: three columns x three strips, hole in the middle cell
    for (int col = 0; col < 3; ++col)
        for (int row = 0; row < 3; ++row) {
            if (col == 1 && row == 1) continue;
            rect(xcts[col], row * strip, xcts[col + 1], (row + 1) * strip);
        }
    // corner block: 3 x 3 cells of size strip
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            rect(leg + i * strip, j * strip, leg + (i + 1) * strip, (j + 1) * strip);
    // vertical leg (downwards): three rows x three strips, hole in the middle
    for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 3; ++col) {
            if (row == 1 && col == 1) continue;
            rect(leg + col * strip, -xcts[row + 1], leg + (col + 1) * strip, -xcts[row]);
        }
    C1SHELL_REQUIRE(q.size() == 25, Error, "lshapeHolesLayout: patch count");
    return q;
}

inline int patchContaining(const MultiPatchSurface& surf, const Eigen::Vector3d& pt, double& x1,
                           double& x2)
{
    // corner match is enough for the factory monitors
    for (int ip = 0; ip < surf.numPatches(); ++ip)
        for (int corner = 0; corner < 4; ++corner) {
            const double c1 = corner % 2, c2 = corner / 2;
            if ((surf.patch(ip).eval(c1, c2, 0).point - pt).norm() < 1e-9) {
                x1 = c1;
                x2 = c2;
                return ip;
            }
        }
    throw Error("patchContaining: monitor point is not a patch corner");
}

} // namespace detail

inline BenchmarkCase makeCase(const std::string& name)
{
    using detail::boundaryEdgesWhere;
    const QuadraticSurfaceMap hyper = QuadraticSurfaceMap::hyperbolic();

    auto finish = [](BenchmarkCase&& c) {
        C1SHELL_REQUIRE(allASG1(verifyASG1(c.surface, c.topology), 1e-10), Error,
                        "makeCase: factory surface failed AS-G1 verification");
        return std::move(c);
    };

    if (name == "hyperboloid_6p_1" || name == "hyperboloid_6p_2" ||
        name == "single_patch_hyperboloid") {
        std::vector<TensorPatch> layout;
        if (name == "hyperboloid_6p_1")
            layout = detail::hyperboloidLayout1();
        else if (name == "hyperboloid_6p_2")
            layout = detail::hyperboloidLayout2();
        else
            layout.push_back(detail::bilinear2(-0.5, -0.5, 0.5, -0.5, -0.5, 0.5, 0.5, 0.5));

        MultiPatchSurface surface = detail::composeAll(layout, hyper);
        Topology topo = buildTopology(surface);
        const double t = 0.01;
        BenchmarkCase c{name,
                        std::move(surface),
                        std::move(topo),
                        ShellMaterial(2e11, 0.3, t),
                        LoadCase{},
                        BoundaryConditionSet{},
                        {},
                        0.0};
        c.loads.distributed = Eigen::Vector3d(0, 0, -8000.0 * t);
        c.stressToMPa = 1e-6;
        for (int e : boundaryEdgesWhere(c.surface, c.topology, [](const Eigen::VectorXd& p) {
                 return std::abs(p(0) + 0.5) < 1e-12;
             }))
            c.bcs.conditions.push_back({e, BoundaryConditionType::ClampedWeak});
        C1SHELL_REQUIRE(!c.bcs.conditions.empty(), Error, "makeCase: no clamped edges found");
        // reference point A = (L/2, 0, L^2/4)
        if (name == "hyperboloid_6p_1")
            c.monitor = {4, 1.0, 0.0}; // corner of the right-half top patch
        else if (name == "hyperboloid_6p_2")
            c.monitor = {2, 0.5, 0.0}; // midpoint of the east boundary side
        else
            c.monitor = {0, 1.0, 0.5};
        const Eigen::Vector3d refA(0.5, 0.0, 0.25);
        C1SHELL_REQUIRE((c.surface.patch(c.monitor.patch).eval(c.monitor.x1, c.monitor.x2, 0).point -
                         refA).norm() < 1e-10,
                        Error, "makeCase: monitor does not hit the reference point");
        return finish(std::move(c));
    }

    if (name == "hyperboloid_hole_4p") {
        // the radial ruled blend is AS-G1 already (straight radial cuts);
        // the projection is a verified fixed point here
        MultiPatchSurface ring = detail::holeRingPrecursor(0.15, 0.0);
        Topology ringTopo = buildTopology(ring);
        MultiPatchSurface fixedRing = asG1Linearize(ring, ringTopo);
        std::vector<TensorPatch> patches;
        for (int i = 0; i < fixedRing.numPatches(); ++i)
            patches.push_back(composeSurface(hyper, fixedRing.patch(i)));
        MultiPatchSurface surface{std::move(patches)};
        Topology topo = buildTopology(surface);
        const double t = 0.01;
        BenchmarkCase c{name,
                        std::move(surface),
                        std::move(topo),
                        ShellMaterial(2e11, 0.3, t),
                        LoadCase{},
                        BoundaryConditionSet{},
                        {},
                        0.0};
        c.loads.distributed = Eigen::Vector3d(0, 0, -8000.0 * t);
        c.stressToMPa = 1e-6;
        for (int e : boundaryEdgesWhere(c.surface, c.topology, [](const Eigen::VectorXd& p) {
                 return std::abs(p(0) + 0.5) < 1e-12;
             }))
            c.bcs.conditions.push_back({e, BoundaryConditionType::ClampedWeak});
        C1SHELL_REQUIRE(!c.bcs.conditions.empty(), Error, "makeCase: no clamped edges found");
        // the stated reference point (0,0,0) lies inside the hole; monitor the
        // closest inner-boundary vertex instead
        const double R = 0.15;
        Eigen::Vector3d monitorPt(R / std::sqrt(2.0), R / std::sqrt(2.0), 0.0);
        double x1, x2;
        c.monitor.patch = detail::patchContaining(c.surface, monitorPt, x1, x2);
        c.monitor.x1 = x1;
        c.monitor.x2 = x2;
        c.monitorDeviation = R;
        return finish(std::move(c));
    }

    if (name == "lshape_2p" || name == "lshape_holes_25p") {
        const double L = 255.0, W = 30.0, Lh = 55.0, Wh = 10.0;
        (void)Wh; // the hole width equals the strip width W/3
        std::vector<TensorPatch> layout = (name == "lshape_2p")
                                              ? detail::lshapeTwoPatchLayout(L, W)
                                              : detail::lshapeHolesLayout(L, W, Lh, Wh);
        MultiPatchSurface surface = detail::composeAll(layout, QuadraticSurfaceMap::planarEmbed());
        Topology topo = buildTopology(surface);
        BenchmarkCase c{name,
                        std::move(surface),
                        std::move(topo),
                        ShellMaterial(71240.0, 0.31, 0.6),
                        LoadCase{},
                        BoundaryConditionSet{},
                        {},
                        0.0};
        for (int e : boundaryEdgesWhere(c.surface, c.topology, [](const Eigen::VectorXd& p) {
                 return std::abs(p(0)) < 1e-12;
             }))
            c.bcs.conditions.push_back({e, BoundaryConditionType::ClampedWeak});
        C1SHELL_REQUIRE(!c.bcs.conditions.empty(), Error, "makeCase: no clamped edges found");
        // in-plane tip load P with a small out-of-plane perturbation P_s
        const double P = 1.0, Ps = 1e-3 * P;
        Eigen::Vector3d tip(L, -(L - W), 0.0);
        double x1, x2;
        const int tipPatch = detail::patchContaining(c.surface, tip, x1, x2);
        c.loads.pointLoads.push_back({tipPatch, x1, x2, Eigen::Vector3d(-P, 0, 0), true});
        c.loads.pointLoads.push_back({tipPatch, x1, x2, Eigen::Vector3d(0, 0, Ps), true});
        c.monitor.patch = tipPatch;
        c.monitor.x1 = x1;
        c.monitor.x2 = x2;
        return finish(std::move(c));
    }

    throw InputError("makeCase: unknown benchmark '" + name + "'");
}

} // namespace c1shell
