/** @file multipatch.hpp
    @brief Conforming multi-patch surfaces: interface/vertex discovery and the
           local reparameterisations into standard form.

    Standard form for an interface reads p1(0,s) = p2(s,0); for a vertex every
    fan patch places the vertex at its local (0,0) and the whole fan is rotated
    so that the surface normal at the vertex is the x3-axis. Reparameterisation
    acts on coefficient tables through the eight square symmetries, so splines
    are never resampled.
*/
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "c1shell/tensor.hpp"

namespace c1shell {

// ---------------------------------------------------------------------------
// Square symmetries
// ---------------------------------------------------------------------------

/// One of the eight symmetries of the unit square, acting as
/// old = g(new): (u,v) = swap ? (b,a) : (a,b); old = (rev1 ? 1-u : u, rev2 ? 1-v : v).
struct SquareSymmetry {
    bool swap = false;
    bool rev1 = false;
    bool rev2 = false;

    std::array<double, 2> apply(double a, double b) const
    {
        double u = swap ? b : a;
        double v = swap ? a : b;
        if (rev1) u = 1.0 - u;
        if (rev2) v = 1.0 - v;
        return {u, v};
    }

    bool identity() const { return !swap && !rev1 && !rev2; }

    /// Determinant of the linear part (+1 for rotations, -1 for reflections).
    int orientation() const
    {
        int det = swap ? -1 : 1;
        if (rev1) det = -det;
        if (rev2) det = -det;
        return det;
    }
};

/// Coefficient-table action: returns D' with p'(a,b) = p(g(a,b)).
inline Eigen::MatrixXd applySymmetry(const Eigen::MatrixXd& D, const SquareSymmetry& s)
{
    Eigen::MatrixXd M = D;
    if (s.rev1) M = M.colwise().reverse().eval();
    if (s.rev2) M = M.rowwise().reverse().eval();
    if (s.swap) M = M.transpose().eval();
    return M;
}

inline SquareSymmetry composeSymmetry(const SquareSymmetry& first, const SquareSymmetry& second)
{
    // g = first o second (apply `second`'s relabeling to an already
    // `first`-transformed patch). Identified by action on a generic point.
    auto probe = [](const SquareSymmetry& s, double a, double b) { return s.apply(a, b); };
    const double a = 0.3, b = 0.1;
    auto inner = probe(second, a, b);
    auto target = probe(first, inner[0], inner[1]);
    for (int mask = 0; mask < 8; ++mask) {
        SquareSymmetry c{(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
        auto t = probe(c, a, b);
        if (std::abs(t[0] - target[0]) < 1e-12 && std::abs(t[1] - target[1]) < 1e-12) return c;
    }
    throw Error("composeSymmetry: not closed (unreachable)");
}

inline SquareSymmetry inverseSymmetry(const SquareSymmetry& s)
{
    for (int mask = 0; mask < 8; ++mask) {
        SquareSymmetry c{(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
        if (composeSymmetry(s, c).identity()) return c;
    }
    throw Error("inverseSymmetry: not found (unreachable)");
}

/// Orientation-preserving symmetry moving corner (0..3, index c1 + 2*c2) to
/// the local origin.
inline SquareSymmetry cornerRotation(int corner)
{
    switch (corner) {
    case 0: return {false, false, false};
    case 1: return {true, true, false};  // g(a,b) = (1-b, a)
    case 2: return {true, false, true};  // g(a,b) = (b, 1-a)
    case 3: return {false, true, true};  // g(a,b) = (1-a, 1-b)
    default: throw ParameterError("cornerRotation: corner index out of range");
    }
}

// ---------------------------------------------------------------------------
// Multi-patch surface
// ---------------------------------------------------------------------------

class MultiPatchSurface {
public:
    explicit MultiPatchSurface(std::vector<TensorPatch> patches) : patches_(std::move(patches))
    {
        C1SHELL_REQUIRE(!patches_.empty(), ParameterError, "MultiPatchSurface: no patches");
        for (const auto& p : patches_) {
            C1SHELL_REQUIRE(p.space() == patches_.front().space(), ParameterError,
                            "MultiPatchSurface: all patches must share one spline space");
            C1SHELL_REQUIRE(p.dim() == patches_.front().dim(), ParameterError,
                            "MultiPatchSurface: mixed physical dimensions");
        }
    }

    int numPatches() const { return static_cast<int>(patches_.size()); }
    int dim() const { return patches_.front().dim(); }
    const TensorSplineSpace& space() const { return patches_.front().space(); }
    const TensorPatch& patch(int i) const { return patches_[static_cast<size_t>(i)]; }
    TensorPatch& patch(int i) { return patches_[static_cast<size_t>(i)]; }

    double bboxDiagonal() const
    {
        const int d = dim();
        Eigen::VectorXd lo = Eigen::VectorXd::Constant(d, 1e300);
        Eigen::VectorXd hi = Eigen::VectorXd::Constant(d, -1e300);
        for (const auto& p : patches_)
            for (int c = 0; c < d; ++c) {
                lo(c) = std::min(lo(c), p.coefs(c).minCoeff());
                hi(c) = std::max(hi(c), p.coefs(c).maxCoeff());
            }
        return (hi - lo).norm();
    }

    /// Verifies rank-2 Jacobians on a sample grid of every patch.
    void checkRegular(int samples = 5) const
    {
        const double scale = bboxDiagonal();
        for (int ip = 0; ip < numPatches(); ++ip)
            for (int i = 0; i <= samples; ++i)
                for (int j = 0; j <= samples; ++j) {
                    PatchEval e = patches_[ip].eval(double(i) / samples, double(j) / samples, 1);
                    Eigen::MatrixXd J = e.jac;
                    double area2;
                    if (dim() == 3)
                        area2 = Eigen::Vector3d(J.col(0)).cross(Eigen::Vector3d(J.col(1))).norm();
                    else
                        area2 = std::abs(J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0));
                    C1SHELL_REQUIRE(area2 > 1e-10 * scale * scale, SingularGeometryError,
                                    "patch " + std::to_string(ip) + " is singular at a sample point");
                }
    }

private:
    std::vector<TensorPatch> patches_;
};

// ---------------------------------------------------------------------------
// Topology
// ---------------------------------------------------------------------------

/// Sides: 0 = {x1=0}, 1 = {x1=1}, 2 = {x2=0}, 3 = {x2=1}; the side parameter
/// is the free coordinate, ascending.
struct PatchSide {
    int patch = -1;
    int side = -1;
    bool operator==(const PatchSide& o) const { return patch == o.patch && side == o.side; }
    bool operator<(const PatchSide& o) const
    {
        return patch != o.patch ? patch < o.patch : side < o.side;
    }
};

struct Interface {
    PatchSide a, b;
    bool reversed = false; ///< side parameters run in opposite physical directions
};

struct VertexUse {
    int patch = -1;
    int corner = -1; ///< c1 + 2*c2
    bool operator<(const VertexUse& o) const
    {
        return patch != o.patch ? patch < o.patch : corner < o.corner;
    }
    bool operator==(const VertexUse& o) const { return patch == o.patch && corner == o.corner; }
};

struct Vertex {
    std::vector<VertexUse> fan; ///< counterclockwise; open for boundary vertices
    bool interior = false;
    Eigen::VectorXd position;
    int valence() const { return static_cast<int>(fan.size()); }
};

class Topology {
public:
    std::vector<Interface> interfaces;
    std::vector<PatchSide> boundaries;
    std::vector<Vertex> vertices;

    int numEdges() const { return static_cast<int>(interfaces.size() + boundaries.size()); }
    int numInterfaces() const { return static_cast<int>(interfaces.size()); }
    bool isInterface(int edge) const { return edge < numInterfaces(); }

    /// Unified edge view: interfaces first, then boundary edges.
    PatchSide edgeSideA(int edge) const
    {
        return isInterface(edge) ? interfaces[edge].a : boundaries[edge - numInterfaces()];
    }
    std::optional<PatchSide> edgeSideB(int edge) const
    {
        if (isInterface(edge)) return interfaces[edge].b;
        return std::nullopt;
    }

    int edgeOf(const PatchSide& ps) const
    {
        auto it = sideToEdge_.find(ps);
        C1SHELL_REQUIRE(it != sideToEdge_.end(), TopologyError, "edgeOf: unknown patch side");
        return it->second;
    }

    void buildSideIndex()
    {
        sideToEdge_.clear();
        for (int e = 0; e < numInterfaces(); ++e) {
            sideToEdge_[interfaces[e].a] = e;
            sideToEdge_[interfaces[e].b] = e;
        }
        for (size_t b = 0; b < boundaries.size(); ++b)
            sideToEdge_[boundaries[b]] = numInterfaces() + static_cast<int>(b);
    }

private:
    std::map<PatchSide, int> sideToEdge_;
};

namespace detail {

/// Control polygon of a patch side, oriented in the ascending side parameter.
inline Eigen::MatrixXd sidePolygon(const TensorPatch& p, int side)
{
    const int n1 = p.space().dim1(), n2 = p.space().dim2();
    const int len = (side < 2) ? n2 : n1;
    Eigen::MatrixXd poly(len, p.dim());
    for (int t = 0; t < len; ++t) {
        int j1, j2;
        switch (side) {
        case 0: j1 = 0; j2 = t; break;
        case 1: j1 = n1 - 1; j2 = t; break;
        case 2: j1 = t; j2 = 0; break;
        default: j1 = t; j2 = n2 - 1; break;
        }
        for (int c = 0; c < p.dim(); ++c) poly(t, c) = p.coefs(c)(j1, j2);
    }
    return poly;
}

inline double polygonDistance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B)
{
    return (A - B).rowwise().norm().maxCoeff();
}

} // namespace detail

/// Discovers interfaces, boundary edges and vertex fans of a conforming
/// multi-patch surface. Matching compares side control polygons within
/// tol (default 1e-9 times the bounding-box diagonal).
inline Topology buildTopology(const MultiPatchSurface& surface, double tol = -1.0)
{
    if (tol <= 0.0) tol = 1e-9 * surface.bboxDiagonal();
    surface.checkRegular();

    Topology topo;
    const int np = surface.numPatches();

    // side matching
    std::vector<std::vector<Eigen::MatrixXd>> polys(np);
    for (int ip = 0; ip < np; ++ip) {
        polys[ip].reserve(4);
        for (int s = 0; s < 4; ++s) polys[ip].push_back(detail::sidePolygon(surface.patch(ip), s));
    }
    std::vector<std::array<int, 4>> matched(np, {-1, -1, -1, -1});
    for (int ip = 0; ip < np; ++ip)
        for (int si = 0; si < 4; ++si) {
            if (matched[ip][si] >= 0) continue;
            for (int jp = ip; jp < np; ++jp)
                for (int sj = (jp == ip ? si + 1 : 0); sj < 4; ++sj) {
                    if (matched[jp][sj] >= 0) continue;
                    const auto& A = polys[ip][si];
                    const auto& B = polys[jp][sj];
                    bool fwd = detail::polygonDistance(A, B) <= tol;
                    bool rev = detail::polygonDistance(A, B.colwise().reverse().eval()) <= tol;
                    if (!fwd && !rev) continue;
                    C1SHELL_REQUIRE(matched[ip][si] < 0 && matched[jp][sj] < 0, TopologyError,
                                    "buildTopology: a side matches more than one neighbor");
                    Interface f;
                    f.a = {ip, si};
                    f.b = {jp, sj};
                    f.reversed = !fwd;
                    matched[ip][si] = static_cast<int>(topo.interfaces.size());
                    matched[jp][sj] = static_cast<int>(topo.interfaces.size());
                    topo.interfaces.push_back(f);
                }
        }

    // boundary sides; also screen for T-junctions: an unmatched side whose
    // midpoint lies on another patch's unmatched side curve is non-conforming.
    std::vector<PatchSide> unmatched;
    for (int ip = 0; ip < np; ++ip)
        for (int s = 0; s < 4; ++s)
            if (matched[ip][s] < 0) unmatched.push_back({ip, s});
    auto sideMidpoint = [&](const PatchSide& ps) {
        double x1 = 0, x2 = 0;
        switch (ps.side) {
        case 0: x1 = 0; x2 = 0.5; break;
        case 1: x1 = 1; x2 = 0.5; break;
        case 2: x1 = 0.5; x2 = 0; break;
        default: x1 = 0.5; x2 = 1; break;
        }
        return surface.patch(ps.patch).eval(x1, x2, 0).point;
    };
    const double sampleTol = std::max(20.0 * tol, 1e-4 * surface.bboxDiagonal());
    for (const auto& u : unmatched) {
        Eigen::VectorXd mid = sideMidpoint(u);
        for (const auto& v : unmatched) {
            if (u == v) continue;
            for (int t = 0; t <= 32; ++t) {
                double s = double(t) / 32.0;
                double x1 = 0, x2 = 0;
                switch (v.side) {
                case 0: x1 = 0; x2 = s; break;
                case 1: x1 = 1; x2 = s; break;
                case 2: x1 = s; x2 = 0; break;
                default: x1 = s; x2 = 1; break;
                }
                Eigen::VectorXd q = surface.patch(v.patch).eval(x1, x2, 0).point;
                C1SHELL_REQUIRE((q - mid).norm() > sampleTol, TopologyError,
                                "buildTopology: non-conforming interface or T-junction between patch " +
                                    std::to_string(u.patch) + " and patch " + std::to_string(v.patch) +
                                    " (unsupported)");
            }
        }
    }
    topo.boundaries = unmatched;
    std::sort(topo.boundaries.begin(), topo.boundaries.end());
    std::sort(topo.interfaces.begin(), topo.interfaces.end(),
              [](const Interface& x, const Interface& y) { return x.a < y.a; });
    topo.buildSideIndex();

    // vertices: cluster patch corners by position
    struct Corner {
        VertexUse use;
        Eigen::VectorXd pos;
    };
    std::vector<Corner> corners;
    for (int ip = 0; ip < np; ++ip) {
        const auto& p = surface.patch(ip);
        const int n1 = p.space().dim1(), n2 = p.space().dim2();
        for (int corner = 0; corner < 4; ++corner) {
            const int j1 = (corner % 2) ? n1 - 1 : 0;
            const int j2 = (corner / 2) ? n2 - 1 : 0;
            corners.push_back({{ip, corner}, p.controlPoint(j1, j2)});
        }
    }
    std::vector<int> group(corners.size(), -1);
    int ngroups = 0;
    for (size_t i = 0; i < corners.size(); ++i) {
        if (group[i] >= 0) continue;
        group[i] = ngroups;
        for (size_t j = i + 1; j < corners.size(); ++j)
            if (group[j] < 0 && (corners[i].pos - corners[j].pos).norm() <= tol) group[j] = ngroups;
        ++ngroups;
    }

    // local sides seen from the corner's standard frame
    static const int stdWSide[4] = {0, 2, 3, 1};
    static const int stdSSide[4] = {2, 1, 0, 3};

    for (int g = 0; g < ngroups; ++g) {
        std::vector<VertexUse> uses;
        Eigen::VectorXd pos;
        for (size_t i = 0; i < corners.size(); ++i)
            if (group[static_cast<int>(i)] == g) {
                uses.push_back(corners[i].use);
                pos = corners[i].pos;
            }
        std::sort(uses.begin(), uses.end());

        auto isBoundarySide = [&](int patch, int side) { return matched[patch][side] < 0; };
        auto nextUse = [&](const VertexUse& u) -> std::optional<VertexUse> {
            const int sw = stdWSide[u.corner];
            if (isBoundarySide(u.patch, sw)) return std::nullopt;
            const Interface& f = topo.interfaces[matched[u.patch][sw]];
            const PatchSide other = (f.a.patch == u.patch && f.a.side == sw) ? f.b : f.a;
            for (const auto& cand : uses)
                if (cand.patch == other.patch) {
                    // corner must be an endpoint of the matched side
                    const int c1 = cand.corner % 2, c2 = cand.corner / 2;
                    bool onSide = (other.side == 0 && c1 == 0) || (other.side == 1 && c1 == 1) ||
                                  (other.side == 2 && c2 == 0) || (other.side == 3 && c2 == 1);
                    if (onSide) return cand;
                }
            throw TopologyError("buildTopology: inconsistent vertex fan");
        };

        Vertex v;
        v.position = pos;
        // boundary start: the use whose standard-S side is a boundary edge
        std::optional<VertexUse> start;
        for (const auto& u : uses)
            if (isBoundarySide(u.patch, stdSSide[u.corner])) {
                C1SHELL_REQUIRE(!start, TopologyError,
                                "buildTopology: vertex fan has more than two boundary edges");
                start = u;
            }
        v.interior = !start.has_value();
        VertexUse cur = start ? *start : uses.front();
        for (size_t step = 0; step < uses.size(); ++step) {
            v.fan.push_back(cur);
            auto nxt = nextUse(cur);
            if (!nxt) {
                C1SHELL_REQUIRE(!v.interior, TopologyError, "buildTopology: broken interior fan");
                break;
            }
            if (step + 1 == uses.size()) {
                C1SHELL_REQUIRE(v.interior && *nxt == v.fan.front(), TopologyError,
                                "buildTopology: vertex fan does not close");
                break;
            }
            cur = *nxt;
        }
        C1SHELL_REQUIRE(v.fan.size() == uses.size(), TopologyError,
                        "buildTopology: vertex fan does not cover all incident patches");
        topo.vertices.push_back(std::move(v));
    }
    std::sort(topo.vertices.begin(), topo.vertices.end(),
              [](const Vertex& x, const Vertex& y) { return x.fan.front() < y.fan.front(); });
    return topo;
}

// ---------------------------------------------------------------------------
// Standard form
// ---------------------------------------------------------------------------

/// Reparameterisation of one or two patches so the edge reads p1(0,s) = p2(s,0)
/// (boundary edges: the single patch carries the curve on its {x1=0} side).
struct EdgeFrame {
    int edge = -1;
    int patch1 = -1, patch2 = -1; ///< patch2 < 0 for boundary edges
    SquareSymmetry sym1, sym2;
};

/// Vertex fan in standard form: every fan patch maps the vertex to (0,0); the
/// shared rotation takes the surface normal at the vertex to the x3-axis.
struct VertexFrame {
    int vertex = -1;
    bool interior = false;
    std::vector<int> patches;         ///< fan patches, counterclockwise
    std::vector<SquareSymmetry> syms; ///< per fan patch
    std::vector<int> fanEdges;        ///< nu+1 edges; interior fans repeat the first
    Eigen::Matrix3d rotation;
};

namespace detail {

/// Direction (true = ascending) in which a corner rotation traverses the
/// original side when walking the standard-W / standard-S side.
inline bool stdWAscending(int side) { return side == 0 || side == 3; }
inline bool stdSAscending(int side) { return side == 2 || side == 1; }

/// Corner whose rotation maps the standard-W side onto `side`.
inline int cornerForStdW(int side)
{
    static const int c[4] = {0, 3, 1, 2}; // W->c0, E->c3, S->c1, N->c2
    return c[side];
}
inline int cornerForStdS(int side)
{
    static const int c[4] = {2, 1, 0, 3}; // W->c2, E->c1, S->c0, N->c3
    return c[side];
}

} // namespace detail

inline EdgeFrame standardFormEdge(const Topology& topo, int edge)
{
    EdgeFrame fr;
    fr.edge = edge;
    if (!topo.isInterface(edge)) {
        PatchSide ps = topo.edgeSideA(edge);
        fr.patch1 = ps.patch;
        fr.sym1 = cornerRotation(detail::cornerForStdW(ps.side));
        return fr;
    }
    const Interface& f = topo.interfaces[edge];
    // role assignment: patch1 carries the curve on {x1=0}, patch2 on {x2=0};
    // the two traversal directions must agree physically.
    auto tryRoles = [&](const PatchSide& s1, const PatchSide& s2) -> bool {
        const bool d1 = detail::stdWAscending(s1.side);
        const bool d2 = detail::stdSAscending(s2.side);
        if ((d1 == d2) != !f.reversed) return false;
        fr.patch1 = s1.patch;
        fr.patch2 = s2.patch;
        fr.sym1 = cornerRotation(detail::cornerForStdW(s1.side));
        fr.sym2 = cornerRotation(detail::cornerForStdS(s2.side));
        return true;
    };
    if (tryRoles(f.a, f.b)) return fr;
    if (tryRoles(f.b, f.a)) return fr;
    throw TopologyError("standardFormEdge: patches are not consistently oriented across edge " +
                        std::to_string(edge));
}

/// Patch with a square symmetry applied to its coefficient tables and an
/// optional 3x3 rotation applied to its (3D) control points.
inline TensorPatch transformedPatch(const TensorPatch& p, const SquareSymmetry& sym,
                                    const Eigen::Matrix3d* rot = nullptr)
{
    std::vector<Eigen::MatrixXd> C(p.dim());
    for (int c = 0; c < p.dim(); ++c) C[c] = applySymmetry(p.coefs(c), sym);
    if (rot) {
        C1SHELL_REQUIRE(p.dim() == 3, ParameterError, "transformedPatch: rotation needs 3D patches");
        const Eigen::Matrix3d& R = *rot;
        std::vector<Eigen::MatrixXd> Crot(3);
        for (int i = 0; i < 3; ++i)
            Crot[i] = R(i, 0) * C[0] + R(i, 1) * C[1] + R(i, 2) * C[2];
        C = std::move(Crot);
    }
    return TensorPatch(p.space(), std::move(C));
}

inline VertexFrame standardFormVertex(const MultiPatchSurface& surface, const Topology& topo,
                                      int vertex, double tol = 1e-8)
{
    const Vertex& v = topo.vertices[vertex];
    VertexFrame fr;
    fr.vertex = vertex;
    fr.interior = v.interior;

    static const int stdWSide[4] = {0, 2, 3, 1};
    static const int stdSSide[4] = {2, 1, 0, 3};

    for (const auto& use : v.fan) {
        fr.patches.push_back(use.patch);
        fr.syms.push_back(cornerRotation(use.corner));
    }
    // fan edges e_0 .. e_nu: e_{m-1} is patch m's standard-S side, e_m its standard-W side
    fr.fanEdges.push_back(topo.edgeOf({v.fan.front().patch, stdSSide[v.fan.front().corner]}));
    for (const auto& use : v.fan)
        fr.fanEdges.push_back(topo.edgeOf({use.patch, stdWSide[use.corner]}));
    if (v.interior)
        C1SHELL_REQUIRE(fr.fanEdges.front() == fr.fanEdges.back(), TopologyError,
                        "standardFormVertex: interior fan does not close");

    // shared rotation from the (consistent) normals at the vertex
    fr.rotation.setIdentity();
    if (surface.dim() == 3) {
        Eigen::Vector3d nbar = Eigen::Vector3d::Zero();
        Eigen::Vector3d first = Eigen::Vector3d::Zero();
        for (size_t l = 0; l < fr.patches.size(); ++l) {
            TensorPatch q = transformedPatch(surface.patch(fr.patches[l]), fr.syms[l]);
            PatchEval e = q.eval(0.0, 0.0, 1);
            Eigen::Vector3d n = Eigen::Vector3d(e.jac.col(0)).cross(Eigen::Vector3d(e.jac.col(1)));
            C1SHELL_REQUIRE(n.norm() > 0, SingularGeometryError, "standardFormVertex: singular corner");
            n.normalize();
            if (l == 0) first = n;
            C1SHELL_REQUIRE((n - first).norm() <= 1e3 * tol, TopologyError,
                            "standardFormVertex: fan normals disagree at vertex " + std::to_string(vertex) +
                                " (not G1 or inconsistently oriented)");
            nbar += n;
        }
        nbar.normalize();
        const Eigen::Vector3d e3(0, 0, 1);
        if ((nbar + e3).norm() < 1e-8) {
            fr.rotation = Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitX()).toRotationMatrix();
        } else {
            fr.rotation = Eigen::Quaterniond::FromTwoVectors(nbar, e3).toRotationMatrix();
        }
    }
    return fr;
}

} // namespace c1shell
