/** @file gluing.hpp
    @brief Gluing data (alpha, beta) at multi-patch edges, the AS-G1 test and
           the interface-row linearization that enforces it.

    With an interface in standard form p1(0,s) = p2(s,0), the G1 condition is

        alpha1(s) d2 p2(s,0) + alpha2(s) d1 p1(0,s) + beta(s) d2 p1(0,s) = 0.

    The surface is analysis-suitable G1 at the edge when alpha1, alpha2 can be
    chosen linear with beta = alpha1 beta2 + alpha2 beta1 for linear beta1,
    beta2. Representatives are fixed by minimizing ||alpha1-1||^2+||alpha2-1||^2
    and ||beta1||^2+||beta2||^2 in L2([0,1]).
*/
#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "c1shell/multipatch.hpp"
#include "c1shell/poly.hpp"

namespace c1shell {

struct EdgeGluingData {
    Poly alpha1{Poly::constant(1.0)}; ///< alpha^(i,i1), linear
    Poly alpha2{Poly::constant(1.0)}; ///< alpha^(i,i2), linear
    Poly beta1{Poly::constant(0.0)};  ///< beta^(i,i1), linear
    Poly beta2{Poly::constant(0.0)};  ///< beta^(i,i2), linear
    bool boundary = false;

    /// Composed beta^(i) = alpha1 beta2 + alpha2 beta1 (quadratic).
    Poly beta() const { return alpha1 * beta2 + alpha2 * beta1; }

    /// Same edge traversed from the other endpoint: roles swap and the
    /// argument reverses; beta terms flip sign.
    EdgeGluingData reversed() const
    {
        EdgeGluingData r;
        r.alpha1 = alpha2.reversedArg();
        r.alpha2 = alpha1.reversedArg();
        r.beta1 = beta2.reversedArg() * -1.0;
        r.beta2 = beta1.reversedArg() * -1.0;
        r.boundary = boundary;
        return r;
    }
};

struct ASG1EdgeReport {
    int edge = -1;
    double maxResidual = 0.0; ///< relative to the largest tangent magnitude
    bool alphaPositive = true;
    bool linearFound = true;
    bool pass(double tol) const { return linearFound && alphaPositive && maxResidual <= tol; }
};

namespace detail {

/// Interface data sampled along the shared curve in standard form.
struct InterfaceTrace {
    TensorPatch q1, q2; ///< standard-form patches
    int geoDegree;

    InterfaceTrace(const MultiPatchSurface& surface, const EdgeFrame& fr)
        : q1(transformedPatch(surface.patch(fr.patch1), fr.sym1)),
          q2(transformedPatch(surface.patch(fr.patch2), fr.sym2)),
          geoDegree(surface.space().degree())
    {
    }

    Eigen::VectorXd d1p1(double s) const { return q1.eval(0.0, s, 1).jac.col(0); }
    Eigen::VectorXd tangent(double s) const { return q1.eval(0.0, s, 1).jac.col(1); }
    Eigen::VectorXd d2p2(double s) const { return q2.eval(s, 0.0, 1).jac.col(1); }
};

/// Collocation points that determine a spline identity of degree p+2 with the
/// geometry's interior smoothness.
inline std::vector<double> gluingCollocation(const TensorSplineSpace& space)
{
    const int p = space.degree() + 2;
    const int r = std::min(space.regularity(), p - 1);
    return BSplineBasis(p, std::max(r, -1), space.elements()).greville();
}

struct GluingSolveResult {
    EdgeGluingData data;
    double residual = 0.0; ///< relative ASCOND residual of the returned data
    bool nullspaceFound = false;
    bool alphaPositive = true;
};

inline double ascondResidual(const InterfaceTrace& tr, const EdgeGluingData& g, int samples = 100)
{
    double worst = 0.0;
    const Poly beta = g.beta();
    for (int i = 0; i <= samples; ++i) {
        const double s = static_cast<double>(i) / samples;
        Eigen::VectorXd rvec = g.alpha1(s) * tr.d2p2(s) + g.alpha2(s) * tr.d1p1(s) + beta(s) * tr.tangent(s);
        const double scale = std::max({tr.d2p2(s).norm(), tr.d1p1(s).norm(), tr.tangent(s).norm()});
        worst = std::max(worst, rvec.norm() / scale);
    }
    return worst;
}

/// Best (alpha1, alpha2, beta) of the capped degrees, normalized by the L2
/// minimization; exact null vectors exist iff the edge is AS-G1.
inline GluingSolveResult solveGluing(const MultiPatchSurface& surface, const EdgeFrame& fr,
                                     double nullTol = 1e-10)
{
    InterfaceTrace tr(surface, fr);
    const std::vector<double> pts = gluingCollocation(surface.space());
    const int d = surface.dim();
    const int rows = static_cast<int>(pts.size()) * d;

    // scale-invariant collocation of the G1 identity; unknowns
    // (a10,a11 | a20,a21 | b0,b1,b2)
    Eigen::MatrixXd A(rows, 7);
    for (size_t i = 0; i < pts.size(); ++i) {
        const double s = pts[i];
        Eigen::VectorXd v2 = tr.d2p2(s), v1 = tr.d1p1(s), t = tr.tangent(s);
        const double scale = std::max({v2.norm(), v1.norm(), t.norm()});
        C1SHELL_REQUIRE(scale > 0, SingularGeometryError, "solveGluing: vanishing tangents");
        for (int c = 0; c < d; ++c) {
            const int row = static_cast<int>(i) * d + c;
            A(row, 0) = v2(c) / scale;
            A(row, 1) = v2(c) * s / scale;
            A(row, 2) = v1(c) / scale;
            A(row, 3) = v1(c) * s / scale;
            A(row, 4) = t(c) / scale;
            A(row, 5) = t(c) * s / scale;
            A(row, 6) = t(c) * s * s / scale;
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    int nullDim = 0;
    for (int i = 0; i < 7; ++i)
        if (sv(i) <= nullTol * sv(0)) ++nullDim;

    GluingSolveResult out;
    out.nullspaceFound = nullDim > 0;
    const int m = std::max(nullDim, 1); // fall back to the best near-null vector
    Eigen::MatrixXd V = svd.matrixV().rightCols(m);

    // minimize ||alpha1 - 1||^2 + ||alpha2 - 1||^2 over the null space
    auto alphaPoly = [&](const Eigen::VectorXd& z, int which) {
        return which == 0 ? Poly::linear(z(0), z(1)) : Poly::linear(z(2), z(3));
    };
    Eigen::MatrixXd G(m, m);
    Eigen::VectorXd rhs(m);
    const Poly one = Poly::constant(1.0);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j)
            G(i, j) = Poly::innerL2(alphaPoly(V.col(i), 0), alphaPoly(V.col(j), 0)) +
                      Poly::innerL2(alphaPoly(V.col(i), 1), alphaPoly(V.col(j), 1));
        rhs(i) = Poly::innerL2(alphaPoly(V.col(i), 0), one) + Poly::innerL2(alphaPoly(V.col(i), 1), one);
    }
    Eigen::VectorXd y = G.ldlt().solve(rhs);
    Eigen::VectorXd z = V * y;

    Poly alpha1 = Poly::linear(z(0), z(1));
    Poly alpha2 = Poly::linear(z(2), z(3));
    Poly beta = Poly({z(4), z(5), z(6)});

    // relatively-prime normalization: divide out a common linear root
    const double a1scale = alpha1.maxAbsOn01(), a2scale = alpha2.maxAbsOn01();
    if (std::abs(alpha1.coeff(1)) > 1e-10 * a1scale && std::abs(alpha2.coeff(1)) > 1e-10 * a2scale) {
        const double r1 = -alpha1.coeff(0) / alpha1.coeff(1);
        const double r2 = -alpha2.coeff(0) / alpha2.coeff(1);
        if (std::abs(r1 - r2) < 1e-10) {
            // beta vanishes at the shared root as well; deflate all three
            alpha1 = Poly::constant(alpha1.coeff(1));
            alpha2 = Poly::constant(alpha2.coeff(1));
            const double b2 = beta.coeff(2);
            beta = Poly::linear(beta.coeff(1) + r1 * b2, b2);
            const double num = Poly::innerL2(alpha1, one) + Poly::innerL2(alpha2, one);
            const double den = Poly::innerL2(alpha1, alpha1) + Poly::innerL2(alpha2, alpha2);
            const double c = num / den;
            alpha1 = alpha1 * c;
            alpha2 = alpha2 * c;
            beta = beta * c;
        }
    }

    // positivity of alpha1 * alpha2 on [0,1]
    double minprod = 1e300, maxmag = 0.0;
    for (int i = 0; i <= 16; ++i) {
        const double s = i / 16.0;
        minprod = std::min(minprod, alpha1(s) * alpha2(s));
        maxmag = std::max(maxmag, std::abs(alpha1(s) * alpha2(s)));
    }
    out.alphaPositive = (minprod > 1e-12 * std::max(maxmag, 1e-300));

    // beta split: alpha1 beta2 + alpha2 beta1 = beta, minimal L2 norm
    Eigen::MatrixXd Ac = Eigen::MatrixXd::Zero(3, 4); // unknowns (b1_0, b1_1, b2_0, b2_1)
    for (int k = 0; k <= 2; ++k) {
        // coefficient k of alpha2 * beta1
        if (k <= 1) Ac(k, 0) += alpha2.coeff(k);
        if (k >= 1) Ac(k, 1) += alpha2.coeff(k - 1);
        if (k <= 1) Ac(k, 2) += alpha1.coeff(k);
        if (k >= 1) Ac(k, 3) += alpha1.coeff(k - 1);
    }
    Eigen::Vector3d bc(beta.coeff(0), beta.coeff(1), beta.coeff(2));
    Eigen::VectorXd xp = Ac.completeOrthogonalDecomposition().solve(bc);
    Poly beta1 = Poly::linear(xp(0), xp(1));
    Poly beta2 = Poly::linear(xp(2), xp(3));
    // one-parameter family (beta1 + c alpha1, beta2 - c alpha2)
    const double den = Poly::innerL2(alpha1, alpha1) + Poly::innerL2(alpha2, alpha2);
    const double c = -(Poly::innerL2(beta1, alpha1) - Poly::innerL2(beta2, alpha2)) / den;
    beta1 = beta1 + alpha1 * c;
    beta2 = beta2 - alpha2 * c;

    out.data.alpha1 = alpha1;
    out.data.alpha2 = alpha2;
    out.data.beta1 = beta1;
    out.data.beta2 = beta2;
    out.data.boundary = false;
    out.residual = ascondResidual(tr, out.data);
    return out;
}

} // namespace detail

/// Gluing data of one edge (standard form of that edge). Boundary edges carry
/// alpha = 1, beta = 0 by definition.
inline EdgeGluingData computeGluing(const MultiPatchSurface& surface, const Topology& topo, int edge,
                                    double tol = 1e-10)
{
    if (!topo.isInterface(edge)) {
        EdgeGluingData g;
        g.boundary = true;
        return g;
    }
    EdgeFrame fr = standardFormEdge(topo, edge);
    detail::GluingSolveResult res = detail::solveGluing(surface, fr);
    C1SHELL_REQUIRE(res.nullspaceFound && res.residual <= tol, NotASG1Error,
                    "computeGluing: no linear gluing data at edge " + std::to_string(edge) +
                        " (residual " + std::to_string(res.residual) + ")");
    C1SHELL_REQUIRE(res.alphaPositive, DegenerateGluingError,
                    "computeGluing: alpha changes sign on edge " + std::to_string(edge));
    return res.data;
}

/// Diagnostic AS-G1 report over every edge of the surface.
inline std::vector<ASG1EdgeReport> verifyASG1(const MultiPatchSurface& surface, const Topology& topo,
                                              double /*tol*/ = 1e-10)
{
    std::vector<ASG1EdgeReport> reports;
    for (int e = 0; e < topo.numEdges(); ++e) {
        ASG1EdgeReport rep;
        rep.edge = e;
        if (!topo.isInterface(e)) {
            reports.push_back(rep);
            continue;
        }
        EdgeFrame fr = standardFormEdge(topo, e);
        detail::GluingSolveResult res = detail::solveGluing(surface, fr);
        rep.maxResidual = res.residual;
        rep.alphaPositive = res.alphaPositive;
        rep.linearFound = res.nullspaceFound;
        reports.push_back(rep);
    }
    return reports;
}

inline bool allASG1(const std::vector<ASG1EdgeReport>& reports, double tol = 1e-10)
{
    for (const auto& r : reports)
        if (!r.pass(tol)) return false;
    return true;
}

namespace detail {

/// Index map of applySymmetry: newIndex(i,j) lists the original (I,J).
inline void symmetryIndexMap(int n1, int n2, const SquareSymmetry& s, int i, int j, int& I, int& J)
{
    // invert the table action step by step (swap applied last in applySymmetry)
    int a = i, b = j;
    if (s.swap) std::swap(a, b);
    I = s.rev1 ? n1 - 1 - a : a;
    J = s.rev2 ? n2 - 1 - b : b;
}

} // namespace detail

/// Projects a G1 multi-patch surface onto exact AS-G1 form: per interface the
/// trace is kept and only the first interior control-point line on each side
/// may move; the total squared displacement is minimized subject to the G1
/// identity with the fitted linear gluing data.
inline MultiPatchSurface asG1Linearize(const MultiPatchSurface& surface, const Topology& topo)
{
    const int d = surface.dim();
    const int n1 = surface.space().dim1(), n2 = surface.space().dim2();

    // G1 precondition: pointwise rank deficiency of [d2p2 | d1p1 | t]
    // (planar surfaces are trivially G1)
    for (int e = 0; d == 3 && e < topo.numInterfaces(); ++e) {
        EdgeFrame fr = standardFormEdge(topo, e);
        detail::InterfaceTrace tr(surface, fr);
        for (int i = 0; i <= 20; ++i) {
            const double s = i / 20.0;
            Eigen::MatrixXd M(d, 3);
            M.col(0) = tr.d2p2(s);
            M.col(1) = tr.d1p1(s);
            M.col(2) = tr.tangent(s);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
            const auto& sv = svd.singularValues();
            C1SHELL_REQUIRE(sv(2) <= 1e-7 * sv(0), NotASG1Error,
                            "asG1Linearize: surface is not G1 along edge " + std::to_string(e));
        }
    }

    // variable set: first interior lines next to interfaces, minus any control
    // point sitting on an interface trace (traces must stay bit-identical)
    std::map<std::pair<int, std::pair<int, int>>, int> varIndex; // (patch,(j1,j2)) -> var
    std::vector<std::pair<int, std::pair<int, int>>> vars;
    auto isTraceEntry = [&](int patch, int j1, int j2) {
        for (int e = 0; e < topo.numInterfaces(); ++e) {
            const Interface& f = topo.interfaces[e];
            for (const PatchSide* ps : {&f.a, &f.b}) {
                if (ps->patch != patch) continue;
                switch (ps->side) {
                case 0:
                    if (j1 == 0) return true;
                    break;
                case 1:
                    if (j1 == n1 - 1) return true;
                    break;
                case 2:
                    if (j2 == 0) return true;
                    break;
                default:
                    if (j2 == n2 - 1) return true;
                    break;
                }
            }
        }
        return false;
    };
    auto lineEntry = [&](int side, int t, int& j1, int& j2) {
        switch (side) {
        case 0: j1 = 1; j2 = t; break;
        case 1: j1 = n1 - 2; j2 = t; break;
        case 2: j1 = t; j2 = 1; break;
        default: j1 = t; j2 = n2 - 2; break;
        }
    };
    for (int e = 0; e < topo.numInterfaces(); ++e) {
        const Interface& f = topo.interfaces[e];
        for (const PatchSide* ps : {&f.a, &f.b}) {
            const int len = (ps->side < 2) ? n2 : n1;
            for (int t = 0; t < len; ++t) {
                int j1, j2;
                lineEntry(ps->side, t, j1, j2);
                if (isTraceEntry(ps->patch, j1, j2)) continue;
                auto key = std::make_pair(ps->patch, std::make_pair(j1, j2));
                if (!varIndex.count(key)) {
                    varIndex[key] = static_cast<int>(vars.size());
                    vars.push_back(key);
                }
            }
        }
    }
    const int nvar = static_cast<int>(vars.size()) * d;

    // constraints: per interface, collocated G1 identity with fitted gluing
    struct Entry {
        int row, col;
        double value;
        Entry(int r, int c, double v) : row(r), col(c), value(v) {}
    };
    std::vector<Entry> trips;
    std::vector<double> rhs;
    const std::vector<double> pts = detail::gluingCollocation(surface.space());
    const double scale = surface.bboxDiagonal();

    for (int e = 0; e < topo.numInterfaces(); ++e) {
        EdgeFrame fr = standardFormEdge(topo, e);
        detail::GluingSolveResult fit = detail::solveGluing(surface, fr);
        C1SHELL_REQUIRE(fit.alphaPositive, DegenerateGluingError,
                        "asG1Linearize: degenerate target gluing at edge " + std::to_string(e));
        const Poly alpha1 = fit.data.alpha1, alpha2 = fit.data.alpha2, beta = fit.data.beta();

        // std-frame derivative structure: d1 q1(0,s) uses rows 0 and 1 of the
        // std table; rows map back to original entries through the symmetry.
        const BSplineBasis& bb = surface.space().basis(0);
        auto e0 = bb.evalBasis(0.0, 1);
        const double w0 = e0.values(1, 0), w1 = e0.values(1, 1); // N'_0(0), N'_1(0)

        // the identity is linear in the control points, so for displacement
        // unknowns y (in units of the bbox diagonal) the constraint reads
        // sum coef * y = -ascond(current)/scale
        detail::InterfaceTrace tr(surface, fr);
        for (double s : pts) {
            auto eTrace = bb.evalBasis(s, 0);
            Eigen::VectorXd current = alpha1(s) * tr.d2p2(s) + alpha2(s) * tr.d1p1(s) + beta(s) * tr.tangent(s);
            for (int c = 0; c < d; ++c) {
                const int row = static_cast<int>(rhs.size());
                rhs.push_back(-current(c) / scale);
                for (int loc = 0; loc <= bb.degree(); ++loc) {
                    const int jt = eTrace.first + loc;
                    const double Nt = eTrace.values(0, loc);
                    if (Nt == 0.0) continue;
                    // patch1: row 1 of the std table scales with N'_1(0)
                    {
                        int I, J;
                        detail::symmetryIndexMap(n1, n2, fr.sym1, 1, jt, I, J);
                        auto it = varIndex.find(std::make_pair(fr.patch1, std::make_pair(I, J)));
                        if (it != varIndex.end())
                            trips.emplace_back(row, it->second * d + c, alpha2(s) * w1 * Nt);
                    }
                    // patch2: column 1 of the std table
                    {
                        int I, J;
                        detail::symmetryIndexMap(n1, n2, fr.sym2, jt, 1, I, J);
                        auto it = varIndex.find(std::make_pair(fr.patch2, std::make_pair(I, J)));
                        if (it != varIndex.end())
                            trips.emplace_back(row, it->second * d + c, alpha1(s) * w1 * Nt);
                    }
                }
            }
        }
        (void)w0;
    }

    const int nrows = static_cast<int>(rhs.size());
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nrows, nvar);
    for (const auto& t : trips) C(t.row, t.col) += t.value;
    Eigen::VectorXd b = Eigen::Map<Eigen::VectorXd>(rhs.data(), nrows);

    // minimal-displacement correction: delta = C^+ (b - C*0); variables hold
    // displacements from the current control points
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(C);
    Eigen::VectorXd delta = cod.solve(b);
    C1SHELL_REQUIRE((C * delta - b).norm() <= 1e-9 * (1.0 + b.norm()), SolverError,
                    "asG1Linearize: interface constraints are rank-deficient/inconsistent");

    std::vector<TensorPatch> out;
    out.reserve(surface.numPatches());
    for (int ip = 0; ip < surface.numPatches(); ++ip) out.push_back(surface.patch(ip));
    for (size_t v = 0; v < vars.size(); ++v) {
        const int patch = vars[v].first;
        const int j1 = vars[v].second.first, j2 = vars[v].second.second;
        for (int c = 0; c < d; ++c)
            out[patch].coefs(c)(j1, j2) += delta(static_cast<int>(v) * d + c) * scale;
    }
    MultiPatchSurface result(std::move(out));
    C1SHELL_REQUIRE(allASG1(verifyASG1(result, topo), 1e-10), SolverError,
                    "asG1Linearize: projection failed to reach AS-G1 form");
    return result;
}

} // namespace c1shell
