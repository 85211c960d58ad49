/** @file c1space.hpp
    @brief The C1-smooth isogeometric space over an AS-G1 multi-patch surface.

    The space is spanned by patch, edge and vertex functions. Patch functions
    are interior tensor B-splines. Edge functions prescribe the interface
    trace (in S^{p,r+1}) or the alpha/beta-weighted transversal derivative
    (in S^{p-1,r}); vertex functions prescribe the 2-jet at a vertex in the
    rotated tangent frame. Every function is stored through per-patch spline
    coefficient tables collected in a sparse extraction operator.

    The discretisation space (p, r, k) is independent of the geometry space
    and requires p >= 3, 1 <= r <= p-2 and k(p-r-1) >= 4-r.
*/
#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "c1shell/gluing.hpp"
#include "c1shell/multipatch.hpp"

namespace c1shell {

struct C1Function {
    enum class Kind { Patch, Edge, Vertex };
    Kind kind;
    int entity; ///< patch, edge or vertex index
    int j1, j2;
    std::vector<int> supportPatches;
};

class C1Space {
public:
    C1Space(const MultiPatchSurface& surface, const Topology& topo, int p, int r, int k,
            double asg1Tol = 1e-10)
        : surface_(surface), topo_(topo), fam_(p, r, k)
    {
        C1SHELL_REQUIRE(surface.dim() == 3, ParameterError, "C1Space: surface must be 3D");
        C1SHELL_REQUIRE(k * (p - r - 1) >= 4 - r, ParameterError,
                        "C1Space: mesh bound k >= (4-r)/(p-r-1) violated");

        gluing_.reserve(topo.numEdges());
        frames_.reserve(topo.numEdges());
        for (int e = 0; e < topo.numEdges(); ++e) {
            frames_.push_back(standardFormEdge(topo, e));
            gluing_.push_back(computeGluing(surface, topo, e, asg1Tol)); // throws if not AS-G1
        }

        buildFunctions();
        buildTables();
    }

    const MultiPatchSurface& surface() const { return surface_; }
    const Topology& topology() const { return topo_; }
    const SpaceFamilies& families() const { return fam_; }
    const EdgeGluingData& gluingData(int edge) const { return gluing_[edge]; }
    const EdgeFrame& edgeFrame(int edge) const { return frames_[edge]; }

    int dim() const { return static_cast<int>(functions_.size()); }
    const std::vector<C1Function>& functions() const { return functions_; }

    /// Sparse map from global coefficients to the tensor coefficient table of
    /// one patch (rows: global index, cols: j1 * n + j2).
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& extraction(int patch) const
    {
        return extraction_[patch];
    }

    /// Column-major view of the same operator (fast lookup of the functions
    /// supported on a tensor B-spline).
    const Eigen::SparseMatrix<double>& extractionByTensor(int patch) const
    {
        return extractionCol_[patch];
    }

    /// dim A = sum over patches (n-4)^2 + edges (n0-6)+(n1-4) + 6 #vertices.
    int expectedDimension() const
    {
        const int n = fam_.full.dimension(), n0 = fam_.plus.dimension(), n1 = fam_.minus.dimension();
        return surface_.numPatches() * (n - 4) * (n - 4) +
               topo_.numEdges() * ((n0 - 6) + (n1 - 4)) + 6 * static_cast<int>(topo_.vertices.size());
    }

    /// Extraction applied to a coefficient vector: per-patch spline table.
    Eigen::MatrixXd patchTable(int patch, const Eigen::VectorXd& coeffs) const
    {
        C1SHELL_REQUIRE(coeffs.size() == dim(), ParameterError, "patchTable: coefficient length mismatch");
        const int n = fam_.full.dimension();
        Eigen::VectorXd flat = extraction_[patch].transpose() * coeffs;
        return Eigen::Map<Eigen::MatrixXd>(flat.data(), n, n).transpose();
    }

    /// Dense coefficient table of a single basis function on one patch.
    Eigen::MatrixXd functionTable(int func, int patch) const
    {
        const int n = fam_.full.dimension();
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(extraction_[patch], func);
             it; ++it) {
            const int col = static_cast<int>(it.col());
            D(col / n, col % n) = it.value();
        }
        return D;
    }

    /// Scalar value/derivatives of basis function `func` seen from `patch`.
    double evalFunction(int func, int patch, double x1, double x2, int d1 = 0, int d2 = 0) const
    {
        ScalarSplineFunction f{TensorSplineSpace(fam_.p, fam_.r, fam_.k), functionTable(func, patch)};
        return f.eval(x1, x2, d1, d2);
    }

private:
    // ----- enumeration -------------------------------------------------
    void buildFunctions()
    {
        const int n = fam_.full.dimension(), n0 = fam_.plus.dimension(), n1 = fam_.minus.dimension();
        for (int ip = 0; ip < surface_.numPatches(); ++ip)
            for (int j1 = 2; j1 <= n - 3; ++j1)
                for (int j2 = 2; j2 <= n - 3; ++j2)
                    functions_.push_back({C1Function::Kind::Patch, ip, j1, j2, {ip}});

        for (int e = 0; e < topo_.numEdges(); ++e) {
            std::vector<int> support{frames_[e].patch1};
            if (frames_[e].patch2 >= 0) support.push_back(frames_[e].patch2);
            for (int j2 = 0; j2 <= 1; ++j2) {
                const int nj = (j2 == 0) ? n0 : n1;
                for (int j1 = 3 - j2; j1 <= nj - 4 + j2; ++j1)
                    functions_.push_back({C1Function::Kind::Edge, e, j1, j2, support});
            }
        }

        static const std::array<std::array<int, 2>, 6> jlist = {
            {{0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1}, {2, 0}}};
        for (size_t v = 0; v < topo_.vertices.size(); ++v) {
            std::vector<int> support;
            for (const auto& use : topo_.vertices[v].fan) support.push_back(use.patch);
            for (const auto& j : jlist)
                functions_.push_back(
                    {C1Function::Kind::Vertex, static_cast<int>(v), j[0], j[1], support});
        }
    }

    // ----- univariate building blocks ----------------------------------
    Eigen::VectorXd expandM(const BSplineBasis& family, int index, int deriv = 0) const
    {
        return fam_.full.expand(
            [&](double x) { return mFunction(family, fam_.p, fam_.r, index, x, deriv); });
    }

    // ----- edge function tables ----------------------------------------
    struct OuterTerm {
        Eigen::VectorXd v1; ///< coefficients along x1
        Eigen::VectorXd v2; ///< coefficients along x2
        double weight;
    };

    static Eigen::MatrixXd assembleOuter(const std::vector<OuterTerm>& terms, int n)
    {
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
        for (const auto& t : terms) D += t.weight * (t.v1 * t.v2.transpose());
        return D;
    }

    void addTable(int func, int patch, const Eigen::MatrixXd& table,
                  std::vector<std::vector<Eigen::Triplet<double>>>& trips)
    {
        const int n = fam_.full.dimension();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (table(i, j) != 0.0)
                    trips[patch].emplace_back(func, i * n + j, table(i, j));
    }

    void buildTables()
    {
        const int n = fam_.full.dimension();
        const int np = surface_.numPatches();
        std::vector<std::vector<Eigen::Triplet<double>>> trips(np);

        // shared expansions
        const Eigen::VectorXd cM0 = expandM(fam_.full, 0);
        const Eigen::VectorXd cM1 = expandM(fam_.full, 1);

        for (int f = 0; f < dim(); ++f) {
            const C1Function& fn = functions_[f];
            switch (fn.kind) {
            case C1Function::Kind::Patch: {
                trips[fn.entity].emplace_back(f, fn.j1 * n + fn.j2, 1.0);
                break;
            }
            case C1Function::Kind::Edge: {
                buildEdgeFunction(f, fn, cM0, cM1, trips);
                break;
            }
            case C1Function::Kind::Vertex:
                break; // built per vertex below
            }
        }

        for (size_t v = 0; v < topo_.vertices.size(); ++v) buildVertexFunctions(static_cast<int>(v), trips);

        extraction_.resize(np);
        extractionCol_.resize(np);
        for (int ip = 0; ip < np; ++ip) {
            extraction_[ip].resize(dim(), n * n);
            extraction_[ip].setFromTriplets(trips[ip].begin(), trips[ip].end());
            extraction_[ip].makeCompressed();
            extractionCol_[ip] = extraction_[ip];
            extractionCol_[ip].makeCompressed();
        }
    }

    void buildEdgeFunction(int f, const C1Function& fn, const Eigen::VectorXd& cM0,
                           const Eigen::VectorXd& cM1,
                           std::vector<std::vector<Eigen::Triplet<double>>>& trips)
    {
        const EdgeFrame& fr = frames_[fn.entity];
        const EdgeGluingData& g = gluing_[fn.entity];
        const int n = fam_.full.dimension();
        const int j1 = fn.j1;

        if (fn.j2 == 0) {
            const Eigen::VectorXd cN = fam_.full.expand([&](double x) { return fam_.plus.evalOne(j1, x); });
            const Eigen::VectorXd cBdN1 =
                fam_.full.expand([&](double x) { return g.beta1(x) * fam_.plus.evalOne(j1, x, 1); });
            Eigen::MatrixXd D1 = assembleOuter({{cM0, cN, 1.0}, {cM1, cBdN1, -1.0}}, n);
            addTable(f, fr.patch1, applySymmetry(D1, inverseSymmetry(fr.sym1)), trips);
            if (fr.patch2 >= 0) {
                const Eigen::VectorXd cBdN2 =
                    fam_.full.expand([&](double x) { return g.beta2(x) * fam_.plus.evalOne(j1, x, 1); });
                Eigen::MatrixXd D2 = assembleOuter({{cN, cM0, 1.0}, {cBdN2, cM1, -1.0}}, n);
                addTable(f, fr.patch2, applySymmetry(D2, inverseSymmetry(fr.sym2)), trips);
            }
        } else {
            const Eigen::VectorXd cAN1 =
                fam_.full.expand([&](double x) { return g.alpha1(x) * fam_.minus.evalOne(j1, x); });
            Eigen::MatrixXd D1 = assembleOuter({{cM1, cAN1, 1.0}}, n);
            addTable(f, fr.patch1, applySymmetry(D1, inverseSymmetry(fr.sym1)), trips);
            if (fr.patch2 >= 0) {
                const Eigen::VectorXd cAN2 =
                    fam_.full.expand([&](double x) { return g.alpha2(x) * fam_.minus.evalOne(j1, x); });
                Eigen::MatrixXd D2 = assembleOuter({{cAN2, cM1, -1.0}}, n);
                addTable(f, fr.patch2, applySymmetry(D2, inverseSymmetry(fr.sym2)), trips);
            }
        }
    }

    // ----- vertex machinery ---------------------------------------------
    struct FanEdgeData {
        EdgeGluingData glue;  ///< oriented away from the vertex; role 1 = W-side fan patch
        Eigen::Vector2d t0, dt0; ///< interface tangent and its derivative at 0
        Eigen::Vector2d d0, dd0; ///< transversal vector function and derivative at 0
    };

    /// Gluing data of a fan edge reparameterised to start at the vertex.
    EdgeGluingData orientedGluing(int edge, const Eigen::VectorXd& vertexPos, int expectI1) const
    {
        const EdgeGluingData& g = gluing_[edge];
        if (g.boundary) return g;
        const EdgeFrame& fr = frames_[edge];
        TensorPatch q1 = transformedPatch(surface_.patch(fr.patch1), fr.sym1);
        const double tol = 1e-8 * std::max(1.0, surface_.bboxDiagonal());
        const bool startsHere = (q1.eval(0, 0, 0).point - vertexPos).norm() <= tol;
        if (startsHere) {
            C1SHELL_REQUIRE(fr.patch1 == expectI1, TopologyError, "orientedGluing: role mismatch");
            return g;
        }
        C1SHELL_REQUIRE(fr.patch2 == expectI1, TopologyError, "orientedGluing: role mismatch");
        return g.reversed();
    }

    void buildVertexFunctions(int v, std::vector<std::vector<Eigen::Triplet<double>>>& trips)
    {
        const Vertex& vert = topo_.vertices[v];
        VertexFrame fr = standardFormVertex(surface_, topo_, v);
        const int nu = static_cast<int>(fr.patches.size());
        const int n = fam_.full.dimension();
        const double h = fam_.full.meshSize();
        const int p = fam_.p;

        // rotated standard-form patches and their 2D jets at the corner
        std::vector<PatchEval> jet(nu);
        double gradSum = 0.0;
        for (int l = 0; l < nu; ++l) {
            TensorPatch q = transformedPatch(surface_.patch(fr.patches[l]), fr.syms[l], &fr.rotation);
            jet[l] = q.eval(0.0, 0.0, 2);
            gradSum += jet[l].jac.topRows(2).norm(); // Frobenius of the projected Jacobian
        }
        const double sigma = 1.0 / (h / (p * nu) * gradSum);

        // per fan edge: oriented gluing and the t/d vectors at the vertex
        const double consistencyTol = 1e-6 * std::max(1.0, surface_.bboxDiagonal());
        std::vector<FanEdgeData> fan(nu + 1);
        for (int m = 0; m <= nu; ++m) {
            const int edge = fr.fanEdges[m];
            FanEdgeData& fe = fan[m];
            const bool interiorWrap = vert.interior && m == 0;
            if (interiorWrap) continue; // filled from m = nu afterwards

            const int i1patch = (m >= 1) ? fr.patches[m - 1] : -1; // W-side patch P_m
            fe.glue = (m >= 1) ? orientedGluing(edge, vert.position, i1patch)
                               : orientedGluing(edge, vert.position, fr.patches.front());
            if (!topo_.isInterface(edge)) fe.glue = EdgeGluingData{}; // boundary: alpha=1, beta=0

            // t and d from the i1 side (patch P_m, W side) when present
            if (m >= 1) {
                const PatchEval& J = jet[m - 1];
                const Eigen::Vector2d A(J.jac(0, 0), J.jac(1, 0));       // d1 q(0,0)
                const Eigen::Vector2d B(J.jac(0, 1), J.jac(1, 1));       // d2 q(0,0)
                const Eigen::Vector2d A2(J.hess(0, 2), J.hess(1, 2));    // d12 q
                const Eigen::Vector2d B2(J.hess(0, 1), J.hess(1, 1));    // d22 q
                fe.t0 = B;
                fe.dt0 = B2;
                const double a0 = fe.glue.alpha1(0.0), da = fe.glue.alpha1.deriv(0.0);
                const double b0 = fe.glue.beta1(0.0), db = fe.glue.beta1.deriv(0.0);
                fe.d0 = (A + b0 * B) / a0;
                fe.dd0 = ((A2 + db * B + b0 * B2) - da * fe.d0) / a0;
            }
            // cross-check (or sole definition) from the i2 side (patch P_{m+1}, S side)
            if (m <= nu - 1) {
                const PatchEval& J = jet[m];
                const Eigen::Vector2d A(J.jac(0, 0), J.jac(1, 0));    // d1 q(ξ,0) at 0
                const Eigen::Vector2d B(J.jac(0, 1), J.jac(1, 1));    // d2 q
                const Eigen::Vector2d A2(J.hess(0, 0), J.hess(1, 0)); // d11 q
                const Eigen::Vector2d B2(J.hess(0, 2), J.hess(1, 2)); // d12 q
                const double a0 = fe.glue.alpha2(0.0), da = fe.glue.alpha2.deriv(0.0);
                const double b0 = fe.glue.beta2(0.0), db = fe.glue.beta2.deriv(0.0);
                Eigen::Vector2d t0 = A, dt0 = A2;
                Eigen::Vector2d d0 = -(B + b0 * A) / a0;
                Eigen::Vector2d dd0 = (-(B2 + db * A + b0 * A2) - da * d0) / a0;
                if (m >= 1) {
                    C1SHELL_REQUIRE((fe.t0 - t0).norm() <= consistencyTol &&
                                        (fe.d0 - d0).norm() <= consistencyTol,
                                    TopologyError, "vertex fan data inconsistent (not G1 at vertex)");
                } else {
                    fe.t0 = t0;
                    fe.dt0 = dt0;
                    fe.d0 = d0;
                    fe.dd0 = dd0;
                }
            }
        }
        if (vert.interior) fan[0] = fan[nu];

        // expansions reused for all six functions at this vertex
        std::array<Eigen::VectorXd, 3> cMplus;
        for (int w = 0; w < 3; ++w) cMplus[w] = expandM(fam_.plus, w);
        const Eigen::VectorXd cM0 = expandM(fam_.full, 0);
        const Eigen::VectorXd cM1 = expandM(fam_.full, 1);

        struct EdgeExpansions {
            std::array<Eigen::VectorXd, 3> betaDMplus; ///< beta (M_w^{plus})'
            std::array<Eigen::VectorXd, 2> alphaMminus; ///< alpha M_w^{minus}
        };
        auto expandFor = [&](const Poly& alpha, const Poly& beta) {
            EdgeExpansions ee;
            for (int w = 0; w < 3; ++w)
                ee.betaDMplus[w] = fam_.full.expand(
                    [&](double x) { return beta(x) * mFunction(fam_.plus, p, fam_.r, w, x, 1); });
            for (int w = 0; w < 2; ++w)
                ee.alphaMminus[w] = fam_.full.expand(
                    [&](double x) { return alpha(x) * mFunction(fam_.minus, p, fam_.r, w, x); });
            return ee;
        };
        // role-1 expansions for edge e_m (used by patch P_m on its W side) and
        // role-2 expansions (used by patch P_{m+1} on its S side)
        std::vector<EdgeExpansions> eeW(nu + 1), eeS(nu + 1);
        for (int m = 0; m <= nu; ++m) {
            eeW[m] = expandFor(fan[m].glue.alpha1, fan[m].glue.beta1);
            eeS[m] = expandFor(fan[m].glue.alpha2, fan[m].glue.beta2);
        }

        static const std::array<std::array<int, 2>, 6> jlist = {
            {{0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1}, {2, 0}}};
        // function index base: vertex blocks come after patches and edges
        int base = 0;
        for (int fidx = 0; fidx < dim(); ++fidx)
            if (functions_[fidx].kind == C1Function::Kind::Vertex && functions_[fidx].entity == v) {
                base = fidx;
                break;
            }

        for (int jj = 0; jj < 6; ++jj) {
            const int j1 = jlist[jj][0], j2 = jlist[jj][1];
            const Eigen::RowVector2d bj((j1 == 1 && j2 == 0) ? 1.0 : 0.0,
                                        (j1 == 0 && j2 == 1) ? 1.0 : 0.0);
            Eigen::Matrix2d Hj;
            Hj << ((j1 == 2 && j2 == 0) ? 1.0 : 0.0), ((j1 == 1 && j2 == 1) ? 1.0 : 0.0),
                ((j1 == 1 && j2 == 1) ? 1.0 : 0.0), ((j1 == 0 && j2 == 2) ? 1.0 : 0.0);
            const double delta00 = (j1 == 0 && j2 == 0) ? 1.0 : 0.0;

            auto dotb = [&](const Eigen::Vector2d& v) { return bj(0) * v(0) + bj(1) * v(1); };
            auto quad = [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                return a.dot(Hj * b);
            };
            auto edgeCoefs = [&](const FanEdgeData& fe, std::array<double, 3>& d0w,
                                 std::array<double, 2>& d1w) {
                d0w[0] = delta00;
                d0w[1] = dotb(fe.t0);
                d0w[2] = quad(fe.t0, fe.t0) + dotb(fe.dt0);
                d1w[0] = dotb(fe.d0);
                d1w[1] = quad(fe.t0, fe.d0) + dotb(fe.dd0);
            };

            const double scale = std::pow(sigma, j1 + j2);
            for (int l = 1; l <= nu; ++l) {
                const FanEdgeData& feW = fan[l];     // edge e_l on the W side
                const FanEdgeData& feS = fan[l - 1]; // edge e_{l-1} on the S side
                std::array<double, 3> d0W, d0S;
                std::array<double, 2> d1W, d1S;
                edgeCoefs(feW, d0W, d1W);
                edgeCoefs(feS, d0S, d1S);

                std::vector<OuterTerm> terms;
                // g for the W-side edge: trace data along x2, localized in x1
                for (int w = 0; w < 3; ++w) {
                    if (d0W[w] != 0.0) {
                        terms.push_back({cM0, cMplus[w], d0W[w]});
                        terms.push_back({cM1, eeW[l].betaDMplus[w], -d0W[w]});
                    }
                }
                for (int w = 0; w < 2; ++w)
                    if (d1W[w] != 0.0) terms.push_back({cM1, eeW[l].alphaMminus[w], d1W[w]});

                // g for the S-side edge: mirrored roles, transversal sign flips
                for (int w = 0; w < 3; ++w) {
                    if (d0S[w] != 0.0) {
                        terms.push_back({cMplus[w], cM0, d0S[w]});
                        terms.push_back({eeS[l - 1].betaDMplus[w], cM1, -d0S[w]});
                    }
                }
                for (int w = 0; w < 2; ++w)
                    if (d1S[w] != 0.0) terms.push_back({eeS[l - 1].alphaMminus[w], cM1, -d1S[w]});

                // bilinear correction g^{(l)}
                const Eigen::Vector2d tS = fan[l - 1].t0, tW = fan[l].t0;
                const Eigen::Vector2d mixed(jet[l - 1].hess(0, 2), jet[l - 1].hess(1, 2));
                const double db00 = delta00;
                const double db10 = dotb(tS);
                const double db01 = dotb(tW);
                const double db11 = quad(tS, tW) + dotb(mixed);
                if (db00 != 0.0) terms.push_back({cM0, cM0, -db00});
                if (db10 != 0.0) terms.push_back({cM1, cM0, -db10});
                if (db01 != 0.0) terms.push_back({cM0, cM1, -db01});
                if (db11 != 0.0) terms.push_back({cM1, cM1, -db11});

                Eigen::MatrixXd D = scale * assembleOuter(terms, n);
                addTable(base + jj, fr.patches[l - 1],
                         applySymmetry(D, inverseSymmetry(fr.syms[l - 1])), trips);
            }
        }
    }

    const MultiPatchSurface& surface_;
    const Topology& topo_;
    SpaceFamilies fam_;
    std::vector<EdgeGluingData> gluing_;
    std::vector<EdgeFrame> frames_;
    std::vector<C1Function> functions_;
    std::vector<Eigen::SparseMatrix<double, Eigen::RowMajor>> extraction_;
    std::vector<Eigen::SparseMatrix<double>> extractionCol_;
};

/// Values of all basis functions supported at one point of a patch, as a
/// sparse list of (global index, value) pairs.
inline void evalActiveFunctions(const C1Space& space, int patch, double x1, double x2,
                                std::vector<std::pair<int, double>>& out)
{
    const auto& fam = space.families();
    const int n = fam.full.dimension();
    auto e1 = fam.full.evalBasis(x1, 0);
    auto e2 = fam.full.evalBasis(x2, 0);
    const auto& E = space.extractionByTensor(patch);
    std::map<int, double> acc;
    for (int a = 0; a <= fam.p; ++a)
        for (int b = 0; b <= fam.p; ++b) {
            const double w = e1.values(0, a) * e2.values(0, b);
            if (w == 0.0) continue;
            const int col = (e1.first + a) * n + e2.first + b;
            for (Eigen::SparseMatrix<double>::InnerIterator it(E, col); it; ++it)
                acc[static_cast<int>(it.row())] += it.value() * w;
        }
    out.assign(acc.begin(), acc.end());
}

/// Values and first parametric derivatives of every basis function whose
/// support covers the point (support-based, so functions that merely vanish
/// at the point are still listed).
struct ActiveFunctionEval {
    int func;
    double value, d1, d2;
};

inline void evalActiveFunctionGradients(const C1Space& space, int patch, double x1, double x2,
                                        std::vector<ActiveFunctionEval>& out)
{
    const auto& fam = space.families();
    const int n = fam.full.dimension();
    auto e1 = fam.full.evalBasis(x1, 1);
    auto e2 = fam.full.evalBasis(x2, 1);
    const auto& E = space.extractionByTensor(patch);
    std::map<int, std::array<double, 3>> acc;
    for (int a = 0; a <= fam.p; ++a)
        for (int b = 0; b <= fam.p; ++b) {
            const double w = e1.values(0, a) * e2.values(0, b);
            const double w1 = e1.values(1, a) * e2.values(0, b);
            const double w2 = e1.values(0, a) * e2.values(1, b);
            const int col = (e1.first + a) * n + e2.first + b;
            for (Eigen::SparseMatrix<double>::InnerIterator it(E, col); it; ++it) {
                auto& r = acc[static_cast<int>(it.row())];
                r[0] += it.value() * w;
                r[1] += it.value() * w1;
                r[2] += it.value() * w2;
            }
        }
    out.clear();
    for (const auto& [func, r] : acc) out.push_back({func, r[0], r[1], r[2]});
}

/// Least-squares fit of a function given per patch in local coordinates;
/// returns coefficients and the maximal pointwise residual at the quadrature
/// points used for the fit.
template <typename F>
std::pair<Eigen::VectorXd, double> fitFunction(const C1Space& space, F&& f, int quadPerSpan = 0)
{
    const auto& fam = space.families();
    if (quadPerSpan <= 0) quadPerSpan = fam.p + 1;
    QuadratureRule q = gaussLegendre(quadPerSpan);
    const int dim = space.dim();
    Eigen::SparseMatrix<double> G(dim, dim);
    std::vector<Eigen::Triplet<double>> gtrips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);

    struct Sample {
        int patch;
        double x1, x2, w, value;
    };
    std::vector<Sample> samples;
    const double h = fam.full.meshSize();
    for (int ip = 0; ip < space.surface().numPatches(); ++ip)
        for (int e1 = 0; e1 < fam.k; ++e1)
            for (int e2 = 0; e2 < fam.k; ++e2)
                for (int i = 0; i < quadPerSpan; ++i)
                    for (int j = 0; j < quadPerSpan; ++j) {
                        double x1 = (e1 + q.points[i]) * h;
                        double x2 = (e2 + q.points[j]) * h;
                        samples.push_back({ip, x1, x2, q.weights[i] * q.weights[j] * h * h,
                                           f(ip, x1, x2)});
                    }

    std::vector<std::pair<int, double>> phi;
    for (const auto& s : samples) {
        evalActiveFunctions(space, s.patch, s.x1, s.x2, phi);
        for (const auto& [i, vi] : phi) {
            rhs(i) += s.w * s.value * vi;
            for (const auto& [j, vj] : phi) gtrips.emplace_back(i, j, s.w * vi * vj);
        }
    }
    G.setFromTriplets(gtrips.begin(), gtrips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(G);
    C1SHELL_REQUIRE(solver.info() == Eigen::Success, SolverError, "fitFunction: Gram matrix not SPD");
    Eigen::VectorXd c = solver.solve(rhs);

    double worst = 0.0;
    for (const auto& s : samples) {
        evalActiveFunctions(space, s.patch, s.x1, s.x2, phi);
        double val = 0.0;
        for (const auto& [i, vi] : phi) val += c(i) * vi;
        worst = std::max(worst, std::abs(val - s.value));
    }
    return {c, worst};
}

} // namespace c1shell
