/** @file shell.hpp
    @brief Geometrically nonlinear Kirchhoff-Love shell operators over a
           C1-smooth multi-patch space.

    Saint-Venant Kirchhoff material with the usual thickness split
    n = t C : eps (membrane) and m = t^3/12 C : kappa (bending), where C is
    built from the contravariant undeformed metric. Clamped boundaries are
    enforced weakly by quadratic penalties on the boundary displacement and on
    the change of the surface normal.
*/
#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "c1shell/c1space.hpp"
#include "c1shell/gauss.hpp"

namespace c1shell {

struct ShellMaterial {
    double youngs;    ///< E, force/area
    double poisson;   ///< nu
    double thickness; ///< t, length

    ShellMaterial(double E, double nu, double t) : youngs(E), poisson(nu), thickness(t)
    {
        C1SHELL_REQUIRE(E > 0 && t > 0 && nu > -1.0 && nu < 0.5, ParameterError,
                        "ShellMaterial: invalid parameters");
    }
};

struct PointLoad {
    int patch;
    double x1, x2;
    Eigen::Vector3d force;
    bool followsLambda = true; ///< scaled by the continuation factor
};

struct LoadCase {
    Eigen::Vector3d distributed = Eigen::Vector3d::Zero(); ///< per undeformed area, follows lambda
    std::vector<PointLoad> pointLoads;
};

enum class BoundaryConditionType { ClampedWeak, Pinned };

struct BoundaryCondition {
    int edge; ///< boundary edge index in the topology's unified edge list
    BoundaryConditionType type = BoundaryConditionType::ClampedWeak;
};

struct BoundaryConditionSet {
    std::vector<BoundaryCondition> conditions;
    double penaltyScale = 1e4; ///< dimensionless alpha_bc
};

/// Displacement state: coefficients (3 interleaved components per basis
/// function) plus the extracted per-patch displacement tables.
class ShellState {
public:
    explicit ShellState(const C1Space& space)
        : space_(&space), u_(Eigen::VectorXd::Zero(3 * space.dim()))
    {
        extract();
    }

    const C1Space& space() const { return *space_; }
    const Eigen::VectorXd& displacement() const { return u_; }

    void setDisplacement(const Eigen::VectorXd& u)
    {
        C1SHELL_REQUIRE(u.size() == 3 * space_->dim(), ParameterError,
                        "ShellState: displacement length mismatch");
        u_ = u;
        extract();
    }

    /// Displacement vector field and derivatives at a patch parameter.
    void dispDerivatives(int patch, double x1, double x2, Eigen::Vector3d& u,
                         Eigen::Matrix<double, 3, 2>& du, Eigen::Matrix<double, 3, 3>& ddu) const
    {
        const auto& fam = space_->families();
        auto e1 = fam.full.evalBasis(x1, 2);
        auto e2 = fam.full.evalBasis(x2, 2);
        u.setZero();
        du.setZero();
        ddu.setZero();
        for (int c = 0; c < 3; ++c) {
            const Eigen::MatrixXd& D = disp_[patch][c];
            for (int a = 0; a <= fam.p; ++a)
                for (int b = 0; b <= fam.p; ++b) {
                    const double w = D(e1.first + a, e2.first + b);
                    if (w == 0.0) continue;
                    u(c) += w * e1.values(0, a) * e2.values(0, b);
                    du(c, 0) += w * e1.values(1, a) * e2.values(0, b);
                    du(c, 1) += w * e1.values(0, a) * e2.values(1, b);
                    ddu(c, 0) += w * e1.values(2, a) * e2.values(0, b);
                    ddu(c, 1) += w * e1.values(0, a) * e2.values(2, b);
                    ddu(c, 2) += w * e1.values(1, a) * e2.values(1, b);
                }
        }
    }

private:
    void extract()
    {
        const int np = space_->surface().numPatches();
        disp_.resize(np);
        const int dim = space_->dim();
        for (int c = 0; c < 3; ++c) {
            Eigen::VectorXd comp(dim);
            for (int i = 0; i < dim; ++i) comp(i) = u_(3 * i + c);
            for (int ip = 0; ip < np; ++ip) disp_[ip][c] = space_->patchTable(ip, comp);
        }
    }

    const C1Space* space_;
    Eigen::VectorXd u_;
    std::vector<std::array<Eigen::MatrixXd, 3>> disp_;
};

/// First and second fundamental forms at a parameter point.
struct FundamentalForms {
    Eigen::Matrix2d a;      ///< metric
    Eigen::Matrix2d b;      ///< curvature
    Eigen::Vector3d normal; ///< unit normal a3
    Eigen::Matrix<double, 3, 2> basis; ///< covariant basis a_alpha
};

enum class Configuration { Undeformed, Deformed };

class ShellAssembler {
public:
    ShellAssembler(const C1Space& space, ShellMaterial material, LoadCase loads,
                   BoundaryConditionSet bcs)
        : space_(space), mat_(material), loads_(std::move(loads)), bcs_(std::move(bcs))
    {
        precompute();
    }

    const C1Space& space() const { return space_; }
    int numDof() const { return 3 * space_.dim(); }

    // ----- pointwise shell quantities ----------------------------------
    FundamentalForms fundamentalForms(const ShellState& state, int patch, double x1, double x2,
                                      Configuration cfg) const
    {
        PatchEval geo = space_.surface().patch(patch).eval(x1, x2, 2);
        Eigen::Matrix<double, 3, 2> aCov = geo.jac;
        Eigen::Matrix<double, 3, 3> hess = geo.hess; // columns (11,22,12)
        if (cfg == Configuration::Deformed) {
            Eigen::Vector3d u;
            Eigen::Matrix<double, 3, 2> du;
            Eigen::Matrix<double, 3, 3> ddu;
            state.dispDerivatives(patch, x1, x2, u, du, ddu);
            aCov += du;
            hess += ddu;
        }
        FundamentalForms out;
        out.basis = aCov;
        out.a = aCov.transpose() * aCov;
        Eigen::Vector3d an = aCov.col(0).cross(aCov.col(1));
        const double j = an.norm();
        C1SHELL_REQUIRE(j > 1e-14 * std::max(1.0, aCov.norm() * aCov.norm()), SingularGeometryError,
                        "fundamentalForms: degenerate Jacobian");
        out.normal = an / j;
        out.b(0, 0) = out.normal.dot(hess.col(0));
        out.b(1, 1) = out.normal.dot(hess.col(1));
        out.b(0, 1) = out.b(1, 0) = out.normal.dot(hess.col(2));
        return out;
    }

    /// Membrane and bending strains (Green-Lagrange / curvature change).
    void strains(const ShellState& state, int patch, double x1, double x2, Eigen::Matrix2d& eps,
                 Eigen::Matrix2d& kappa) const
    {
        FundamentalForms def = fundamentalForms(state, patch, x1, x2, Configuration::Deformed);
        FundamentalForms ref = fundamentalForms(state, patch, x1, x2, Configuration::Undeformed);
        eps = 0.5 * (def.a - ref.a);
        kappa = def.b - ref.b;
    }

    /// Von Mises stress of the membrane part, in physical (orthonormal-frame)
    /// components of n / t.
    double vonMisesMembrane(const ShellState& state, int patch, double x1, double x2) const
    {
        Eigen::Matrix2d eps, kappa;
        strains(state, patch, x1, x2, eps, kappa);
        FundamentalForms ref = fundamentalForms(state, patch, x1, x2, Configuration::Undeformed);
        Eigen::Matrix2d aInv = ref.a.inverse();
        Eigen::Matrix2d n = mat_.thickness * materialContraction(aInv, eps);
        // orthonormal tangent frame
        Eigen::Vector3d e1 = ref.basis.col(0).normalized();
        Eigen::Vector3d e2t = ref.basis.col(1) - ref.basis.col(1).dot(e1) * e1;
        Eigen::Vector3d e2 = e2t.normalized();
        Eigen::Matrix2d L; // L(i,alpha) = e_i . a_alpha
        L(0, 0) = e1.dot(ref.basis.col(0));
        L(0, 1) = e1.dot(ref.basis.col(1));
        L(1, 0) = e2.dot(ref.basis.col(0));
        L(1, 1) = e2.dot(ref.basis.col(1));
        Eigen::Matrix2d sig = L * n * L.transpose() / mat_.thickness;
        return std::sqrt(sig(0, 0) * sig(0, 0) + sig(1, 1) * sig(1, 1) - sig(0, 0) * sig(1, 1) +
                         3.0 * sig(0, 1) * sig(0, 1));
    }

    // ----- global operators ---------------------------------------------
    /// External load vector scaled by the continuation factor.
    Eigen::VectorXd externalScaled() const { return fExtScaled_; }
    /// External load vector independent of the continuation factor.
    Eigen::VectorXd externalConst() const { return fExtConst_; }

    Eigen::VectorXd residual(const ShellState& state, double lambda = 1.0) const
    {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(numDof());
        assembleCore(state, &r, nullptr, nullptr);
        r -= lambda * fExtScaled_ + fExtConst_;
        return r;
    }

    Eigen::SparseMatrix<double> tangent(const ShellState& state, double lambda = 1.0) const
    {
        (void)lambda; // dead loads: the external part has no tangent
        Eigen::SparseMatrix<double> K(numDof(), numDof());
        assembleCore(state, nullptr, &K, nullptr);
        return K;
    }

    void residualAndTangent(const ShellState& state, double lambda, Eigen::VectorXd& r,
                            Eigen::SparseMatrix<double>& K) const
    {
        r = Eigen::VectorXd::Zero(numDof());
        K = Eigen::SparseMatrix<double>(numDof(), numDof());
        assembleCore(state, &r, &K, nullptr);
        r -= lambda * fExtScaled_ + fExtConst_;
    }

    /// Total potential energy (internal + penalties - external work).
    double energy(const ShellState& state, double lambda = 1.0) const
    {
        double e = 0.0;
        assembleCore(state, nullptr, nullptr, &e);
        e -= state.displacement().dot(lambda * fExtScaled_ + fExtConst_);
        return e;
    }

    /// Tangent stiffness at u = 0 (the linear-analysis operator).
    Eigen::SparseMatrix<double> linearStiffness() const
    {
        ShellState zero(space_);
        return tangent(zero, 0.0);
    }

    /// Strain energy norm B = 1/2 u^T K u of a linear solution.
    static double strainEnergy(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& u)
    {
        return 0.5 * u.dot(K * u);
    }

    /// Diagnostics for the weak boundary conditions: integrated squared
    /// boundary displacement and normal rotation of the current state.
    std::pair<double, double> boundaryConditionMeasures(const ShellState& state) const
    {
        double dispM = 0.0, rotM = 0.0;
        forEachBoundaryQP([&](const BoundaryQP& bq) {
            Eigen::Vector3d u;
            Eigen::Matrix<double, 3, 2> du;
            Eigen::Matrix<double, 3, 3> ddu;
            state.dispDerivatives(bq.patch, bq.x1, bq.x2, u, du, ddu);
            FundamentalForms def = fundamentalForms(state, bq.patch, bq.x1, bq.x2, Configuration::Deformed);
            FundamentalForms ref = fundamentalForms(state, bq.patch, bq.x1, bq.x2, Configuration::Undeformed);
            dispM += bq.w * u.squaredNorm();
            rotM += bq.w * (def.normal - ref.normal).squaredNorm();
        });
        return {dispM, rotM};
    }

private:
    // ----- precomputed data ----------------------------------------------
    struct ElementData {
        int patch;
        int span1, span2;            ///< element indices per direction
        std::vector<int> active;     ///< global C1 ids with support here
        Eigen::MatrixXd E;           ///< local extraction: active x (p+1)^2
    };

    struct QPGeo {
        Eigen::Matrix<double, 3, 2> jac;
        Eigen::Matrix<double, 3, 3> hess; ///< columns (11,22,12)
        Eigen::Matrix2d aInv;
        double dA; ///< quadrature weight times sqrt(det a)
    };

    struct BoundaryQP {
        int patch;
        double x1, x2;
        double w;            ///< quadrature weight times arclength speed
        int side;            ///< 0..3
        bool rotationPenalty;
    };

    void precompute()
    {
        const auto& fam = space_.families();
        const int p = fam.p, k = fam.k;
        const double h = fam.full.meshSize();
        quad_ = gaussLegendre(p + 1);
        const int nq = p + 1;

        // univariate basis caches per (element, gauss point)
        basis1d_.resize(k);
        for (int e = 0; e < k; ++e) {
            basis1d_[e].resize(nq);
            for (int g = 0; g < nq; ++g)
                basis1d_[e][g] = fam.full.evalBasis((e + quad_.points[g]) * h, 2);
        }

        // elements: active functions and dense local extraction
        const int n = fam.full.dimension();
        const auto& surf = space_.surface();
        for (int ip = 0; ip < surf.numPatches(); ++ip) {
            const auto& Ecol = space_.extractionByTensor(ip);
            for (int e1 = 0; e1 < k; ++e1)
                for (int e2 = 0; e2 < k; ++e2) {
                    ElementData el;
                    el.patch = ip;
                    el.span1 = e1;
                    el.span2 = e2;
                    const int f1 = basis1d_[e1][0].first, f2 = basis1d_[e2][0].first;
                    std::map<int, int> localIndex;
                    for (int a = 0; a <= p; ++a)
                        for (int b = 0; b <= p; ++b) {
                            const int col = (f1 + a) * n + (f2 + b);
                            for (Eigen::SparseMatrix<double>::InnerIterator it(Ecol, col); it; ++it)
                                localIndex.emplace(static_cast<int>(it.row()),
                                                   static_cast<int>(localIndex.size()));
                        }
                    el.active.resize(localIndex.size());
                    for (const auto& [gid, lid] : localIndex) el.active[lid] = gid;
                    el.E = Eigen::MatrixXd::Zero(static_cast<int>(localIndex.size()), (p + 1) * (p + 1));
                    for (int a = 0; a <= p; ++a)
                        for (int b = 0; b <= p; ++b) {
                            const int col = (f1 + a) * n + (f2 + b);
                            for (Eigen::SparseMatrix<double>::InnerIterator it(Ecol, col); it; ++it)
                                el.E(localIndex[static_cast<int>(it.row())], a * (p + 1) + b) = it.value();
                        }
                    elements_.push_back(std::move(el));
                }
        }

        // geometry cache per element quadrature point
        geo_.resize(elements_.size());
        for (size_t ei = 0; ei < elements_.size(); ++ei) {
            const ElementData& el = elements_[ei];
            geo_[ei].resize(nq * nq);
            for (int g1 = 0; g1 < nq; ++g1)
                for (int g2 = 0; g2 < nq; ++g2) {
                    const double x1 = (el.span1 + quad_.points[g1]) * h;
                    const double x2 = (el.span2 + quad_.points[g2]) * h;
                    PatchEval pe = space_.surface().patch(el.patch).eval(x1, x2, 2);
                    QPGeo qp;
                    qp.jac = pe.jac;
                    qp.hess = pe.hess;
                    Eigen::Matrix2d am = pe.jac.transpose() * pe.jac;
                    const double det = am.determinant();
                    C1SHELL_REQUIRE(det > 0, SingularGeometryError,
                                    "ShellAssembler: singular geometry at a quadrature point");
                    qp.aInv = am.inverse();
                    qp.dA = quad_.weights[g1] * quad_.weights[g2] * h * h * std::sqrt(det);
                    geo_[ei][g1 * nq + g2] = qp;
                }
        }

        buildExternal();
        buildBoundaryQPs();
    }

    void buildExternal()
    {
        fExtScaled_ = Eigen::VectorXd::Zero(numDof());
        fExtConst_ = Eigen::VectorXd::Zero(numDof());
        const auto& fam = space_.families();
        const int p = fam.p, nq = p + 1;

        if (loads_.distributed.squaredNorm() > 0.0) {
            for (size_t ei = 0; ei < elements_.size(); ++ei) {
                const ElementData& el = elements_[ei];
                const int nact = static_cast<int>(el.active.size());
                Eigen::VectorXd tensor((p + 1) * (p + 1));
                for (int g1 = 0; g1 < nq; ++g1)
                    for (int g2 = 0; g2 < nq; ++g2) {
                        const auto& e1 = basis1d_[el.span1][g1];
                        const auto& e2 = basis1d_[el.span2][g2];
                        for (int a = 0; a <= p; ++a)
                            for (int b = 0; b <= p; ++b)
                                tensor(a * (p + 1) + b) = e1.values(0, a) * e2.values(0, b);
                        Eigen::VectorXd phi = el.E * tensor;
                        const double w = geo_[ei][g1 * nq + g2].dA;
                        for (int i = 0; i < nact; ++i)
                            for (int c = 0; c < 3; ++c)
                                fExtScaled_(3 * el.active[i] + c) += w * loads_.distributed(c) * phi(i);
                    }
            }
        }

        std::vector<std::pair<int, double>> phi;
        for (const auto& pl : loads_.pointLoads) {
            evalActiveFunctions(space_, pl.patch, pl.x1, pl.x2, phi);
            Eigen::VectorXd& target = pl.followsLambda ? fExtScaled_ : fExtConst_;
            for (const auto& [i, v] : phi)
                for (int c = 0; c < 3; ++c) target(3 * i + c) += v * pl.force(c);
        }
    }

    void buildBoundaryQPs()
    {
        const auto& topo = space_.topology();
        const auto& fam = space_.families();
        const int k = fam.k, nq = fam.p + 1;
        const double h = fam.full.meshSize();
        for (const auto& bc : bcs_.conditions) {
            C1SHELL_REQUIRE(!topo.isInterface(bc.edge), ParameterError,
                            "boundary condition attached to an interface");
            PatchSide ps = topo.edgeSideA(bc.edge);
            const bool rot = bc.type == BoundaryConditionType::ClampedWeak;
            for (int e = 0; e < k; ++e)
                for (int g = 0; g < nq; ++g) {
                    const double s = (e + quad_.points[g]) * h;
                    BoundaryQP bq;
                    bq.patch = ps.patch;
                    bq.side = ps.side;
                    bq.rotationPenalty = rot;
                    switch (ps.side) {
                    case 0: bq.x1 = 0; bq.x2 = s; break;
                    case 1: bq.x1 = 1; bq.x2 = s; break;
                    case 2: bq.x1 = s; bq.x2 = 0; break;
                    default: bq.x1 = s; bq.x2 = 1; break;
                    }
                    PatchEval pe = space_.surface().patch(ps.patch).eval(bq.x1, bq.x2, 1);
                    Eigen::Vector3d tangent = (ps.side < 2) ? pe.jac.col(1) : pe.jac.col(0);
                    bq.w = quad_.weights[g] * h * tangent.norm();
                    boundaryQPs_.push_back(bq);
                }
        }
    }

    template <typename F>
    void forEachBoundaryQP(F&& f) const
    {
        for (const auto& bq : boundaryQPs_) f(bq);
    }

    // C : S for the plane-stress tensor built from the contravariant metric.
    Eigen::Matrix2d materialContraction(const Eigen::Matrix2d& aInv, const Eigen::Matrix2d& S) const
    {
        const double c1 = mat_.youngs * mat_.poisson / (1.0 - mat_.poisson * mat_.poisson);
        const double c2 = mat_.youngs / (2.0 * (1.0 + mat_.poisson));
        const double trace = (aInv * S).trace(); // A^{gd} S_{gd} for symmetric S
        return c1 * trace * aInv + 2.0 * c2 * (aInv * S * aInv);
    }

    // ----- the assembly kernel -------------------------------------------
    void assembleCore(const ShellState& state, Eigen::VectorXd* R, Eigen::SparseMatrix<double>* K,
                      double* energyOut) const;

    const C1Space& space_;
    ShellMaterial mat_;
    LoadCase loads_;
    BoundaryConditionSet bcs_;

    QuadratureRule quad_;
    std::vector<std::vector<BSplineBasis::EvalResult>> basis1d_;
    std::vector<ElementData> elements_;
    std::vector<std::vector<QPGeo>> geo_;
    std::vector<BoundaryQP> boundaryQPs_;
    Eigen::VectorXd fExtScaled_, fExtConst_;
};

// ---------------------------------------------------------------------------
// kernel
// ---------------------------------------------------------------------------

inline void ShellAssembler::assembleCore(const ShellState& state, Eigen::VectorXd* R,
                                         Eigen::SparseMatrix<double>* K, double* energyOut) const
{
    const auto& fam = space_.families();
    const int p = fam.p, nq = p + 1;
    const double t = mat_.thickness;
    const double bendFactor = t * t * t / 12.0;

    std::vector<Eigen::Triplet<double>> trips;
    double energy = 0.0;

    // work arrays sized to the largest element
    const int maxAct = [&] {
        size_t m = 0;
        for (const auto& el : elements_) m = std::max(m, el.active.size());
        return static_cast<int>(m);
    }();
    Eigen::MatrixXd shp(maxAct, 6); // phi, d1, d2, d11, d22, d12
    Eigen::MatrixXd tensors((p + 1) * (p + 1), 6);

    struct DofData {
        Eigen::Vector3d dat;   // delta atilde
        Eigen::Vector3d da3;   // delta a3
        double dj;             // delta |atilde|
        double p1;             // G . dat
        Eigen::Vector3d deps;  // (11, 22, 12)
        Eigen::Vector3d dkap;
        Eigen::Vector3d Cdeps; // material-contracted
        Eigen::Vector3d Cdkap;
    };
    std::vector<DofData> dof(3 * maxAct);

    for (size_t ei = 0; ei < elements_.size(); ++ei) {
        const ElementData& el = elements_[ei];
        const int nact = static_cast<int>(el.active.size());
        const int ndof = 3 * nact;
        Eigen::MatrixXd Kloc;
        Eigen::VectorXd Rloc;
        if (K) Kloc = Eigen::MatrixXd::Zero(ndof, ndof);
        if (R) Rloc = Eigen::VectorXd::Zero(ndof);

        for (int g1 = 0; g1 < nq; ++g1)
            for (int g2 = 0; g2 < nq; ++g2) {
                const QPGeo& qp = geo_[ei][g1 * nq + g2];
                const auto& e1 = basis1d_[el.span1][g1];
                const auto& e2 = basis1d_[el.span2][g2];
                for (int a = 0; a <= p; ++a)
                    for (int b = 0; b <= p; ++b) {
                        const int loc = a * (p + 1) + b;
                        tensors(loc, 0) = e1.values(0, a) * e2.values(0, b);
                        tensors(loc, 1) = e1.values(1, a) * e2.values(0, b);
                        tensors(loc, 2) = e1.values(0, a) * e2.values(1, b);
                        tensors(loc, 3) = e1.values(2, a) * e2.values(0, b);
                        tensors(loc, 4) = e1.values(0, a) * e2.values(2, b);
                        tensors(loc, 5) = e1.values(1, a) * e2.values(1, b);
                    }
                shp.topRows(nact).noalias() = el.E * tensors;

                // deformed configuration from the state's patch tables
                Eigen::Matrix<double, 3, 2> aCov = qp.jac;
                Eigen::Matrix<double, 3, 3> hess = qp.hess;
                {
                    // displacement derivatives via the same local shape values
                    Eigen::Matrix<double, 3, 2> du = Eigen::Matrix<double, 3, 2>::Zero();
                    Eigen::Matrix<double, 3, 3> ddu = Eigen::Matrix<double, 3, 3>::Zero();
                    const Eigen::VectorXd& u = state.displacement();
                    for (int i = 0; i < nact; ++i) {
                        const int gid = el.active[i];
                        for (int c = 0; c < 3; ++c) {
                            const double ui = u(3 * gid + c);
                            if (ui == 0.0) continue;
                            du(c, 0) += ui * shp(i, 1);
                            du(c, 1) += ui * shp(i, 2);
                            ddu(c, 0) += ui * shp(i, 3);
                            ddu(c, 1) += ui * shp(i, 4);
                            ddu(c, 2) += ui * shp(i, 5);
                        }
                    }
                    aCov += du;
                    hess += ddu;
                }

                const Eigen::Vector3d a1 = aCov.col(0), a2 = aCov.col(1);
                const Eigen::Vector3d atil = a1.cross(a2);
                const double jdet = atil.norm();
                C1SHELL_REQUIRE(jdet > 0, SingularGeometryError, "assemble: degenerate deformed state");
                const Eigen::Vector3d a3 = atil / jdet;

                Eigen::Matrix2d am = aCov.transpose() * aCov;
                Eigen::Matrix2d amRef = qp.jac.transpose() * qp.jac;
                Eigen::Matrix2d eps = 0.5 * (am - amRef);
                Eigen::Matrix2d bdef, bref;
                bdef(0, 0) = a3.dot(hess.col(0));
                bdef(1, 1) = a3.dot(hess.col(1));
                bdef(0, 1) = bdef(1, 0) = a3.dot(hess.col(2));
                const Eigen::Vector3d a3ref =
                    qp.jac.col(0).cross(qp.jac.col(1)).normalized();
                bref(0, 0) = a3ref.dot(qp.hess.col(0));
                bref(1, 1) = a3ref.dot(qp.hess.col(1));
                bref(0, 1) = bref(1, 0) = a3ref.dot(qp.hess.col(2));
                Eigen::Matrix2d kap = bdef - bref;

                Eigen::Matrix2d nTens = t * materialContraction(qp.aInv, eps);
                Eigen::Matrix2d mTens = bendFactor * materialContraction(qp.aInv, kap);

                if (energyOut)
                    energy += 0.5 * qp.dA * ((nTens * eps).trace() + (mTens * kap).trace());
                if (!R && !K) continue;

                // curvature coupling vector G = m^{ab} c_ab
                const Eigen::Vector3d G = mTens(0, 0) * hess.col(0) + mTens(1, 1) * hess.col(1) +
                                          2.0 * mTens(0, 1) * hess.col(2);
                const double Ga3 = G.dot(a3);

                // per-DoF variation data
                for (int i = 0; i < nact; ++i) {
                    const double s1 = shp(i, 1), s2 = shp(i, 2);
                    const double s11 = shp(i, 3), s22 = shp(i, 4), s12 = shp(i, 5);
                    for (int c = 0; c < 3; ++c) {
                        DofData& d = dof[3 * i + c];
                        Eigen::Vector3d ec = Eigen::Vector3d::Zero();
                        ec(c) = 1.0;
                        d.dat = s1 * ec.cross(a2) + s2 * a1.cross(ec);
                        d.dj = a3.dot(d.dat);
                        d.da3 = (d.dat - d.dj * a3) / jdet;
                        d.p1 = G.dot(d.dat);
                        d.deps(0) = s1 * a1(c);
                        d.deps(1) = s2 * a2(c);
                        d.deps(2) = 0.5 * (s1 * a2(c) + s2 * a1(c));
                        d.dkap(0) = d.da3.dot(hess.col(0)) + s11 * a3(c);
                        d.dkap(1) = d.da3.dot(hess.col(1)) + s22 * a3(c);
                        d.dkap(2) = d.da3.dot(hess.col(2)) + s12 * a3(c);
                        Eigen::Matrix2d de;
                        de << d.deps(0), d.deps(2), d.deps(2), d.deps(1);
                        Eigen::Matrix2d dk;
                        dk << d.dkap(0), d.dkap(2), d.dkap(2), d.dkap(1);
                        Eigen::Matrix2d Ce = t * materialContraction(qp.aInv, de);
                        Eigen::Matrix2d Ck = bendFactor * materialContraction(qp.aInv, dk);
                        d.Cdeps = Eigen::Vector3d(Ce(0, 0), Ce(1, 1), Ce(0, 1));
                        d.Cdkap = Eigen::Vector3d(Ck(0, 0), Ck(1, 1), Ck(0, 1));
                    }
                }

                auto colon = [](const Eigen::Vector3d& S, const Eigen::Vector3d& T) {
                    return S(0) * T(0) + S(1) * T(1) + 2.0 * S(2) * T(2);
                };
                const Eigen::Vector3d nV(nTens(0, 0), nTens(1, 1), nTens(0, 1));
                const Eigen::Vector3d mV(mTens(0, 0), mTens(1, 1), mTens(0, 1));

                if (R) {
                    for (int i = 0; i < ndof; ++i)
                        Rloc(i) += qp.dA * (colon(nV, dof[i].deps) + colon(mV, dof[i].dkap));
                }
                if (K) {
                    // mu_a = m^{ab} phi_{a,ab} per scalar shape function
                    Eigen::VectorXd mu(nact);
                    for (int i = 0; i < nact; ++i)
                        mu(i) = mTens(0, 0) * shp(i, 3) + mTens(1, 1) * shp(i, 4) +
                                2.0 * mTens(0, 1) * shp(i, 5);

                    for (int i = 0; i < ndof; ++i) {
                        const int ai = i / 3, ci = i % 3;
                        const DofData& di = dof[i];
                        for (int j = i; j < ndof; ++j) {
                            const int aj = j / 3, cj = j % 3;
                            const DofData& dj = dof[j];
                            double kij = colon(di.Cdeps, dj.deps) + colon(di.Cdkap, dj.dkap);
                            // n : d2eps
                            if (ci == cj)
                                kij += nTens(0, 0) * shp(ai, 1) * shp(aj, 1) +
                                       nTens(1, 1) * shp(ai, 2) * shp(aj, 2) +
                                       nTens(0, 1) * (shp(ai, 1) * shp(aj, 2) + shp(ai, 2) * shp(aj, 1));
                            // m : d2kappa
                            const double sab =
                                shp(ai, 1) * shp(aj, 2) - shp(ai, 2) * shp(aj, 1);
                            Eigen::Vector3d ecd = Eigen::Vector3d::Zero();
                            // e_ci x e_cj
                            if (ci != cj) {
                                const int k3 = 3 - ci - cj;
                                ecd(k3) = ((cj - ci + 3) % 3 == 1) ? 1.0 : -1.0;
                            }
                            double Gd2a3 = 0.0;
                            if (ci != cj)
                                Gd2a3 += sab * (G.dot(ecd) - Ga3 * a3.dot(ecd)) / jdet;
                            Gd2a3 -= (di.p1 * dj.dj + dj.p1 * di.dj) / (jdet * jdet);
                            Gd2a3 -= Ga3 * di.dat.dot(dj.dat) / (jdet * jdet);
                            Gd2a3 += 3.0 * Ga3 * di.dj * dj.dj / (jdet * jdet);
                            kij += Gd2a3;
                            kij += mu(aj) * di.da3(cj) + mu(ai) * dj.da3(ci);
                            Kloc(i, j) += qp.dA * kij;
                            if (j != i) Kloc(j, i) += qp.dA * kij;
                        }
                    }
                }
            }

        if (R)
            for (int i = 0; i < ndof; ++i) (*R)(3 * el.active[i / 3] + i % 3) += Rloc(i);
        if (K)
            for (int i = 0; i < ndof; ++i)
                for (int j = 0; j < ndof; ++j)
                    if (Kloc(i, j) != 0.0)
                        trips.emplace_back(3 * el.active[i / 3] + i % 3,
                                           3 * el.active[j / 3] + j % 3, Kloc(i, j));
    }

    // weak boundary conditions
    const double cd = bcs_.penaltyScale * mat_.youngs * mat_.thickness;
    const double cr = bcs_.penaltyScale * mat_.youngs * std::pow(mat_.thickness, 3);
    std::vector<ActiveFunctionEval> phiList;
    for (const auto& bq : boundaryQPs_) {
        evalActiveFunctionGradients(space_, bq.patch, bq.x1, bq.x2, phiList);
        const int nact = static_cast<int>(phiList.size());

        Eigen::Vector3d u;
        Eigen::Matrix<double, 3, 2> du;
        Eigen::Matrix<double, 3, 3> ddu;
        state.dispDerivatives(bq.patch, bq.x1, bq.x2, u, du, ddu);

        if (energyOut) energy += 0.5 * cd * bq.w * u.squaredNorm();
        if (R || K) {
            for (int i = 0; i < nact; ++i) {
                if (R)
                    for (int c = 0; c < 3; ++c)
                        (*R)(3 * phiList[i].func + c) += cd * bq.w * u(c) * phiList[i].value;
                if (K)
                    for (int j = 0; j < nact; ++j)
                        for (int c = 0; c < 3; ++c)
                            trips.emplace_back(3 * phiList[i].func + c, 3 * phiList[j].func + c,
                                               cd * bq.w * phiList[i].value * phiList[j].value);
            }
        }

        if (!bq.rotationPenalty) continue;

        // rotation penalty: 1/2 cr |a3 - a3_ref|^2 with the same normal
        // variation machinery as the bending terms
        PatchEval pe = space_.surface().patch(bq.patch).eval(bq.x1, bq.x2, 1);
        Eigen::Matrix<double, 3, 2> aCov = pe.jac + du;
        const Eigen::Vector3d a1 = aCov.col(0), a2 = aCov.col(1);
        const Eigen::Vector3d atil = a1.cross(a2);
        const double jdet = atil.norm();
        const Eigen::Vector3d a3 = atil / jdet;
        const Eigen::Vector3d r1 = pe.jac.col(0), r2 = pe.jac.col(1);
        const Eigen::Vector3d a3ref = r1.cross(r2).normalized();
        const Eigen::Vector3d dn = a3 - a3ref;

        if (energyOut) energy += 0.5 * cr * bq.w * dn.squaredNorm();
        if (!R && !K) continue;

        const int ndof = 3 * nact;
        std::vector<Eigen::Vector3d> da3(ndof), dat(ndof);
        std::vector<double> djv(ndof);
        for (int i = 0; i < nact; ++i)
            for (int c = 0; c < 3; ++c) {
                Eigen::Vector3d ec = Eigen::Vector3d::Zero();
                ec(c) = 1.0;
                Eigen::Vector3d v = phiList[i].d1 * ec.cross(a2) + phiList[i].d2 * a1.cross(ec);
                dat[3 * i + c] = v;
                djv[3 * i + c] = a3.dot(v);
                da3[3 * i + c] = (v - djv[3 * i + c] * a3) / jdet;
            }
        if (R)
            for (int i = 0; i < ndof; ++i)
                (*R)(3 * phiList[i / 3].func + i % 3) += cr * bq.w * dn.dot(da3[i]);
        if (K) {
            const double Ga3 = dn.dot(a3);
            for (int i = 0; i < ndof; ++i) {
                const int ci = i % 3;
                for (int j = i; j < ndof; ++j) {
                    const int cj = j % 3;
                    double kij = da3[i].dot(da3[j]);
                    // dn . d2a3
                    const double sab = phiList[i / 3].d1 * phiList[j / 3].d2 -
                                       phiList[i / 3].d2 * phiList[j / 3].d1;
                    double Gd2a3 = 0.0;
                    if (ci != cj) {
                        Eigen::Vector3d ecd = Eigen::Vector3d::Zero();
                        const int k3 = 3 - ci - cj;
                        ecd(k3) = ((cj - ci + 3) % 3 == 1) ? 1.0 : -1.0;
                        Gd2a3 += sab * (dn.dot(ecd) - Ga3 * a3.dot(ecd)) / jdet;
                    }
                    Gd2a3 -= (dn.dot(dat[i]) * djv[j] + dn.dot(dat[j]) * djv[i]) / (jdet * jdet);
                    Gd2a3 -= Ga3 * dat[i].dot(dat[j]) / (jdet * jdet);
                    Gd2a3 += 3.0 * Ga3 * djv[i] * djv[j] / (jdet * jdet);
                    kij += Gd2a3;
                    const double val = cr * bq.w * kij;
                    const int gi = 3 * phiList[i / 3].func + ci;
                    const int gj = 3 * phiList[j / 3].func + cj;
                    trips.emplace_back(gi, gj, val);
                    if (j != i) trips.emplace_back(gj, gi, val);
                }
            }
        }
    }

    if (K) K->setFromTriplets(trips.begin(), trips.end());
    if (energyOut) *energyOut = energy;
}

} // namespace c1shell
