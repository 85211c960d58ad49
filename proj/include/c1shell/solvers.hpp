/** @file solvers.hpp
    @brief Linear solves, Newton iteration and Crisfield arc-length
           continuation for the assembled shell systems.
*/
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "c1shell/errors.hpp"
#include "c1shell/shell.hpp"

namespace c1shell {

/// Sparse symmetric factorization with one step of iterative refinement.
/// Accepts the solution when the residual is below 1e-10 relative to the
/// load, or (for stiff penalty-conditioned systems where that metric sits
/// under the floating-point floor) when the backward error is at machine
/// precision.
inline Eigen::VectorXd solveLinear(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& F)
{
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
    C1SHELL_REQUIRE(solver.info() == Eigen::Success, SolverError,
                    "solveLinear: factorization failed (singular or indefinite matrix)");
    Eigen::VectorXd u = solver.solve(F);
    u += solver.solve(F - K * u);
    double knorm = 0.0;
    for (int k = 0; k < K.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(K, k); it; ++it)
            knorm = std::max(knorm, std::abs(it.value()));
    const double res = (K * u - F).norm();
    const double rel = res / std::max(F.norm(), 1e-300);
    const double backward = res / std::max(knorm * u.norm() + F.norm(), 1e-300);
    C1SHELL_REQUIRE(rel <= 1e-10 || backward <= 1e-12, SolverError,
                    "solveLinear: relative residual " + std::to_string(rel) + " exceeds 1e-10");
    return u;
}

struct NewtonSettings {
    double tolerance = 1e-8; ///< relative residual
    int maxIterations = 25;
    bool lineSearch = false;
};

struct NewtonResult {
    Eigen::VectorXd u;
    std::vector<double> residualHistory;
    bool converged = false;
    int iterations = 0;
};

/// Nonlinear problem interface: residual and tangent at (u, lambda), with a
/// constant load direction dR/dlambda = -externalScaled.
struct NonlinearSystem {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> residual;
    std::function<Eigen::SparseMatrix<double>(const Eigen::VectorXd&, double)> tangent;
    Eigen::VectorXd externalScaled;
    int ndof = 0;
};

inline NonlinearSystem makeSystem(const ShellAssembler& assembler)
{
    NonlinearSystem sys;
    sys.ndof = assembler.numDof();
    sys.externalScaled = assembler.externalScaled();
    sys.residual = [&assembler](const Eigen::VectorXd& u, double lambda) {
        ShellState state(assembler.space());
        state.setDisplacement(u);
        return assembler.residual(state, lambda);
    };
    sys.tangent = [&assembler](const Eigen::VectorXd& u, double lambda) {
        ShellState state(assembler.space());
        state.setDisplacement(u);
        return assembler.tangent(state, lambda);
    };
    return sys;
}

namespace detail {

inline double newtonReference(const NonlinearSystem& sys, double lambda)
{
    return std::max(std::abs(lambda) * sys.externalScaled.norm(), 1e-300);
}

} // namespace detail

/// Newton iteration at fixed load factor. Throws NonConvergenceError with the
/// residual history if the iteration budget is exhausted.
inline NewtonResult newton(const NonlinearSystem& sys, const Eigen::VectorXd& u0, double lambda,
                           const NewtonSettings& settings = {})
{
    NewtonResult out;
    out.u = u0;
    double ref = detail::newtonReference(sys, lambda);
    for (int it = 0; it <= settings.maxIterations; ++it) {
        Eigen::VectorXd r = sys.residual(out.u, lambda);
        const double rnorm = r.norm();
        out.residualHistory.push_back(rnorm);
        ref = std::max(ref, it == 0 ? rnorm : 0.0); // fall back to the initial residual scale
        if (rnorm <= settings.tolerance * ref) {
            out.converged = true;
            out.iterations = it;
            return out;
        }
        if (it == settings.maxIterations) break;
        Eigen::SparseMatrix<double> K = sys.tangent(out.u, lambda);
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
        C1SHELL_REQUIRE(solver.info() == Eigen::Success, SolverError,
                        "newton: singular tangent (possible bifurcation point)");
        Eigen::VectorXd du = solver.solve(-r);
        if (settings.lineSearch) {
            double best = 1.0, bestNorm = std::numeric_limits<double>::max();
            for (double s : {1.0, 0.5, 0.25}) {
                const double n = sys.residual(out.u + s * du, lambda).norm();
                if (n < bestNorm) {
                    bestNorm = n;
                    best = s;
                }
            }
            du *= best;
        }
        out.u += du;
    }
    std::ostringstream msg;
    msg << "newton: no convergence in " << settings.maxIterations << " iterations; residuals:";
    for (double r : out.residualHistory) msg << " " << r;
    throw NonConvergenceError(msg.str());
}

struct ArcLengthSettings {
    double increment = 0.0;      ///< arc-length increment dL; 0 = from first linear step
    double psi = 0.0;            ///< load-scaling weight (0: cylindrical)
    int maxSteps = 120;
    NewtonSettings newton;       ///< per-step corrector settings
    bool detectLimitPoints = true;
    double initialDLambda = 0.1; ///< sizes the automatic increment
    double minIncrementFactor = 1e-6;
    double stopLambdaDropFactor = 0.2; ///< stop once lambda fell this far below the limit
};

struct ContinuationStep {
    double lambda = 0.0;
    Eigen::VectorXd u;
    double residualNorm = 0.0;
    double constraintResidual = 0.0; ///< |(|du|^2 + psi^2 dl^2) - dL^2| / dL^2
    double rootCosine = 1.0;         ///< alignment of the chosen root with the previous step
    double increment = 0.0;
    int newtonIterations = 0;
};

struct ContinuationPath {
    std::vector<ContinuationStep> steps;   ///< accepted equilibrium points (step 0 = start)
    std::vector<double> limitLoads;        ///< lambda values at detected limit points
};

/// Crisfield arc-length continuation from (u,lambda) = (0,0). The path is
/// filled in place so accepted steps survive a nonconvergence error.
inline void arcLength(const NonlinearSystem& sys, const ArcLengthSettings& settings,
                      ContinuationPath& path)
{
    const int n = sys.ndof;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    double lambda = 0.0;

    ContinuationStep start;
    start.u = u;
    path.steps.push_back(start);

    // initial increment from the first linear step
    Eigen::SparseMatrix<double> K0 = sys.tangent(u, lambda);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol0(K0);
    C1SHELL_REQUIRE(chol0.info() == Eigen::Success, SolverError, "arcLength: singular initial tangent");
    Eigen::VectorXd v0 = chol0.solve(sys.externalScaled);
    double ds = settings.increment > 0.0
                    ? settings.increment
                    : settings.initialDLambda *
                          std::sqrt(v0.squaredNorm() + settings.psi * settings.psi);
    const double dsMin = ds * settings.minIncrementFactor;

    Eigen::VectorXd duPrev = Eigen::VectorXd::Zero(n);
    double dlPrev = 0.0;
    bool havePrev = false;
    double lambdaPeak = -std::numeric_limits<double>::infinity();
    bool peakRecorded = false;
    int peakRefinements = 0;

    const double psi2 = settings.psi * settings.psi;

    for (int step = 0; step < settings.maxSteps; ++step) {
        bool accepted = false;
        while (!accepted) {
            C1SHELL_REQUIRE(ds >= dsMin, NonConvergenceError,
                            "arcLength: increment fell below the floor at step " + std::to_string(step));
            // predictor
            Eigen::SparseMatrix<double> K = sys.tangent(u, lambda);
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(K);
            if (chol.info() != Eigen::Success) {
                ds *= 0.5;
                continue;
            }
            Eigen::VectorXd vF = chol.solve(sys.externalScaled);
            double denom = std::sqrt(vF.squaredNorm() + psi2);
            double dlPred = ds / denom;
            if (havePrev) {
                const double dir = vF.dot(duPrev) + psi2 * dlPrev;
                if (dir < 0) dlPred = -dlPred;
            }
            Eigen::VectorXd du = dlPred * vF;
            double dl = dlPred;

            // corrector
            bool converged = false;
            bool failed = false;
            double rootCos = 1.0;
            int iters = 0;
            double rnorm = 0.0;
            const double ref0 = detail::newtonReference(sys, std::max(std::abs(lambda + dl), 1.0));
            for (int it = 0; it <= settings.newton.maxIterations; ++it) {
                Eigen::VectorXd r = sys.residual(u + du, lambda + dl);
                rnorm = r.norm();
                if (rnorm <= settings.newton.tolerance * ref0) {
                    converged = true;
                    iters = it;
                    break;
                }
                if (it == settings.newton.maxIterations) break;
                Eigen::SparseMatrix<double> Kc = sys.tangent(u + du, lambda + dl);
                Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> cholC(Kc);
                if (cholC.info() != Eigen::Success) {
                    failed = true;
                    break;
                }
                Eigen::VectorXd dur = cholC.solve(-r);
                Eigen::VectorXd duf = cholC.solve(sys.externalScaled);

                const double A = duf.squaredNorm() + psi2;
                const double B = 2.0 * duf.dot(du + dur) + 2.0 * psi2 * dl;
                const double C = (du + dur).squaredNorm() + psi2 * dl * dl - ds * ds;
                const double disc = B * B - 4.0 * A * C;
                if (disc < 0.0) {
                    failed = true;
                    break;
                }
                const double sq = std::sqrt(disc);
                // stable quadratic roots
                const double q = -0.5 * (B + (B >= 0 ? sq : -sq));
                const double r1 = q / A;
                const double r2 = (std::abs(q) > 0) ? C / q : r1;
                auto score = [&](double dlc) {
                    Eigen::VectorXd cand = du + dur + dlc * duf;
                    const double candDl = dl + dlc;
                    const double nrm = std::sqrt(cand.squaredNorm() + psi2 * candDl * candDl);
                    return (cand.dot(du) + psi2 * candDl * dl) / std::max(nrm * ds, 1e-300);
                };
                const double s1 = score(r1), s2 = score(r2);
                const double dlc = (s1 >= s2) ? r1 : r2;
                rootCos = std::max(s1, s2);
                du += dur + dlc * duf;
                dl += dlc;
            }

            if (!converged || failed) {
                ds *= 0.5;
                continue;
            }

            // limit point: sign change of the lambda increment; refine twice
            // with a smaller increment before recording the extremum
            if (settings.detectLimitPoints && havePrev && dlPrev > 0 && dl < 0 && !peakRecorded) {
                if (peakRefinements < 2 && ds > 8.0 * dsMin) {
                    ds *= 0.25;
                    ++peakRefinements;
                    continue; // reject the converged step and re-approach
                }
                path.limitLoads.push_back(std::max(lambdaPeak, lambda));
                peakRecorded = true;
            }

            ContinuationStep rec;
            rec.lambda = lambda + dl;
            rec.u = u + du;
            rec.residualNorm = rnorm;
            rec.constraintResidual =
                std::abs(du.squaredNorm() + psi2 * dl * dl - ds * ds) / (ds * ds);
            rec.rootCosine = rootCos;
            rec.increment = ds;
            rec.newtonIterations = iters;
            path.steps.push_back(rec);

            u += du;
            lambda += dl;
            lambdaPeak = std::max(lambdaPeak, lambda);
            duPrev = du;
            dlPrev = dl;
            havePrev = true;
            accepted = true;
            if (iters <= 4) ds *= 1.25;
        }

        if (peakRecorded && lambda < (1.0 - settings.stopLambdaDropFactor) * lambdaPeak) break;
    }
}

inline ContinuationPath arcLength(const NonlinearSystem& sys, const ArcLengthSettings& settings = {})
{
    ContinuationPath path;
    arcLength(sys, settings, path);
    return path;
}

} // namespace c1shell
