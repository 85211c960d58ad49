/** @file driver.hpp
    @brief Benchmark driver: builds a case, runs the requested analysis over a
           list of meshes and emits the CSV / VTK result files.
*/
#pragma once

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "c1shell/benchmarks.hpp"
#include "c1shell/io.hpp"
#include "c1shell/solvers.hpp"

namespace c1shell {

struct RunConfig {
    std::string caseName;
    int degree = 4;
    int regularity = -1; ///< default: p - 2
    std::vector<int> elements = {4}; ///< per-direction element counts, one per level
    std::string analysis = "linear"; ///< linear | newton | arclength
    NewtonSettings newton;
    ArcLengthSettings arc;
    std::string outputDir = ".";
    bool writeStress = false;
    int vizSamples = 17;
    double penaltyScale = 1e4;

    int effectiveRegularity() const { return regularity >= 0 ? regularity : degree - 2; }
};

struct RunResult {
    std::vector<ConvergenceRow> convergence;
    std::vector<PathRow> path;
    std::vector<double> limitLoads;
    std::vector<std::string> files;
};

namespace detail {

inline Eigen::Vector3d monitorDisplacement(const C1Space& space, const Eigen::VectorXd& u,
                                           const BenchmarkCase::Monitor& mon)
{
    std::vector<std::pair<int, double>> phi;
    evalActiveFunctions(space, mon.patch, mon.x1, mon.x2, phi);
    Eigen::Vector3d d = Eigen::Vector3d::Zero();
    for (const auto& [i, v] : phi)
        for (int c = 0; c < 3; ++c) d(c) += u(3 * i + c) * v;
    return d;
}

inline VtkField sampleStress(const ShellAssembler& assembler, const ShellState& state, int samples,
                             double stressToMPa)
{
    VtkField field;
    const auto& surf = assembler.space().surface();
    for (int ip = 0; ip < surf.numPatches(); ++ip) {
        const int base = static_cast<int>(field.points.size());
        for (int i = 0; i < samples; ++i)
            for (int j = 0; j < samples; ++j) {
                const double x1 = static_cast<double>(i) / (samples - 1);
                const double x2 = static_cast<double>(j) / (samples - 1);
                Eigen::Vector3d p = surf.patch(ip).eval(x1, x2, 0).point;
                Eigen::Vector3d up;
                Eigen::Matrix<double, 3, 2> du;
                Eigen::Matrix<double, 3, 3> ddu;
                state.dispDerivatives(ip, x1, x2, up, du, ddu);
                field.points.push_back(p + up);
                // the paper's contour plots are in MPa
                const double vm = assembler.vonMisesMembrane(state, ip, x1, x2);
                field.scalars.push_back(vm * stressToMPa);
            }
        for (int i = 0; i + 1 < samples; ++i)
            for (int j = 0; j + 1 < samples; ++j)
                field.quads.push_back({base + i * samples + j, base + (i + 1) * samples + j,
                                       base + (i + 1) * samples + j + 1, base + i * samples + j + 1});
    }
    return field;
}

inline void checkFinite(double v, const std::string& what)
{
    C1SHELL_REQUIRE(std::isfinite(v), Error, "run: non-finite " + what + " in results");
}

} // namespace detail

inline void harvestPath(const C1Space& space, const BenchmarkCase& bench,
                        const ContinuationPath& cpath, RunResult& result)
{
    result.path.clear();
    for (size_t i = 0; i < cpath.steps.size(); ++i) {
        Eigen::Vector3d d = detail::monitorDisplacement(space, cpath.steps[i].u, bench.monitor);
        detail::checkFinite(d(0), "monitor displacement");
        result.path.push_back({static_cast<int>(i), cpath.steps[i].lambda, d(0), d(2)});
    }
}

inline void writePathFile(const std::string& stem, RunResult& result)
{
    const std::string path = stem + "-path.csv";
    std::ofstream out(path);
    writePathCsv(result.path, out);
    result.files.push_back(path);
}

inline RunResult run(const RunConfig& config)
{
    C1SHELL_REQUIRE(!config.elements.empty(), InputError, "run: no mesh levels requested");
    BenchmarkCase bench = makeCase(config.caseName);
    bench.bcs.penaltyScale = config.penaltyScale;
    RunResult result;
    std::filesystem::create_directories(config.outputDir);
    const std::string stem = config.outputDir + "/" + config.caseName + "-p" +
                             std::to_string(config.degree) + "-" + config.analysis;

    const int p = config.degree, r = config.effectiveRegularity();

    for (size_t level = 0; level < config.elements.size(); ++level) {
        const int k = config.elements[level];
        C1Space space(bench.surface, bench.topology, p, r, k);
        ShellAssembler assembler(space, bench.material, bench.loads, bench.bcs);

        if (config.analysis == "linear" || config.analysis == "newton") {
            Eigen::SparseMatrix<double> K = assembler.linearStiffness();
            Eigen::VectorXd F = assembler.externalScaled() + assembler.externalConst();
            Eigen::VectorXd u;
            if (config.analysis == "linear") {
                u = solveLinear(K, F);
            } else {
                NonlinearSystem sys = makeSystem(assembler);
                u = newton(sys, Eigen::VectorXd::Zero(sys.ndof), 1.0, config.newton).u;
            }
            Eigen::Vector3d d = detail::monitorDisplacement(space, u, bench.monitor);
            ConvergenceRow row;
            row.level = static_cast<int>(level);
            row.dofs = 3 * space.dim();
            row.wA = d(2);
            row.strainEnergy = ShellAssembler::strainEnergy(K, u);
            detail::checkFinite(row.wA, "w_A");
            detail::checkFinite(row.strainEnergy, "strain energy");
            result.convergence.push_back(row);

            if (config.writeStress && level + 1 == config.elements.size()) {
                ShellState state(space);
                state.setDisplacement(u);
                VtkField field = detail::sampleStress(assembler, state, config.vizSamples, bench.stressToMPa);
                const std::string path = stem + "-stress.vtk";
                std::ofstream out(path);
                writeVtkPolydata(field, out);
                result.files.push_back(path);
            }
        } else if (config.analysis == "arclength") {
            NonlinearSystem sys = makeSystem(assembler);
            ContinuationPath cpath;
            try {
                arcLength(sys, config.arc, cpath);
            } catch (const NonConvergenceError&) {
                harvestPath(space, bench, cpath, result);
                writePathFile(stem, result);
                throw; // partial results are already on disk
            }
            harvestPath(space, bench, cpath, result);
            result.limitLoads = cpath.limitLoads;
        } else {
            throw InputError("run: unknown analysis '" + config.analysis + "'");
        }
    }

    if (!result.convergence.empty()) {
        const std::string path = stem + "-converge.csv";
        std::ofstream out(path);
        writeConvergenceCsv(result.convergence, out);
        result.files.push_back(path);
    }
    if (!result.path.empty()) writePathFile(stem, result);
    return result;
}

} // namespace c1shell
