// Command-line driver: benchmark solves, convergence studies, arc-length
// paths, AS-G1 verification, basis diagnostics and geometry export.
//
// Exit codes: 0 success, 2 nonconvergence, 3 input error.

#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <c1shell/c1space.hpp>
#include <c1shell/driver.hpp>
#include <c1shell/io.hpp>

using namespace c1shell;

namespace {

struct CommonOptions {
    std::string caseName;
    std::string geometryPath;
    RunConfig config;
};

void addDiscretisation(CLI::App* cmd, RunConfig& config)
{
    cmd->add_option("-p,--degree", config.degree, "spline degree of the smooth space (>= 3)");
    cmd->add_option("-r,--regularity", config.regularity, "interior regularity (default p-2)");
    cmd->add_option("-k,--elements", config.elements, "elements per direction, one value per level");
    cmd->add_option("-o,--out", config.outputDir, "output directory");
    cmd->add_option("--penalty-scale", config.penaltyScale, "weak boundary-condition scale");
}

void applyConfigFile(const std::string& path, RunConfig& config)
{
    std::ifstream in(path);
    if (!in.good()) throw InputError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw InputError("config file " + path + ": " + e.what());
    }
    if (j.contains("case")) config.caseName = j["case"].get<std::string>();
    if (j.contains("degree")) config.degree = j["degree"].get<int>();
    if (j.contains("regularity")) config.regularity = j["regularity"].get<int>();
    if (j.contains("elements")) config.elements = j["elements"].get<std::vector<int>>();
    if (j.contains("analysis")) config.analysis = j["analysis"].get<std::string>();
    if (j.contains("out")) config.outputDir = j["out"].get<std::string>();
    if (j.contains("penalty_scale")) config.penaltyScale = j["penalty_scale"].get<double>();
    if (j.contains("increment")) config.arc.increment = j["increment"].get<double>();
    if (j.contains("psi")) config.arc.psi = j["psi"].get<double>();
    if (j.contains("max_steps")) config.arc.maxSteps = j["max_steps"].get<int>();
}

MultiPatchSurface loadSurface(const std::string& caseName, const std::string& geometryPath,
                              Topology& topo)
{
    if (!geometryPath.empty()) {
        MultiPatchSurface surf = parseGeometry(geometryPath);
        topo = buildTopology(surf);
        return surf;
    }
    if (caseName.empty()) throw InputError("either --case or --geometry is required");
    BenchmarkCase c = makeCase(caseName);
    topo = c.topology;
    return c.surface;
}

int runVerifyG1(const std::string& caseName, const std::string& geometryPath, double tol)
{
    Topology topo;
    MultiPatchSurface surf = loadSurface(caseName, geometryPath, topo);
    auto reports = verifyASG1(surf, topo);
    std::printf("%-6s %-12s %-10s %-8s %s\n", "edge", "type", "residual", "alpha>0", "linear");
    bool ok = true;
    for (const auto& r : reports) {
        ok = ok && r.pass(tol);
        std::printf("%-6d %-12s %-10.3e %-8s %s\n", r.edge,
                    topo.isInterface(r.edge) ? "interface" : "boundary", r.maxResidual,
                    r.alphaPositive ? "yes" : "no", r.linearFound ? "yes" : "no");
    }
    std::printf("AS-G1: %s (tol %.1e)\n", ok ? "PASS" : "FAIL", tol);
    return ok ? 0 : 1;
}

int runBasisCheck(const std::string& caseName, const std::string& geometryPath, const RunConfig& config)
{
    Topology topo;
    MultiPatchSurface surf = loadSurface(caseName, geometryPath, topo);
    C1Space space(surf, topo, config.degree, config.effectiveRegularity(), config.elements.front());
    std::printf("dimension: %d (formula %d)\n", space.dim(), space.expectedDimension());

    TensorSplineSpace aspace(config.degree, config.effectiveRegularity(), config.elements.front());
    auto grad = [&](const TensorPatch& geo, const ScalarSplineFunction& fn2, double a, double b) {
        PatchEval pe = geo.eval(a, b, 1);
        Eigen::Matrix2d am = pe.jac.transpose() * pe.jac;
        Eigen::Vector2d df(fn2.eval(a, b, 1, 0), fn2.eval(a, b, 0, 1));
        Eigen::Vector2d co = am.inverse() * df;
        return Eigen::Vector3d(co(0) * pe.jac.col(0) + co(1) * pe.jac.col(1));
    };
    double worstV = 0.0, worstG = 0.0;
    for (int e = 0; e < topo.numInterfaces(); ++e) {
        const EdgeFrame& fr = space.edgeFrame(e);
        for (int f = 0; f < space.dim(); ++f) {
            const auto& fn = space.functions()[f];
            bool touches = false;
            for (int sp : fn.supportPatches) touches = touches || sp == fr.patch1 || sp == fr.patch2;
            if (!touches) continue;
            ScalarSplineFunction f1{aspace, space.functionTable(f, fr.patch1)};
            ScalarSplineFunction f2{aspace, space.functionTable(f, fr.patch2)};
            for (int t = 0; t <= 25; ++t) {
                const double s = t / 25.0;
                auto o1 = fr.sym1.apply(0.0, s);
                auto o2 = fr.sym2.apply(s, 0.0);
                worstV = std::max(worstV, std::abs(f1.eval(o1[0], o1[1]) - f2.eval(o2[0], o2[1])));
                Eigen::Vector3d g1 = grad(surf.patch(fr.patch1), f1, o1[0], o1[1]);
                Eigen::Vector3d g2 = grad(surf.patch(fr.patch2), f2, o2[0], o2[1]);
                worstG = std::max(worstG, (g1 - g2).norm() / std::max(1.0, g1.norm()));
            }
        }
    }
    std::printf("worst two-sided value mismatch:    %.3e\n", worstV);
    std::printf("worst two-sided gradient mismatch: %.3e (relative)\n", worstG);
    const bool ok = space.dim() == space.expectedDimension() && worstV <= 1e-9 && worstG <= 1e-9;
    std::printf("basis check: %s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Kirchhoff-Love shell analysis on C1-smooth multi-patch spline spaces"};
    app.require_subcommand(1);

    CommonOptions opt;
    double g1tol = 1e-10;
    std::string jsonConfig;
    std::string exportOut = "geometry.txt";

    auto* solve = app.add_subcommand("solve", "single linear or Newton solve of a benchmark case");
    solve->add_option("-c,--case", opt.config.caseName, "benchmark case name")->required();
    solve->add_option("-a,--analysis", opt.config.analysis, "linear | newton");
    solve->add_flag("--stress", opt.config.writeStress, "write the von Mises stress field (VTK)");
    solve->add_option("--viz-samples", opt.config.vizSamples, "stress sampling grid per patch");
    addDiscretisation(solve, opt.config);

    auto* converge = app.add_subcommand("converge", "h-refinement convergence study (CSV)");
    converge->add_option("-c,--case", opt.config.caseName, "benchmark case name")->required();
    addDiscretisation(converge, opt.config);

    auto* pathCmd = app.add_subcommand("path", "arc-length continuation (CSV)");
    pathCmd->add_option("-c,--case", opt.config.caseName, "benchmark case name")->required();
    pathCmd->add_option("--increment", opt.config.arc.increment, "arc-length increment (0: auto)");
    pathCmd->add_option("--psi", opt.config.arc.psi, "load-scaling weight");
    pathCmd->add_option("--max-steps", opt.config.arc.maxSteps, "maximum continuation steps");
    pathCmd->add_option("--dlambda0", opt.config.arc.initialDLambda, "initial load increment");
    addDiscretisation(pathCmd, opt.config);

    for (auto* cmd : {solve, converge, pathCmd})
        cmd->add_option("--json-config", jsonConfig, "JSON config file (flags override)");

    auto* verify = app.add_subcommand("verify-g1", "AS-G1 report for a case or geometry file");
    verify->add_option("-c,--case", opt.caseName, "benchmark case name");
    verify->add_option("-g,--geometry", opt.geometryPath, "geometry file");
    verify->add_option("--tol", g1tol, "acceptance tolerance");

    auto* basis = app.add_subcommand("basis-check", "smooth-basis diagnostics");
    basis->add_option("-c,--case", opt.caseName, "benchmark case name");
    basis->add_option("-g,--geometry", opt.geometryPath, "geometry file");
    addDiscretisation(basis, opt.config);

    auto* exportCmd = app.add_subcommand("export-geometry", "write a factory geometry file");
    exportCmd->add_option("-c,--case", opt.caseName, "benchmark case name")->required();
    exportCmd->add_option("-o,--out", exportOut, "output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed() || converge->parsed() || pathCmd->parsed()) {
            if (!jsonConfig.empty()) {
                // file values fill in, already-given flags keep their values
                RunConfig merged = opt.config;
                applyConfigFile(jsonConfig, merged);
                CLI::App* active = solve->parsed() ? solve : (converge->parsed() ? converge : pathCmd);
                if (active->count("--degree")) merged.degree = opt.config.degree;
                if (active->count("--regularity")) merged.regularity = opt.config.regularity;
                if (active->count("--elements")) merged.elements = opt.config.elements;
                if (active->count("--out")) merged.outputDir = opt.config.outputDir;
                merged.caseName = opt.config.caseName;
                merged.analysis = opt.config.analysis;
                merged.writeStress = opt.config.writeStress;
                opt.config = merged;
            }
            if (pathCmd->parsed()) opt.config.analysis = "arclength";
            RunResult res = run(opt.config);
            for (const auto& row : res.convergence)
                std::printf("level %d  dofs %d  w_A % .10e  B % .10e\n", row.level, row.dofs, row.wA,
                            row.strainEnergy);
            for (const auto& f : res.files) std::printf("wrote %s\n", f.c_str());
            if (!res.path.empty())
                std::printf("path: %zu steps, final lambda %.6f\n", res.path.size(),
                            res.path.back().lambda);
            for (double l : res.limitLoads) std::printf("limit point near lambda = %.6f\n", l);
            return 0;
        }
        if (verify->parsed()) return runVerifyG1(opt.caseName, opt.geometryPath, g1tol);
        if (basis->parsed()) return runBasisCheck(opt.caseName, opt.geometryPath, opt.config);
        if (exportCmd->parsed()) {
            BenchmarkCase c = makeCase(opt.caseName);
            writeGeometry(c.surface, exportOut);
            std::printf("wrote %s\n", exportOut.c_str());
            return 0;
        }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const NonConvergenceError& e) {
        std::cerr << "nonconvergence: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
