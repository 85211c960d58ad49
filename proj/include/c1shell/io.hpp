/** @file io.hpp
    @brief Text formats: the multi-patch geometry file, CSV result tables and
           VTK legacy POLYDATA stress exports.

    Numbers are written with 17 significant digits, so geometry files
    round-trip bitwise.
*/
#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "c1shell/multipatch.hpp"

namespace c1shell {

namespace detail {

inline std::string fmt17(double v)
{
    C1SHELL_REQUIRE(std::isfinite(v), Error, "io: refusing to write a non-finite number");
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class LineReader {
public:
    explicit LineReader(std::istream& in, const std::string& name) : in_(in), name_(name) {}

    /// Next non-empty line; throws a parse error naming the expectation.
    std::istringstream next(const std::string& expectation)
    {
        std::string line;
        while (std::getline(in_, line)) {
            ++lineNo_;
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            return std::istringstream(line);
        }
        fail("unexpected end of file, expected " + expectation);
        return std::istringstream("");
    }

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw InputError(name_ + ":" + std::to_string(lineNo_) + ": " + msg);
    }

    int lineNo() const { return lineNo_; }

private:
    std::istream& in_;
    std::string name_;
    int lineNo_ = 0;
};

} // namespace detail

inline void writeGeometry(const MultiPatchSurface& surface, std::ostream& out)
{
    out << "c1shell geometry 1\n";
    out << "patches " << surface.numPatches() << "\n";
    for (int ip = 0; ip < surface.numPatches(); ++ip) {
        const TensorPatch& p = surface.patch(ip);
        out << "patch " << ip << "\n";
        out << "degree " << p.space().basis(0).degree() << " " << p.space().basis(1).degree() << "\n";
        for (int dir = 0; dir < 2; ++dir) {
            const auto& kn = p.space().basis(dir).knots();
            out << "knots" << (dir + 1) << " " << kn.size();
            for (double k : kn) out << " " << detail::fmt17(k);
            out << "\n";
        }
        out << "dim " << p.dim() << "\n";
        const int n1 = p.space().dim1(), n2 = p.space().dim2();
        out << "coefs " << n1 << " " << n2 << "\n";
        for (int j1 = 0; j1 < n1; ++j1)
            for (int j2 = 0; j2 < n2; ++j2) {
                for (int c = 0; c < p.dim(); ++c)
                    out << (c ? " " : "") << detail::fmt17(p.coefs(c)(j1, j2));
                out << "\n";
            }
    }
}

inline void writeGeometry(const MultiPatchSurface& surface, const std::string& path)
{
    std::ofstream out(path);
    C1SHELL_REQUIRE(out.good(), InputError, "writeGeometry: cannot open " + path);
    writeGeometry(surface, out);
}

inline MultiPatchSurface parseGeometry(std::istream& in, const std::string& name = "<geometry>")
{
    detail::LineReader rd(in, name);

    auto header = rd.next("header");
    std::string a, b;
    int version = 0;
    header >> a >> b >> version;
    if (a != "c1shell" || b != "geometry" || version != 1) rd.fail("bad header, expected 'c1shell geometry 1'");

    int numPatches = 0;
    {
        auto line = rd.next("'patches <count>'");
        std::string kw;
        line >> kw >> numPatches;
        if (kw != "patches" || numPatches <= 0) rd.fail("expected 'patches <count>'");
    }

    std::vector<TensorPatch> patches;
    for (int ip = 0; ip < numPatches; ++ip) {
        {
            auto line = rd.next("'patch <index>'");
            std::string kw;
            int idx = -1;
            line >> kw >> idx;
            if (kw != "patch" || idx != ip) rd.fail("expected 'patch " + std::to_string(ip) + "'");
        }
        int p1 = 0, p2 = 0;
        {
            auto line = rd.next("'degree <p1> <p2>'");
            std::string kw;
            line >> kw >> p1 >> p2;
            if (kw != "degree" || p1 < 1 || p1 != p2) rd.fail("expected equal degrees >= 1");
        }
        std::vector<std::vector<double>> knots(2);
        for (int dir = 0; dir < 2; ++dir) {
            auto line = rd.next("'knots" + std::to_string(dir + 1) + " <count> <values>'");
            std::string kw;
            size_t count = 0;
            line >> kw >> count;
            if (kw != "knots" + std::to_string(dir + 1) || count < 2 * (p1 + 1u))
                rd.fail("expected 'knots" + std::to_string(dir + 1) + " <count> <values>'");
            knots[dir].resize(count);
            for (size_t i = 0; i < count; ++i)
                if (!(line >> knots[dir][i])) rd.fail("knot vector shorter than its count");
        }
        int dim = 0;
        {
            auto line = rd.next("'dim <d>'");
            std::string kw;
            line >> kw >> dim;
            if (kw != "dim" || dim < 2 || dim > 3) rd.fail("expected 'dim 2' or 'dim 3'");
        }
        int n1 = 0, n2 = 0;
        {
            auto line = rd.next("'coefs <n1> <n2>'");
            std::string kw;
            line >> kw >> n1 >> n2;
            if (kw != "coefs" || n1 < p1 + 1 || n2 < p1 + 1) rd.fail("expected 'coefs <n1> <n2>'");
        }

        // reconstruct the open uniform space and verify the stored knots
        const int mult = [&] {
            // n = p + (k-1)(p-r) + 1  =>  (k-1)(p-r) = n - p - 1
            const int interior = static_cast<int>(knots[0].size()) - 2 * (p1 + 1);
            if (interior == 0) return p1; // single element: any multiplicity works
            // deduce multiplicity from the first run of equal interior knots
            int m = 1;
            for (int i = p1 + 2; i < static_cast<int>(knots[0].size()) - p1 - 1 &&
                                 std::abs(knots[0][i] - knots[0][p1 + 1]) <= 1e-12;
                 ++i)
                ++m;
            return m;
        }();
        const int interior = static_cast<int>(knots[0].size()) - 2 * (p1 + 1);
        if (mult == 0 || (interior % std::max(mult, 1)) != 0) rd.fail("knot vector is not open uniform");
        const int k = interior / std::max(mult, 1) + 1;
        const int r = p1 - mult;
        TensorSplineSpace space(p1, (interior == 0) ? p1 - 1 : r, k);
        for (int dir = 0; dir < 2; ++dir) {
            const auto& expect = space.basis(dir).knots();
            if (expect.size() != knots[dir].size()) rd.fail("knot vector is not open uniform on [0,1]");
            for (size_t i = 0; i < expect.size(); ++i)
                if (std::abs(expect[i] - knots[dir][i]) > 1e-12)
                    rd.fail("knot vector is not open uniform on [0,1]");
        }
        if (n1 != space.dim1() || n2 != space.dim2())
            rd.fail("control net size does not match the knot vectors");

        std::vector<Eigen::MatrixXd> C(dim, Eigen::MatrixXd(n1, n2));
        for (int j1 = 0; j1 < n1; ++j1)
            for (int j2 = 0; j2 < n2; ++j2) {
                auto line = rd.next("control point row");
                for (int c = 0; c < dim; ++c) {
                    double v;
                    if (!(line >> v)) rd.fail("control point row needs " + std::to_string(dim) + " values");
                    if (!std::isfinite(v)) rd.fail("non-finite control value");
                    C[c](j1, j2) = v;
                }
            }
        patches.emplace_back(space, std::move(C));
    }
    return MultiPatchSurface(std::move(patches));
}

inline MultiPatchSurface parseGeometry(const std::string& path)
{
    std::ifstream in(path);
    C1SHELL_REQUIRE(in.good(), InputError, "parseGeometry: cannot open " + path);
    return parseGeometry(in, path);
}

// ---------------------------------------------------------------------------
// CSV tables
// ---------------------------------------------------------------------------

struct ConvergenceRow {
    int level;
    int dofs;
    double wA;
    double strainEnergy;
};

inline void writeConvergenceCsv(const std::vector<ConvergenceRow>& rows, std::ostream& out)
{
    out << "# c1shell-csv converge v1\n";
    out << "level,dofs,w_A,B\n";
    for (const auto& r : rows)
        out << r.level << "," << r.dofs << "," << detail::fmt17(r.wA) << ","
            << detail::fmt17(r.strainEnergy) << "\n";
}

struct PathRow {
    int step;
    double lambda;
    double uMonitor;
    double wMonitor;
};

inline void writePathCsv(const std::vector<PathRow>& rows, std::ostream& out)
{
    out << "# c1shell-csv path v1\n";
    out << "step,lambda,u_monitor,w_monitor\n";
    for (const auto& r : rows)
        out << r.step << "," << detail::fmt17(r.lambda) << "," << detail::fmt17(r.uMonitor) << ","
            << detail::fmt17(r.wMonitor) << "\n";
}

// ---------------------------------------------------------------------------
// VTK legacy POLYDATA
// ---------------------------------------------------------------------------

/// Quad-mesh sampling of a multi-patch surface with one scalar per vertex.
struct VtkField {
    std::vector<Eigen::Vector3d> points;
    std::vector<std::array<int, 4>> quads;
    std::vector<double> scalars;
    std::string scalarName = "von_mises_membrane_MPa";
};

inline void writeVtkPolydata(const VtkField& field, std::ostream& out)
{
    out << "# vtk DataFile Version 3.0\n";
    out << "c1shell surface field\n";
    out << "ASCII\n";
    out << "DATASET POLYDATA\n";
    out << "POINTS " << field.points.size() << " double\n";
    for (const auto& p : field.points)
        out << detail::fmt17(p(0)) << " " << detail::fmt17(p(1)) << " " << detail::fmt17(p(2)) << "\n";
    out << "POLYGONS " << field.quads.size() << " " << 5 * field.quads.size() << "\n";
    for (const auto& q : field.quads) out << "4 " << q[0] << " " << q[1] << " " << q[2] << " " << q[3] << "\n";
    out << "POINT_DATA " << field.points.size() << "\n";
    out << "SCALARS " << field.scalarName << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (double s : field.scalars) out << detail::fmt17(s) << "\n";
}

} // namespace c1shell
