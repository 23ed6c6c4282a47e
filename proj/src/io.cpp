#include "perfomag/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace perfomag {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f.write(content.data(),
                static_cast<std::streamsize>(content.size()));
        if (!f) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string render_vtk(const VtkDataset& ds) {
    std::ostringstream os;
    const std::size_t npoints = static_cast<std::size_t>(ds.n[0]) * ds.n[1] *
                                ds.n[2];
    os << "# vtk DataFile Version 3.0\n"
       << ds.title << "\nASCII\nDATASET STRUCTURED_POINTS\n"
       << "DIMENSIONS " << ds.n[0] << ' ' << ds.n[1] << ' ' << ds.n[2] << '\n'
       << "ORIGIN " << format_double(ds.origin[0]) << ' '
       << format_double(ds.origin[1]) << ' ' << format_double(ds.origin[2])
       << '\n'
       << "SPACING " << format_double(ds.h) << ' ' << format_double(ds.h)
       << ' ' << format_double(ds.h) << '\n'
       << "POINT_DATA " << npoints << '\n';
    for (const auto& s : ds.scalars) {
        if (s.values->size() != npoints)
            throw std::runtime_error("vtk: scalar field size mismatch");
        os << "SCALARS " << s.name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : *s.values) os << format_double(v) << '\n';
    }
    for (const auto& vec : ds.vectors) {
        os << "VECTORS " << vec.name << " double\n";
        for (std::size_t i = 0; i < npoints; ++i) {
            for (int c = 0; c < 3; ++c) {
                const auto* comp = vec.components[c];
                if (comp && comp->size() != npoints)
                    throw std::runtime_error("vtk: vector field size mismatch");
                os << (c ? " " : "") << format_double(comp ? (*comp)[i] : 0.0);
            }
            os << '\n';
        }
    }
    return os.str();
}

void write_vtk_cell_scalar(const std::string& path, const CellGrid& grid,
                           const std::vector<double>& values,
                           const std::string& name) {
    VtkDataset ds;
    ds.title = name;
    ds.n = {grid.n, grid.n, grid.dim == 3 ? grid.n : 1};
    ds.h = grid.h;
    ds.origin = {0.5 * grid.h, 0.5 * grid.h,
                 grid.dim == 3 ? 0.5 * grid.h : 0.0};
    ds.scalars.push_back({name, &values});
    atomic_write(path, render_vtk(ds));
}

void write_vtk_snapshot(const std::string& path, const MacroGrid& grid,
                        const CoupledState& state) {
    VtkDataset ds;
    ds.title = "snapshot t=" + format_double(state.t);
    ds.n = {grid.n[0], grid.n[1], grid.dim == 3 ? grid.n[2] : 1};
    ds.h = grid.h;
    ds.origin = {0.5 * grid.h, 0.5 * grid.h,
                 grid.dim == 3 ? 0.5 * grid.h : 0.0};
    ds.scalars.push_back({"theta", &state.theta});
    // phi lives on the padded box; restrict to the domain voxels
    std::vector<double> phi_domain(grid.size(), 0.0);
    const int pad = grid.pad;
    const int pz = grid.dim == 3 ? pad : 0;
    if (!state.phi.empty()) {
        const std::array<int, 3> fn = {grid.n[0] + 2 * pad,
                                       grid.n[1] + 2 * pad,
                                       grid.dim == 3 ? grid.n[2] + 2 * pz : 1};
        const int nz = grid.dim == 3 ? grid.n[2] : 1;
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j < grid.n[1]; ++j)
                for (int i = 0; i < grid.n[0]; ++i) {
                    std::size_t fv = static_cast<std::size_t>(
                        ((k + pz) * fn[1] + (j + pad)) * fn[0] + (i + pad));
                    if (fv < state.phi.size())
                        phi_domain[grid.index(i, j, k)] = state.phi[fv];
                }
    }
    ds.scalars.push_back({"phi", &phi_domain});
    ds.vectors.push_back(
        {"m", {&state.m[0], &state.m[1], &state.m[2]}});
    atomic_write(path, render_vtk(ds));
}

std::string render_energy_csv(const std::vector<EnergyRecord>& records) {
    std::ostringstream os;
    os << "t,grad,quartic,thermal,field,total\n";
    for (const auto& e : records)
        os << format_double(e.t) << ',' << format_double(e.grad) << ','
           << format_double(e.quartic) << ',' << format_double(e.thermal)
           << ',' << format_double(e.field) << ',' << format_double(e.total)
           << '\n';
    return os.str();
}

std::string render_solve_log_csv(const std::vector<SolveLogEntry>& entries) {
    std::ostringstream os;
    os << "context,step,iterations,rel_residual,converged\n";
    for (const auto& e : entries)
        os << e.context << ',' << e.step << ',' << e.iterations << ','
           << format_double(e.rel_residual) << ',' << (e.converged ? 1 : 0)
           << '\n';
    return os.str();
}

}  // namespace perfomag
