#ifndef PERFOMAG_IO_HPP
#define PERFOMAG_IO_HPP

#include <array>
#include <string>
#include <vector>

#include "perfomag/geometry.hpp"
#include "perfomag/macro.hpp"

namespace perfomag {

// Write-to-temp then atomic rename: the file is either fully written or
// absent.
void atomic_write(const std::string& path, const std::string& content);

// Legacy ASCII VTK STRUCTURED_POINTS with voxel-center point data.
struct VtkDataset {
    std::string title = "perfomag";
    std::array<int, 3> n = {1, 1, 1};
    double h = 1.0;
    std::array<double, 3> origin = {0.0, 0.0, 0.0};

    struct Scalar {
        std::string name;
        const std::vector<double>* values;
    };
    struct Vector {
        std::string name;
        std::array<const std::vector<double>*, 3> components;
    };
    std::vector<Scalar> scalars;
    std::vector<Vector> vectors;
};

std::string render_vtk(const VtkDataset& ds);

void write_vtk_cell_scalar(const std::string& path, const CellGrid& grid,
                           const std::vector<double>& values,
                           const std::string& name);

void write_vtk_snapshot(const std::string& path, const MacroGrid& grid,
                        const CoupledState& state);

std::string render_energy_csv(const std::vector<EnergyRecord>& records);
std::string render_solve_log_csv(const std::vector<SolveLogEntry>& entries);

std::string format_double(double v);  // %.17g, '.' decimal separator

}  // namespace perfomag

#endif
