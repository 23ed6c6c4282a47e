#ifndef PERFOMAG_GEOMETRY_HPP
#define PERFOMAG_GEOMETRY_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perfomag/smallmat.hpp"

namespace perfomag {

// Reference hole H inside the unit cell Y = (0,1)^dim. Sphere/box holes must
// be strictly contained in the open cell unless allow_boundary_touching is
// set (general periodic holes that need not be isolated).
struct HoleSpec {
    enum class Shape { none, sphere, box, voxel_mask };

    Shape shape = Shape::none;
    Vec3 center{};                 // sphere
    double radius = 0.0;           // sphere
    Vec3 lo{}, hi{};               // box
    std::string mask_path;         // voxel_mask (PMSK file)
    bool allow_boundary_touching = false;

    static HoleSpec none() { return HoleSpec{}; }
    static HoleSpec sphere(Vec3 c, double r, bool allow_touching = false) {
        HoleSpec h;
        h.shape = Shape::sphere;
        h.center = c;
        h.radius = r;
        h.allow_boundary_touching = allow_touching;
        return h;
    }
    static HoleSpec box(Vec3 lo, Vec3 hi, bool allow_touching = false) {
        HoleSpec h;
        h.shape = Shape::box;
        h.lo = lo;
        h.hi = hi;
        h.allow_boundary_touching = allow_touching;
        return h;
    }
    static HoleSpec voxel_mask(std::string path, bool allow_touching = false) {
        HoleSpec h;
        h.shape = Shape::voxel_mask;
        h.mask_path = std::move(path);
        h.allow_boundary_touching = allow_touching;
        return h;
    }

    // Point-in-hole test for analytic shapes, y in [0,1)^dim.
    bool contains(const Vec3& y, int dim) const;

    // Smallest axis-aligned extent of the hole (unit-cell units); used by the
    // perforation resolution check. Returns 0 for shape none.
    double min_extent(int dim) const;
};

// Voxelized periodic unit cell: n voxels per side, mask true = material
// (chi_{Y*}). A voxel belongs to the hole iff its center lies inside H.
// Storage is row-major with x fastest, 1-periodic in every axis.
struct CellGrid {
    int n = 0;
    int dim = 3;
    double h = 0.0;  // 1/n
    std::vector<uint8_t> mask;

    std::size_t size() const { return mask.size(); }
    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>((k * n + j) * n + i);
    }
    bool material(int i, int j, int k) const { return mask[index(i, j, k)] != 0; }
    Vec3 voxel_center(int i, int j, int k) const {
        return {(i + 0.5) * h, (j + 0.5) * h, dim == 3 ? (k + 0.5) * h : 0.0};
    }
    // Nearest-voxel hole lookup, y wrapped into [0,1)^dim.
    bool material_at(const Vec3& y) const;
    std::size_t material_count() const;
};

// Macroscopic grid on the box Omega = prod (0, L_i). When epsilon is present
// the mask realizes the periodic perforation Omega^eps (holes only from
// cells eps(k+Y) fully inside Omega); otherwise the mask is all-true.
struct MacroGrid {
    std::array<double, 3> box_len = {1.0, 1.0, 1.0};
    std::array<int, 3> n = {1, 1, 1};
    int dim = 3;
    double h = 0.0;  // voxel size, identical in every axis
    std::optional<double> epsilon;
    std::vector<uint8_t> mask;
    int pad = 0;  // far-field padding layers for the magnetostatic box

    std::size_t size() const { return mask.size(); }
    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>((k * n[1] + j) * n[0] + i);
    }
    bool material(int i, int j, int k) const { return mask[index(i, j, k)] != 0; }
    Vec3 voxel_center(int i, int j, int k) const {
        return {(i + 0.5) * h, (j + 0.5) * h, dim == 3 ? (k + 0.5) * h : 0.0};
    }
    std::size_t material_count() const;
    double material_fraction() const;
    double volume() const {
        double v = box_len[0] * box_len[1];
        return dim == 3 ? v * box_len[2] : v;
    }
};

// x/eps = N + R exactly, R in [0,1)^3.
struct LatticePoint {
    std::array<std::int64_t, 3> N{};
    Vec3 R{};
};

CellGrid build_cell_grid(int n, int dim, const HoleSpec& hole);

// chi_bar = material voxel fraction, in (0, 1].
double porosity(const CellGrid& grid);

LatticePoint lattice_decompose(const Vec3& x, double eps);

// eps*N(x/eps) + eps*y; |unfold(x,y,eps) - x| <= eps*sqrt(3).
Vec3 unfold(const Vec3& x, const Vec3& y, double eps);

// Perforated macro grid. The cell grid is required for voxel_mask holes and
// otherwise optional (analytic holes are evaluated directly at remainders).
MacroGrid build_perforated_macro(const std::array<double, 3>& box_len,
                                 const std::array<int, 3>& n_macro, int dim,
                                 double eps, const HoleSpec& hole,
                                 const CellGrid* cell = nullptr);

// Unperforated macro grid (mask all true).
MacroGrid build_macro(const std::array<double, 3>& box_len,
                      const std::array<int, 3>& n_macro, int dim, int pad);

// Raw binary voxel mask import/export. Header: magic "PMSK", u32 dim,
// u32 n per axis x3, little-endian; then n^dim bytes, 1 = material,
// row-major with x fastest.
void write_mask(const std::string& path, const CellGrid& grid);
CellGrid read_mask(const std::string& path);

}  // namespace perfomag

#endif
