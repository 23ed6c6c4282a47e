#include "perfomag/geometry.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace perfomag {

namespace {

double wrap_unit(double y) {
    double w = y - std::floor(y);
    if (w >= 1.0) w = 0.0;  // guard against -1e-17 rounding up
    return w;
}

void validate_hole(const HoleSpec& hole, int dim) {
    const double tol = 1e-12;
    switch (hole.shape) {
        case HoleSpec::Shape::none:
            return;
        case HoleSpec::Shape::sphere: {
            if (hole.radius <= 0.0)
                throw std::runtime_error("hole sphere: radius must be > 0");
            if (hole.allow_boundary_touching) return;
            for (int a = 0; a < dim; ++a) {
                if (hole.center[a] - hole.radius <= tol ||
                    hole.center[a] + hole.radius >= 1.0 - tol)
                    throw std::runtime_error(
                        "hole sphere touches the cell boundary; set "
                        "allow_boundary_hole to accept non-isolated holes");
            }
            return;
        }
        case HoleSpec::Shape::box: {
            for (int a = 0; a < dim; ++a) {
                if (hole.lo[a] >= hole.hi[a])
                    throw std::runtime_error("hole box: lo must be < hi");
            }
            if (hole.allow_boundary_touching) return;
            for (int a = 0; a < dim; ++a) {
                if (hole.lo[a] <= tol || hole.hi[a] >= 1.0 - tol)
                    throw std::runtime_error(
                        "hole box touches the cell boundary; set "
                        "allow_boundary_hole to accept non-isolated holes");
            }
            return;
        }
        case HoleSpec::Shape::voxel_mask:
            return;  // validated against the loaded mask in build_cell_grid
    }
}

void check_mask_boundary_touching(const CellGrid& g) {
    auto hole_on_boundary = [&](int i, int j, int k) {
        if (g.material(i, j, k)) return false;
        if (i == 0 || i == g.n - 1 || j == 0 || j == g.n - 1) return true;
        if (g.dim == 3 && (k == 0 || k == g.n - 1)) return true;
        return false;
    };
    const int nk = g.dim == 3 ? g.n : 1;
    for (int k = 0; k < nk; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i)
                if (hole_on_boundary(i, j, k))
                    throw std::runtime_error(
                        "mask hole touches the cell boundary; set "
                        "allow_boundary_hole to accept non-isolated holes");
}

}  // namespace

bool HoleSpec::contains(const Vec3& y, int dim) const {
    switch (shape) {
        case Shape::none:
            return false;
        case Shape::sphere: {
            double d2 = 0.0;
            for (int a = 0; a < dim; ++a) {
                double d = y[a] - center[a];
                d2 += d * d;
            }
            return d2 < radius * radius;
        }
        case Shape::box: {
            for (int a = 0; a < dim; ++a)
                if (!(y[a] > lo[a] && y[a] < hi[a])) return false;
            return true;
        }
        case Shape::voxel_mask:
            throw std::logic_error(
                "voxel_mask holes require the cell grid for point queries");
    }
    return false;
}

double HoleSpec::min_extent(int dim) const {
    switch (shape) {
        case Shape::none:
            return 0.0;
        case Shape::sphere:
            return 2.0 * radius;
        case Shape::box: {
            double e = 1.0;
            for (int a = 0; a < dim; ++a) e = std::min(e, hi[a] - lo[a]);
            return e;
        }
        case Shape::voxel_mask:
            return 0.0;  // resolved from the mask by the caller
    }
    return 0.0;
}

bool CellGrid::material_at(const Vec3& y) const {
    int i = static_cast<int>(std::floor(wrap_unit(y.x) * n));
    int j = static_cast<int>(std::floor(wrap_unit(y.y) * n));
    int k = dim == 3 ? static_cast<int>(std::floor(wrap_unit(y.z) * n)) : 0;
    i = std::min(i, n - 1);
    j = std::min(j, n - 1);
    k = std::min(k, dim == 3 ? n - 1 : 0);
    return material(i, j, k);
}

std::size_t CellGrid::material_count() const {
    std::size_t c = 0;
    for (uint8_t m : mask) c += m;
    return c;
}

std::size_t MacroGrid::material_count() const {
    std::size_t c = 0;
    for (uint8_t m : mask) c += m;
    return c;
}

double MacroGrid::material_fraction() const {
    return static_cast<double>(material_count()) /
           static_cast<double>(mask.size());
}

CellGrid build_cell_grid(int n, int dim, const HoleSpec& hole) {
    if (n < 4) throw std::runtime_error("cell grid: n must be >= 4");
    if (dim != 2 && dim != 3)
        throw std::runtime_error("cell grid: dim must be 2 or 3");
    validate_hole(hole, dim);

    CellGrid g;
    g.n = n;
    g.dim = dim;
    g.h = 1.0 / n;

    if (hole.shape == HoleSpec::Shape::voxel_mask) {
        CellGrid loaded = read_mask(hole.mask_path);
        if (loaded.n != n || loaded.dim != dim)
            throw std::runtime_error("mask file '" + hole.mask_path +
                                     "' does not match requested n/dim");
        g.mask = std::move(loaded.mask);
        if (!hole.allow_boundary_touching) check_mask_boundary_touching(g);
    } else {
        const int nk = dim == 3 ? n : 1;
        g.mask.assign(static_cast<std::size_t>(n) * n * nk, 1);
        for (int k = 0; k < nk; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    if (hole.contains(g.voxel_center(i, j, k), dim))
                        g.mask[g.index(i, j, k)] = 0;
    }

    if (g.material_count() == 0)
        throw std::runtime_error("empty material phase");
    return g;
}

double porosity(const CellGrid& grid) {
    return static_cast<double>(grid.material_count()) /
           static_cast<double>(grid.size());
}

LatticePoint lattice_decompose(const Vec3& x, double eps) {
    if (!(eps > 0.0)) throw std::runtime_error("lattice_decompose: eps must be > 0");
    LatticePoint p;
    for (int a = 0; a < 3; ++a) {
        double s = x[a] / eps;
        double f = std::floor(s);
        double r = s - f;
        if (r >= 1.0) {  // rounding placed s on the next lattice plane
            f += 1.0;
            r = 0.0;
        }
        p.N[a] = static_cast<std::int64_t>(f);
        p.R[a] = r;
    }
    return p;
}

Vec3 unfold(const Vec3& x, const Vec3& y, double eps) {
    LatticePoint p = lattice_decompose(x, eps);
    Vec3 out;
    for (int a = 0; a < 3; ++a)
        out[a] = eps * static_cast<double>(p.N[a]) + eps * y[a];
    return out;
}

MacroGrid build_perforated_macro(const std::array<double, 3>& box_len,
                                 const std::array<int, 3>& n_macro, int dim,
                                 double eps, const HoleSpec& hole,
                                 const CellGrid* cell) {
    if (!(eps > 0.0)) throw std::runtime_error("perforated macro: eps must be > 0");
    MacroGrid g = build_macro(box_len, n_macro, dim, 0);
    g.epsilon = eps;
    if (hole.shape == HoleSpec::Shape::none) return g;

    // the grid must resolve the period exactly (integer voxels per period)
    const double vpp = eps / g.h;
    if (std::fabs(vpp - std::lround(vpp)) > 1e-9 * vpp)
        throw std::runtime_error(
            "perforated macro: eps must be an integer multiple of the voxel "
            "size");
    if (hole.shape == HoleSpec::Shape::voxel_mask && cell != nullptr &&
        std::lround(vpp) % cell->n != 0)
        throw std::runtime_error(
            "perforated macro: voxels per period must be a multiple of the "
            "mask resolution");

    // Resolution check: at least 4 voxels across the hole diameter.
    double extent = hole.min_extent(dim);
    if (hole.shape == HoleSpec::Shape::voxel_mask) {
        if (cell == nullptr)
            throw std::runtime_error(
                "perforated macro: voxel_mask hole requires the cell grid");
        // smallest per-axis span of hole voxels
        double best = 1.0;
        for (int a = 0; a < dim; ++a) {
            int lo = cell->n, hi = -1;
            const int nk = cell->dim == 3 ? cell->n : 1;
            for (int k = 0; k < nk; ++k)
                for (int j = 0; j < cell->n; ++j)
                    for (int i = 0; i < cell->n; ++i)
                        if (!cell->material(i, j, k)) {
                            int idx = a == 0 ? i : (a == 1 ? j : k);
                            lo = std::min(lo, idx);
                            hi = std::max(hi, idx);
                        }
            if (hi >= lo) best = std::min(best, (hi - lo + 1) * cell->h);
        }
        extent = best;
    }
    if (extent * eps < 4.0 * g.h)
        throw std::runtime_error(
            "perforated macro: grid too coarse to resolve the hole "
            "(need >= 4 voxels across the hole diameter)");

    const double tol = 1e-9 * eps;
    const int nk = dim == 3 ? g.n[2] : 1;
    for (int k = 0; k < nk; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                Vec3 x = g.voxel_center(i, j, k);
                LatticePoint p = lattice_decompose(x, eps);
                // holes only from cells eps(k+Y) fully inside Omega
                bool inside = true;
                for (int a = 0; a < dim; ++a) {
                    double lo = eps * static_cast<double>(p.N[a]);
                    double hi = lo + eps;
                    if (lo < -tol || hi > box_len[a] + tol) inside = false;
                }
                if (!inside) continue;
                bool in_hole =
                    hole.shape == HoleSpec::Shape::voxel_mask
                        ? !cell->material_at(p.R)
                        : hole.contains(p.R, dim);
                if (in_hole) g.mask[g.index(i, j, k)] = 0;
            }
    if (g.material_count() == 0)
        throw std::runtime_error("empty material phase");
    return g;
}

MacroGrid build_macro(const std::array<double, 3>& box_len,
                      const std::array<int, 3>& n_macro, int dim, int pad) {
    if (dim != 2 && dim != 3)
        throw std::runtime_error("macro grid: dim must be 2 or 3");
    MacroGrid g;
    g.box_len = box_len;
    g.n = n_macro;
    g.dim = dim;
    g.pad = pad;
    if (dim == 2) {
        g.n[2] = 1;
        g.box_len[2] = 1.0;
    }
    for (int a = 0; a < dim; ++a)
        if (g.n[a] < 1 || !(g.box_len[a] > 0.0))
            throw std::runtime_error("macro grid: invalid box/resolution");
    g.h = g.box_len[0] / g.n[0];
    for (int a = 1; a < dim; ++a) {
        double ha = g.box_len[a] / g.n[a];
        if (std::fabs(ha - g.h) > 1e-12 * g.h)
            throw std::runtime_error(
                "macro grid: voxel size must be identical in every axis");
    }
    const int nk = dim == 3 ? g.n[2] : 1;
    g.mask.assign(static_cast<std::size_t>(g.n[0]) * g.n[1] * nk, 1);
    return g;
}

void write_mask(const std::string& path, const CellGrid& grid) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open mask file for writing: " + path);
    auto put_u32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
        f.write(reinterpret_cast<const char*>(b), 4);
    };
    f.write("PMSK", 4);
    put_u32(static_cast<std::uint32_t>(grid.dim));
    put_u32(static_cast<std::uint32_t>(grid.n));
    put_u32(static_cast<std::uint32_t>(grid.n));
    put_u32(static_cast<std::uint32_t>(grid.dim == 3 ? grid.n : 1));
    f.write(reinterpret_cast<const char*>(grid.mask.data()),
            static_cast<std::streamsize>(grid.mask.size()));
    if (!f) throw std::runtime_error("mask write failed: " + path);
}

CellGrid read_mask(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open mask file: " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "PMSK", 4) != 0)
        throw std::runtime_error("bad mask file magic in " + path);
    auto get_u32 = [&]() {
        unsigned char b[4];
        f.read(reinterpret_cast<char*>(b), 4);
        return static_cast<std::uint32_t>(b[0]) |
               (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) |
               (static_cast<std::uint32_t>(b[3]) << 24);
    };
    std::uint32_t dim = get_u32();
    std::uint32_t nx = get_u32();
    std::uint32_t ny = get_u32();
    std::uint32_t nz = get_u32();
    if (!f || (dim != 2 && dim != 3) || nx == 0 || nx != ny ||
        (dim == 3 && nz != nx) || (dim == 2 && nz != 1))
        throw std::runtime_error("bad mask header in " + path);
    CellGrid g;
    g.n = static_cast<int>(nx);
    g.dim = static_cast<int>(dim);
    g.h = 1.0 / g.n;
    std::size_t count = static_cast<std::size_t>(nx) * ny * nz;
    g.mask.assign(count, 0);
    f.read(reinterpret_cast<char*>(g.mask.data()),
           static_cast<std::streamsize>(count));
    if (!f) throw std::runtime_error("truncated mask file: " + path);
    for (uint8_t& m : g.mask) m = m ? 1 : 0;
    return g;
}

}  // namespace perfomag
