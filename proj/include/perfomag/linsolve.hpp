#ifndef PERFOMAG_LINSOLVE_HPP
#define PERFOMAG_LINSOLVE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "perfomag/smallmat.hpp"

namespace perfomag {

enum class Bc { periodic, box_neumann, box_dirichlet_far };

// Structured-grid view for operator assembly: voxel counts per axis, voxel
// size, boundary treatment and an optional material mask (null = all
// material). Unknowns are the material voxels in row-major order, x fastest.
struct GridSpec {
    std::array<int, 3> n = {1, 1, 1};
    int dim = 3;
    double h = 1.0;
    Bc bc = Bc::periodic;
    const std::vector<uint8_t>* mask = nullptr;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(n[0]) * n[1] * (dim == 3 ? n[2] : 1);
    }
    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>((k * n[1] + j) * n[0] + i);
    }
    bool material(std::size_t idx) const {
        return mask == nullptr || (*mask)[idx] != 0;
    }
};

// Per-voxel symmetric coefficient matrix, addressed by voxel indices.
using CoeffFn = std::function<Mat3(int i, int j, int k)>;

struct SparseOperator {
    int n_rows = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;
    bool symmetric = true;

    // Map voxel -> unknown (-1 for hole voxels) and its inverse.
    std::vector<int> voxel_to_unknown;
    std::vector<std::size_t> unknown_to_voxel;

    // Connected components of the material graph (constants per component
    // span the nullspace of pure periodic/Neumann operators).
    std::vector<int> component;
    int n_components = 1;
    bool warn_disconnected = false;
    // Off-diagonal coefficient entries above 25% of the diagonal: the
    // two-point-flux monotonicity argument no longer applies.
    bool warn_strong_offdiagonal = false;

    void apply(const double* x, double* y) const;
    std::vector<double> diagonal() const;
};

struct SolveReport {
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
    bool nullspace_projected = false;
    double max_residual_growth = 1.0;  // max ||r_{k+1}||/||r_k|| observed
};

// Finite-volume discretization of -div(C grad .) on the (masked) grid:
// two-point flux with harmonic face averaging of the diagonal coefficient
// entries; off-diagonal entries via centered-difference quadrature (9/19
// point stencil). Hole voxels are excluded from the unknown set, which
// realizes the natural Neumann condition on hole boundaries. Entries are
// scaled pointwise (like the PDE operator, ~1/h^2).
SparseOperator assemble_elliptic(const GridSpec& grid, const CoeffFn& coeff,
                                 Bc bc);

// Preconditioned CG (Jacobi) for SPD/SPSD systems. With deflate_constants,
// b and the iterates are projected to zero mean per connected component.
// An optional positive diagonal shift s adds s_i to row i's diagonal (the
// operator itself is not modified).
std::pair<std::vector<double>, SolveReport> solve_spd(
    const SparseOperator& A, const std::vector<double>& b, double tol,
    bool deflate_constants, int max_iter,
    const std::vector<double>* diag_shift = nullptr,
    const std::vector<double>* x0 = nullptr);

// Default iteration budget: 50 * n_unknowns^(1/dim), floored at 200.
int default_max_iter(std::size_t n_unknowns, int dim);

}  // namespace perfomag

#endif
