#ifndef PERFOMAG_CELL_HPP
#define PERFOMAG_CELL_HPP

#include <array>
#include <functional>
#include <vector>

#include "perfomag/geometry.hpp"
#include "perfomag/linsolve.hpp"
#include "perfomag/smallmat.hpp"

namespace perfomag {

enum class CorrectorKind { omega_A, omega_hat_K, omega_bar1_mu, omega_bar2_mu };

// bar1 correctors come in two sub-variants: interior (hole-masked Y*
// problem) and exterior (full-Y problem, no hole).
enum class CellDomain { material, full };

// The field-coupling cell problem as printed uses the source div(mu e_i);
// the variant derived from the two-scale limit equation uses div(e_i).
enum class Omega2Source { mu_ei, ei };

// Cell coefficient evaluated at unit-cell positions y in [0,1)^dim.
using CellCoeffFn = std::function<Mat3(const Vec3& y)>;

struct CorrectorOptions {
    double tol = 1e-10;
    int max_iter = 0;  // 0 = default budget
    Omega2Source omega2_source = Omega2Source::mu_ei;
};

// One periodic scalar corrector on the cell grid: mean-zero over material
// voxels, values zero-extended into holes, with face-based gradients
// ((omega(v+e_k) - omega(v))/h on material-material faces, 0 elsewhere).
struct CorrectorField {
    const CellGrid* grid = nullptr;
    int direction = 0;  // 0-based axis
    CorrectorKind kind = CorrectorKind::omega_A;
    CellDomain domain = CellDomain::material;
    std::vector<double> values;
    std::array<std::vector<double>, 3> face_grad;
    SolveReport report;
};

CorrectorField solve_corrector(const CellGrid& grid, const CellCoeffFn& coeff,
                               int direction, CorrectorKind kind,
                               CellDomain domain = CellDomain::material,
                               const CorrectorOptions& opts = {});

// M_{Y*}(C_{ji} + sum_k C_{jk} d_{y_k} omega_i) where i is the corrector
// direction; averaging over the full cell with |Y| = 1 (holes carry zero
// flux). Face fluxes use the same harmonic means as the solve, so the value
// matches the discrete bilinear form exactly.
double flux_moment(const CorrectorField& corr, const CellCoeffFn& coeff,
                   int row);

// Discrete energy M_{Y*}(C grad(omega + y_i) . grad(omega + y_i)); equals
// flux_moment(corr, C, i) up to the solver residual (Galerkin identity).
double corrector_energy(const CorrectorField& corr, const CellCoeffFn& coeff);

// Mean of the corrector over its domain voxels (normalization check).
double corrector_mean(const CorrectorField& corr);

// All corrector families needed by the effective tensors; directions
// 0..dim-1 per family.
struct CorrectorSet {
    std::vector<CorrectorField> omega_A;
    std::vector<CorrectorField> omega_hat_K;
    std::vector<CorrectorField> bar1_interior;
    std::vector<CorrectorField> bar1_exterior;
    std::vector<CorrectorField> bar2;
};

CorrectorSet solve_all_correctors(const CellGrid& grid, const CellCoeffFn& A,
                                  const CellCoeffFn& K, const CellCoeffFn& mu,
                                  const CorrectorOptions& opts = {});

}  // namespace perfomag

#endif
