#include "perfomag/cell.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace perfomag {

namespace {

double harmonic(double a, double b) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    return 2.0 * a * b / (a + b);
}

struct CellProblem {
    GridSpec spec;
    std::vector<uint8_t> full_mask;       // all-ones mask for full-Y problems
    std::vector<Mat3> C;                  // per voxel
    int nx, ny, nz;
};

CellProblem make_problem(const CellGrid& grid, const CellCoeffFn& coeff,
                         CellDomain domain) {
    CellProblem p;
    p.nx = grid.n;
    p.ny = grid.n;
    p.nz = grid.dim == 3 ? grid.n : 1;
    p.spec.n = {p.nx, p.ny, p.nz};
    p.spec.dim = grid.dim;
    p.spec.h = grid.h;
    p.spec.bc = Bc::periodic;
    if (domain == CellDomain::material) {
        p.spec.mask = &grid.mask;
    } else {
        p.full_mask.assign(grid.size(), 1);
        p.spec.mask = &p.full_mask;
    }
    p.C.resize(grid.size());
    for (int k = 0; k < p.nz; ++k)
        for (int j = 0; j < p.ny; ++j)
            for (int i = 0; i < p.nx; ++i)
                p.C[grid.index(i, j, k)] = coeff(grid.voxel_center(i, j, k));
    return p;
}

std::size_t wrap_index(const CellProblem& p, int i, int j, int k) {
    auto w = [](int a, int n) { return a < 0 ? a + n : (a >= n ? a - n : a); };
    return static_cast<std::size_t>(
        (w(k, p.nz) * p.ny + w(j, p.ny)) * p.nx + w(i, p.nx));
}

bool material(const CellProblem& p, std::size_t v) {
    return (*p.spec.mask)[v] != 0;
}

// Central-difference of a zero-extended corrector at a material voxel,
// one-sided next to holes. Background delta added by callers.
double central_diff(const CellProblem& p, const std::vector<double>& u, int i,
                    int j, int k, int dir) {
    int cp[3] = {i, j, k}, cm[3] = {i, j, k};
    cp[dir] += 1;
    cm[dir] -= 1;
    std::size_t vp = wrap_index(p, cp[0], cp[1], cp[2]);
    std::size_t vm = wrap_index(p, cm[0], cm[1], cm[2]);
    std::size_t v0 = wrap_index(p, i, j, k);
    bool hp = material(p, vp), hm = material(p, vm);
    const double h = p.spec.h;
    if (hp && hm) return (u[vp] - u[vm]) / (2.0 * h);
    if (hp) return (u[vp] - u[v0]) / h;
    if (hm) return (u[v0] - u[vm]) / h;
    return 0.0;
}

}  // namespace

CorrectorField solve_corrector(const CellGrid& grid, const CellCoeffFn& coeff,
                               int direction, CorrectorKind kind,
                               CellDomain domain, const CorrectorOptions& opts) {
    if (direction < 0 || direction >= grid.dim)
        throw std::runtime_error("solve_corrector: direction out of range");
    CellProblem p = make_problem(grid, coeff, domain);
    SparseOperator A = assemble_elliptic(p.spec, [&](int i, int j, int k) {
        return p.C[grid.index(i, j, k)];
    }, Bc::periodic);

    // Degenerate phases: every component isolated means no connected
    // structure to homogenize over.
    {
        std::vector<int> sizes(A.n_components, 0);
        for (int c : A.component) ++sizes[c];
        int largest = 0;
        for (int s : sizes) largest = std::max(largest, s);
        if (largest < 2)
            throw std::runtime_error(
                "solve_corrector: degenerate (fully disconnected) material "
                "phase");
    }

    // Source coefficient: the corrector equation is
    //   -div(C grad omega) = div(S e_i),  (C grad omega + S e_i) . nu = 0,
    // with S = C except for the bar2 'ei' source variant where S = I.
    const bool unit_source = kind == CorrectorKind::omega_bar2_mu &&
                             opts.omega2_source == Omega2Source::ei;
    auto S = [&](std::size_t v) -> Mat3 {
        return unit_source ? Mat3::identity() : p.C[v];
    };

    const double h = p.spec.h;
    const int i_dir = direction;
    std::vector<double> b(A.n_rows, 0.0);
    for (int k = 0; k < p.nz; ++k)
        for (int j = 0; j < p.ny; ++j)
            for (int i = 0; i < p.nx; ++i) {
                std::size_t v = grid.index(i, j, k);
                int r = A.voxel_to_unknown[v];
                if (r < 0) continue;
                int cp[3] = {i, j, k}, cm[3] = {i, j, k};
                cp[i_dir] += 1;
                cm[i_dir] -= 1;
                std::size_t vp = wrap_index(p, cp[0], cp[1], cp[2]);
                std::size_t vm = wrap_index(p, cm[0], cm[1], cm[2]);
                double c_plus = material(p, vp)
                                    ? harmonic(S(v)(i_dir, i_dir),
                                               S(vp)(i_dir, i_dir))
                                    : 0.0;
                double c_minus = material(p, vm)
                                     ? harmonic(S(v)(i_dir, i_dir),
                                                S(vm)(i_dir, i_dir))
                                     : 0.0;
                b[r] = (c_plus - c_minus) / h;
                // off-diagonal source components S_{ki}, k != i
                for (int dk = 0; dk < grid.dim; ++dk) {
                    if (dk == i_dir) continue;
                    double ski = S(v)(dk, i_dir);
                    if (ski == 0.0) continue;
                    // b(w) -= S_ki * (D_k w)(v): distribute the transpose of
                    // the centered difference used by the operator
                    int cpp[3] = {i, j, k}, cmm[3] = {i, j, k};
                    cpp[dk] += 1;
                    cmm[dk] -= 1;
                    std::size_t wp = wrap_index(p, cpp[0], cpp[1], cpp[2]);
                    std::size_t wm = wrap_index(p, cmm[0], cmm[1], cmm[2]);
                    bool hp = material(p, wp), hm = material(p, wm);
                    if (hp && hm) {
                        b[A.voxel_to_unknown[wp]] -= ski * 0.5 / h;
                        b[A.voxel_to_unknown[wm]] += ski * 0.5 / h;
                    } else if (hp) {
                        b[A.voxel_to_unknown[wp]] -= ski / h;
                        b[r] += ski / h;
                    } else if (hm) {
                        b[r] -= ski / h;
                        b[A.voxel_to_unknown[wm]] += ski / h;
                    }
                }
            }

    int max_iter = opts.max_iter > 0
                       ? opts.max_iter
                       : default_max_iter(A.unknown_to_voxel.size(), grid.dim);
    auto [x, report] = solve_spd(A, b, opts.tol, true, max_iter);
    if (!report.converged) {
        std::ostringstream msg;
        msg << "solve_corrector: CG did not converge (iterations="
            << report.iterations << ", rel_residual=" << report.rel_residual
            << ")";
        throw std::runtime_error(msg.str());
    }

    CorrectorField f;
    f.grid = &grid;
    f.direction = direction;
    f.kind = kind;
    f.domain = domain;
    f.report = report;
    f.values.assign(grid.size(), 0.0);
    for (std::size_t u = 0; u < A.unknown_to_voxel.size(); ++u)
        f.values[A.unknown_to_voxel[u]] = x[u];

    for (int d = 0; d < grid.dim; ++d) {
        f.face_grad[d].assign(grid.size(), 0.0);
        for (int k = 0; k < p.nz; ++k)
            for (int j = 0; j < p.ny; ++j)
                for (int i = 0; i < p.nx; ++i) {
                    std::size_t v = grid.index(i, j, k);
                    if (!material(p, v)) continue;
                    int cn[3] = {i, j, k};
                    cn[d] += 1;
                    std::size_t vq = wrap_index(p, cn[0], cn[1], cn[2]);
                    if (!material(p, vq)) continue;
                    f.face_grad[d][v] = (f.values[vq] - f.values[v]) / h;
                }
    }
    return f;
}

double flux_moment(const CorrectorField& corr, const CellCoeffFn& coeff,
                   int row) {
    const CellGrid& grid = *corr.grid;
    if (row < 0 || row >= 3)
        throw std::runtime_error("flux_moment: row index out of range");
    CellProblem p = make_problem(grid, coeff, corr.domain);
    if (corr.values.size() != grid.size())
        throw std::runtime_error("flux_moment: corrector/grid mismatch");
    const double h = p.spec.h;
    const double vol = std::pow(h, grid.dim);
    const int i_dir = corr.direction;

    // In 2-D the third row reduces to the plain material average of C_{r,i}
    // (no y3 variation, corrector for direction 3 is identically zero).
    if (row >= grid.dim) {
        double sum = 0.0;
        for (int k = 0; k < p.nz; ++k)
            for (int j = 0; j < p.ny; ++j)
                for (int i = 0; i < p.nx; ++i) {
                    std::size_t v = grid.index(i, j, k);
                    if (!material(p, v)) continue;
                    sum += vol * p.C[v](row, i_dir);
                }
        return sum;
    }

    double sum = 0.0;
    for (int k = 0; k < p.nz; ++k)
        for (int j = 0; j < p.ny; ++j)
            for (int i = 0; i < p.nx; ++i) {
                std::size_t v = grid.index(i, j, k);
                if (!material(p, v)) continue;
                // face flux in direction `row` through the +face
                int cn[3] = {i, j, k};
                cn[row] += 1;
                std::size_t vq = wrap_index(p, cn[0], cn[1], cn[2]);
                if (material(p, vq)) {
                    double c = harmonic(p.C[v](row, row), p.C[vq](row, row));
                    double grad = corr.face_grad[row][v] +
                                  (row == i_dir ? 1.0 : 0.0);
                    sum += vol * c * grad;
                }
                // off-diagonal voxel terms C_{row,l} (D_l omega + delta_{l,i})
                for (int l = 0; l < grid.dim; ++l) {
                    if (l == row) continue;
                    double crl = p.C[v](row, l);
                    if (crl == 0.0) continue;
                    double dl = central_diff(p, corr.values, i, j, k, l) +
                                (l == i_dir ? 1.0 : 0.0);
                    sum += vol * crl * dl;
                }
            }
    return sum;
}

double corrector_energy(const CorrectorField& corr, const CellCoeffFn& coeff) {
    const CellGrid& grid = *corr.grid;
    CellProblem p = make_problem(grid, coeff, corr.domain);
    const double h = p.spec.h;
    const double vol = std::pow(h, grid.dim);
    const int i_dir = corr.direction;

    double sum = 0.0;
    for (int k = 0; k < p.nz; ++k)
        for (int j = 0; j < p.ny; ++j)
            for (int i = 0; i < p.nx; ++i) {
                std::size_t v = grid.index(i, j, k);
                if (!material(p, v)) continue;
                for (int d = 0; d < grid.dim; ++d) {
                    int cn[3] = {i, j, k};
                    cn[d] += 1;
                    std::size_t vq = wrap_index(p, cn[0], cn[1], cn[2]);
                    if (!material(p, vq)) continue;
                    double c = harmonic(p.C[v](d, d), p.C[vq](d, d));
                    double g = corr.face_grad[d][v] + (d == i_dir ? 1.0 : 0.0);
                    sum += vol * c * g * g;
                }
                for (int dk = 0; dk < grid.dim; ++dk)
                    for (int dl = 0; dl < grid.dim; ++dl) {
                        if (dk == dl) continue;
                        double ckl = p.C[v](dk, dl);
                        if (ckl == 0.0) continue;
                        double gk = central_diff(p, corr.values, i, j, k, dk) +
                                    (dk == i_dir ? 1.0 : 0.0);
                        double gl = central_diff(p, corr.values, i, j, k, dl) +
                                    (dl == i_dir ? 1.0 : 0.0);
                        sum += vol * ckl * gk * gl;
                    }
            }
    return sum;
}

double corrector_mean(const CorrectorField& corr) {
    const CellGrid& grid = *corr.grid;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t v = 0; v < grid.size(); ++v) {
        bool mat = corr.domain == CellDomain::full || grid.mask[v] != 0;
        if (!mat) continue;
        sum += corr.values[v];
        ++count;
    }
    return sum / static_cast<double>(count);
}

CorrectorSet solve_all_correctors(const CellGrid& grid, const CellCoeffFn& A,
                                  const CellCoeffFn& K, const CellCoeffFn& mu,
                                  const CorrectorOptions& opts) {
    CorrectorSet set;
    for (int d = 0; d < grid.dim; ++d) {
        set.omega_A.push_back(solve_corrector(grid, A, d,
                                              CorrectorKind::omega_A,
                                              CellDomain::material, opts));
        set.omega_hat_K.push_back(solve_corrector(grid, K, d,
                                                  CorrectorKind::omega_hat_K,
                                                  CellDomain::material, opts));
        set.bar1_interior.push_back(
            solve_corrector(grid, mu, d, CorrectorKind::omega_bar1_mu,
                            CellDomain::material, opts));
        set.bar1_exterior.push_back(
            solve_corrector(grid, mu, d, CorrectorKind::omega_bar1_mu,
                            CellDomain::full, opts));
        set.bar2.push_back(solve_corrector(grid, mu, d,
                                           CorrectorKind::omega_bar2_mu,
                                           CellDomain::material, opts));
    }
    return set;
}

}  // namespace perfomag
