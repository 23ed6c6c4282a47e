#include "perfomag/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <string>

namespace perfomag {

namespace {

struct Neighbor {
    bool exists = false;
    std::size_t voxel = 0;
};

// Face neighbor of voxel (i,j,k) in direction k_dir, side -1/+1. Periodic
// grids wrap; box grids report missing neighbors at the boundary.
Neighbor face_neighbor(const GridSpec& g, int i, int j, int k, int dir,
                       int side) {
    int c[3] = {i, j, k};
    c[dir] += side;
    const int nd = g.n[dir];
    if (g.bc == Bc::periodic) {
        if (c[dir] < 0) c[dir] += nd;
        if (c[dir] >= nd) c[dir] -= nd;
    } else if (c[dir] < 0 || c[dir] >= nd) {
        return {};
    }
    return {true, g.index(c[0], c[1], c[2])};
}

double harmonic(double a, double b) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    return 2.0 * a * b / (a + b);
}

void validate_coeff(const Mat3& c, int dim, std::size_t voxel) {
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j)
            if (std::fabs(c(i, j) - c(j, i)) >
                1e-10 * std::max(1.0, c.norm_inf()))
                throw std::runtime_error(
                    "assemble_elliptic: non-symmetric coefficient at voxel " +
                    std::to_string(voxel));
    // leading principal minors of the dim x dim block
    double m1 = c(0, 0);
    if (!(m1 > 0.0))
        throw std::runtime_error(
            "assemble_elliptic: non-SPD coefficient at voxel " +
            std::to_string(voxel));
    if (dim >= 2) {
        double m2 = c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0);
        if (!(m2 > 0.0))
            throw std::runtime_error(
                "assemble_elliptic: non-SPD coefficient at voxel " +
                std::to_string(voxel));
    }
    if (dim >= 3 && !c.is_spd())
        throw std::runtime_error(
            "assemble_elliptic: non-SPD coefficient at voxel " +
            std::to_string(voxel));
}

// Centered-difference stencil for d/dx_dir at voxel v, falling back to
// one-sided differences next to holes and box boundaries. At most 2 terms.
struct DerivStencil {
    int count = 0;
    std::size_t vox[2];
    double coeff[2];
};

DerivStencil deriv_stencil(const GridSpec& g, int i, int j, int k, int dir,
                           double h, const std::vector<int>& unknown_of) {
    std::size_t self = g.index(i, j, k);
    Neighbor plus = face_neighbor(g, i, j, k, dir, +1);
    Neighbor minus = face_neighbor(g, i, j, k, dir, -1);
    bool has_p = plus.exists && unknown_of[plus.voxel] >= 0;
    bool has_m = minus.exists && unknown_of[minus.voxel] >= 0;
    DerivStencil s;
    if (has_p && has_m) {
        s.count = 2;
        s.vox[0] = plus.voxel;
        s.coeff[0] = 0.5 / h;
        s.vox[1] = minus.voxel;
        s.coeff[1] = -0.5 / h;
    } else if (has_p) {
        s.count = 2;
        s.vox[0] = plus.voxel;
        s.coeff[0] = 1.0 / h;
        s.vox[1] = self;
        s.coeff[1] = -1.0 / h;
    } else if (has_m) {
        s.count = 2;
        s.vox[0] = self;
        s.coeff[0] = 1.0 / h;
        s.vox[1] = minus.voxel;
        s.coeff[1] = -1.0 / h;
    }
    return s;
}

}  // namespace

void SparseOperator::apply(const double* x, double* y) const {
    for (int r = 0; r < n_rows; ++r) {
        double sum = 0.0;
        for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
            sum += val[p] * x[col[p]];
        y[r] = sum;
    }
}

std::vector<double> SparseOperator::diagonal() const {
    std::vector<double> d(n_rows, 0.0);
    for (int r = 0; r < n_rows; ++r)
        for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
            if (col[p] == r) d[r] = val[p];
    return d;
}

SparseOperator assemble_elliptic(const GridSpec& grid, const CoeffFn& coeff,
                                 Bc bc) {
    GridSpec g = grid;
    g.bc = bc;
    const int nx = g.n[0], ny = g.n[1], nz = g.dim == 3 ? g.n[2] : 1;
    const double h = g.h;
    const std::size_t n_vox = g.voxel_count();

    SparseOperator op;
    op.voxel_to_unknown.assign(n_vox, -1);
    int n_unknowns = 0;
    for (std::size_t v = 0; v < n_vox; ++v)
        if (g.material(v)) {
            op.voxel_to_unknown[v] = n_unknowns++;
            op.unknown_to_voxel.push_back(v);
        }
    if (n_unknowns == 0)
        throw std::runtime_error("assemble_elliptic: empty material phase");
    op.n_rows = n_unknowns;

    // Per-voxel coefficient cache; validated once here.
    std::vector<Mat3> C(n_vox);
    bool any_offdiag = false;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                std::size_t v = g.index(i, j, k);
                if (!g.material(v)) continue;
                C[v] = coeff(i, j, k);
                validate_coeff(C[v], g.dim, v);
                for (int a = 0; a < g.dim; ++a)
                    for (int b = 0; b < g.dim; ++b) {
                        if (a == b) continue;
                        if (C[v](a, b) != 0.0) any_offdiag = true;
                        if (std::fabs(C[v](a, b)) >
                            0.25 * std::min(C[v](a, a), C[v](b, b)))
                            op.warn_strong_offdiagonal = true;
                    }
            }

    // Connected components of the material graph (face adjacency).
    op.component.assign(n_unknowns, -1);
    int comp = 0;
    std::deque<std::size_t> queue;
    for (std::size_t seed = 0; seed < n_vox; ++seed) {
        if (!g.material(seed) || op.component[op.voxel_to_unknown[seed]] >= 0)
            continue;
        op.component[op.voxel_to_unknown[seed]] = comp;
        queue.push_back(seed);
        while (!queue.empty()) {
            std::size_t v = queue.front();
            queue.pop_front();
            int k = static_cast<int>(v / (static_cast<std::size_t>(nx) * ny));
            int j = static_cast<int>((v / nx) % ny);
            int i = static_cast<int>(v % nx);
            for (int dir = 0; dir < g.dim; ++dir)
                for (int side = -1; side <= 1; side += 2) {
                    Neighbor nb = face_neighbor(g, i, j, k, dir, side);
                    if (!nb.exists || !g.material(nb.voxel)) continue;
                    int u = op.voxel_to_unknown[nb.voxel];
                    if (op.component[u] < 0) {
                        op.component[u] = comp;
                        queue.push_back(nb.voxel);
                    }
                }
        }
        ++comp;
    }
    op.n_components = comp;
    op.warn_disconnected = comp > 1;

    // Row-local assembly. The per-row term enumeration is canonical:
    // (1) faces in order dir = 0..dim-1, side -, +;
    // (2) off-diagonal quadrature in order k = 0..dim-1, l != k,
    //     owner voxel v = r - e_k, r, r + e_k.
    // The dense test oracle follows the same enumeration so entries match
    // bit for bit.
    std::vector<double> scratch(n_unknowns, 0.0);
    std::vector<int> touched;
    touched.reserve(32);
    op.row_ptr.assign(n_unknowns + 1, 0);
    std::vector<std::vector<std::pair<int, double>>> rows(n_unknowns);

    auto add = [&](int c, double v) {
        if (scratch[c] == 0.0 &&
            std::find(touched.begin(), touched.end(), c) == touched.end())
            touched.push_back(c);
        scratch[c] += v;
    };

    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                std::size_t v = g.index(i, j, k);
                int r = op.voxel_to_unknown[v];
                if (r < 0) continue;
                touched.clear();
                add(r, 0.0);  // keep the diagonal entry present

                for (int dir = 0; dir < g.dim; ++dir)
                    for (int side = -1; side <= 1; side += 2) {
                        Neighbor nb = face_neighbor(g, i, j, k, dir, side);
                        if (nb.exists && g.material(nb.voxel)) {
                            double c = harmonic(C[v](dir, dir),
                                                C[nb.voxel](dir, dir));
                            add(r, c / (h * h));
                            add(op.voxel_to_unknown[nb.voxel], -c / (h * h));
                        } else if (!nb.exists && bc == Bc::box_dirichlet_far) {
                            // ghost value 0 beyond the outer boundary
                            add(r, C[v](dir, dir) / (h * h));
                        }
                        // missing material neighbor otherwise: natural
                        // Neumann, no flux
                    }

                if (any_offdiag) {
                    for (int dk = 0; dk < g.dim; ++dk)
                        for (int dl = 0; dl < g.dim; ++dl) {
                            if (dl == dk) continue;
                            for (int pos = -1; pos <= 1; ++pos) {
                                int c2[3] = {i, j, k};
                                c2[dk] += pos;
                                const int nd = g.n[dk];
                                if (g.bc == Bc::periodic) {
                                    if (c2[dk] < 0) c2[dk] += nd;
                                    if (c2[dk] >= nd) c2[dk] -= nd;
                                } else if (c2[dk] < 0 || c2[dk] >= nd) {
                                    continue;
                                }
                                std::size_t ov =
                                    g.index(c2[0], c2[1], c2[2]);
                                if (op.voxel_to_unknown[ov] < 0) continue;
                                DerivStencil dks = deriv_stencil(
                                    g, c2[0], c2[1], c2[2], dk, h,
                                    op.voxel_to_unknown);
                                double dkr = 0.0;
                                for (int t = 0; t < dks.count; ++t)
                                    if (dks.vox[t] == v) dkr = dks.coeff[t];
                                if (dkr == 0.0) continue;
                                double w = C[ov](dk, dl) * dkr;
                                DerivStencil dls = deriv_stencil(
                                    g, c2[0], c2[1], c2[2], dl, h,
                                    op.voxel_to_unknown);
                                for (int t = 0; t < dls.count; ++t)
                                    add(op.voxel_to_unknown[dls.vox[t]],
                                        w * dls.coeff[t]);
                            }
                        }
                }

                std::sort(touched.begin(), touched.end());
                auto& row = rows[r];
                row.reserve(touched.size());
                for (int c : touched) {
                    if (scratch[c] != 0.0 || c == r)
                        row.emplace_back(c, scratch[c]);
                    scratch[c] = 0.0;
                }
            }

    std::size_t nnz = 0;
    for (const auto& row : rows) nnz += row.size();
    op.col.reserve(nnz);
    op.val.reserve(nnz);
    for (int r = 0; r < n_unknowns; ++r) {
        op.row_ptr[r] = static_cast<int>(op.col.size());
        for (const auto& [c, x] : rows[r]) {
            op.col.push_back(c);
            op.val.push_back(x);
        }
    }
    op.row_ptr[n_unknowns] = static_cast<int>(op.col.size());
    return op;
}

namespace {

void project_components(std::vector<double>& v,
                        const std::vector<int>& component, int n_components,
                        const std::vector<double>& comp_inv_size) {
    std::vector<double> mean(n_components, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) mean[component[i]] += v[i];
    for (int c = 0; c < n_components; ++c) mean[c] *= comp_inv_size[c];
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= mean[component[i]];
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

std::pair<std::vector<double>, SolveReport> solve_spd(
    const SparseOperator& A, const std::vector<double>& b, double tol,
    bool deflate_constants, int max_iter, const std::vector<double>* diag_shift,
    const std::vector<double>* x0) {
    const int n = A.n_rows;
    if (static_cast<int>(b.size()) != n)
        throw std::runtime_error("solve_spd: size mismatch");

    std::vector<double> comp_inv_size;
    if (deflate_constants) {
        std::vector<int> sizes(A.n_components, 0);
        for (int c : A.component) ++sizes[c];
        comp_inv_size.resize(A.n_components);
        for (int c = 0; c < A.n_components; ++c)
            comp_inv_size[c] = 1.0 / sizes[c];
    }
    auto project = [&](std::vector<double>& v) {
        if (deflate_constants)
            project_components(v, A.component, A.n_components, comp_inv_size);
    };

    std::vector<double> bb = b;
    project(bb);

    SolveReport rep;
    rep.nullspace_projected = deflate_constants;

    const double nb = norm2(bb);
    if (nb == 0.0) {
        rep.converged = true;
        return {std::vector<double>(n, 0.0), rep};
    }

    std::vector<double> x = x0 ? *x0 : std::vector<double>(n, 0.0);
    std::vector<double> diag = A.diagonal();
    if (diag_shift)
        for (int i = 0; i < n; ++i) diag[i] += (*diag_shift)[i];
    std::vector<double> minv(n);
    for (int i = 0; i < n; ++i) minv[i] = diag[i] > 0.0 ? 1.0 / diag[i] : 1.0;

    auto apply_op = [&](const std::vector<double>& in, std::vector<double>& out) {
        A.apply(in.data(), out.data());
        if (diag_shift)
            for (int i = 0; i < n; ++i) out[i] += (*diag_shift)[i] * in[i];
    };

    std::vector<double> r(n), z(n), p(n), q(n);
    apply_op(x, q);
    for (int i = 0; i < n; ++i) r[i] = bb[i] - q[i];
    project(r);

    double rnorm = norm2(r);
    double rho_old = 0.0;
    while (rep.iterations < max_iter && rnorm / nb > tol) {
        for (int i = 0; i < n; ++i) z[i] = minv[i] * r[i];
        project(z);
        double rho = 0.0;
        for (int i = 0; i < n; ++i) rho += r[i] * z[i];
        if (rep.iterations == 0) {
            p = z;
        } else {
            double beta = rho / rho_old;
            for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        apply_op(p, q);
        project(q);
        double pq = 0.0;
        for (int i = 0; i < n; ++i) pq += p[i] * q[i];
        if (!(pq > 0.0)) break;  // breakdown: operator not SPD on this subspace
        double alpha = rho / pq;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rho_old = rho;
        double rnorm_new = norm2(r);
        if (rnorm > 0.0)
            rep.max_residual_growth =
                std::max(rep.max_residual_growth, rnorm_new / rnorm);
        rnorm = rnorm_new;
        ++rep.iterations;
    }

    project(x);
    rep.rel_residual = rnorm / nb;
    rep.converged = rep.rel_residual <= tol;
    return {std::move(x), rep};
}

int default_max_iter(std::size_t n_unknowns, int dim) {
    double root = std::pow(static_cast<double>(n_unknowns), 1.0 / dim);
    return std::max(200, static_cast<int>(50.0 * std::ceil(root)));
}

}  // namespace perfomag
