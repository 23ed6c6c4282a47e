#include "perfomag/micro.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace perfomag {

CoupledSim::Problem make_micro_problem(const MicroConfig& cfg) {
    if (!cfg.grid.epsilon.has_value())
        throw std::runtime_error("micro: grid carries no epsilon");
    const double eps = cfg.eps;
    if (!(eps > 0.0)) throw std::runtime_error("micro: eps must be > 0");

    // resolution check: the perforated grid must resolve the cell mask
    const double vpp = eps / cfg.grid.h;
    if (cfg.grid.material_count() != cfg.grid.size() &&
        vpp < 8.0 - 1e-9)
        throw std::runtime_error(
            "micro: need at least 8 voxels per period to resolve the cell "
            "mask");

    CoupledSim::Problem p;
    p.grid = cfg.grid;
    p.grid.pad = cfg.pad;  // snapshot writers read the offset from the grid
    p.pad = cfg.pad;

    const MacroGrid grid = cfg.grid;
    const CellCoeffFn A = cfg.A, K = cfg.K, mu = cfg.mu;
    p.A = [grid, A, eps](int i, int j, int k) {
        Vec3 x = grid.voxel_center(i, j, k);
        return A(lattice_decompose(x, eps).R);
    };
    p.K = [grid, K, eps](int i, int j, int k) {
        Vec3 x = grid.voxel_center(i, j, k);
        return K(lattice_decompose(x, eps).R);
    };
    // The padded box's frame starts pad layers before Omega; sample mu at
    // the global coordinate so the oscillation phase continues across the
    // boundary.
    const int pad = cfg.pad;
    const int pz = grid.dim == 3 ? pad : 0;
    const double h = grid.h;
    const int dim = grid.dim;
    p.mu_field = [mu, eps, pad, pz, h, dim](int i, int j, int k) {
        Vec3 x = {(i - pad + 0.5) * h, (j - pad + 0.5) * h,
                  dim == 3 ? (k - pz + 0.5) * h : 0.0};
        return mu(lattice_decompose(x, eps).R);
    };
    p.H1 = Mat3::identity();
    p.mu_bar = Mat3::identity();
    p.H2 = Mat3::zero();
    p.gamma = cfg.gamma;
    p.theta_c = cfg.theta_c;
    p.thermo = cfg.thermo;
    p.chi_init = 1.0;  // micro initial data carries no porosity scaling
    p.dt = cfg.dt;
    p.t_end = cfg.t_end;
    p.save_every = cfg.save_every;
    p.cg_tol = cfg.cg_tol;
    p.cg_max_iter = cfg.cg_max_iter;
    p.newton_tol = cfg.newton_tol;
    p.newton_max = cfg.newton_max;
    p.field_coupling = cfg.field_coupling;
    p.freeze_theta = cfg.freeze_theta;
    return p;
}

MicroState solve_micro(const MicroConfig& cfg, const VectorInit& m0,
                       const ScalarInit& theta0, RunSink* sink) {
    CoupledSim sim(make_micro_problem(cfg));
    return sim.run(m0, theta0, sink);
}

std::vector<double> extend(const MacroGrid& grid,
                           const std::vector<double>& field, ExtendMode mode) {
    if (field.size() != grid.size())
        throw std::runtime_error("extend: field/grid mismatch");
    std::vector<double> out(field);
    const int nz = grid.dim == 3 ? grid.n[2] : 1;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int i = 0; i < grid.n[0]; ++i)
                if (!grid.material(i, j, k)) out[grid.index(i, j, k)] = 0.0;
    if (mode == ExtendMode::zero_fill) return out;

    // neighbor_fill: Jacobi averaging of hole voxels from face neighbors
    double scale = 0.0;
    for (double v : out) scale = std::max(scale, std::fabs(v));
    if (scale == 0.0) scale = 1.0;
    std::vector<double> next(out);
    for (int pass = 0; pass < 100000; ++pass) {
        double max_change = 0.0;
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j < grid.n[1]; ++j)
                for (int i = 0; i < grid.n[0]; ++i) {
                    if (grid.material(i, j, k)) continue;
                    double sum = 0.0;
                    int count = 0;
                    const int c0[3] = {i, j, k};
                    for (int d = 0; d < grid.dim; ++d)
                        for (int side = -1; side <= 1; side += 2) {
                            int c[3] = {c0[0], c0[1], c0[2]};
                            c[d] += side;
                            if (c[0] < 0 || c[0] >= grid.n[0] || c[1] < 0 ||
                                c[1] >= grid.n[1] || c[2] < 0 || c[2] >= nz)
                                continue;
                            sum += out[grid.index(c[0], c[1], c[2])];
                            ++count;
                        }
                    std::size_t v = grid.index(i, j, k);
                    double nv = count ? sum / count : 0.0;
                    max_change = std::max(max_change, std::fabs(nv - out[v]));
                    next[v] = nv;
                }
        out.swap(next);
        next = out;
        if (max_change <= 1e-13 * scale) break;
    }
    return out;
}

double two_scale_error(const MacroGrid& micro_grid,
                       const std::vector<double>& f_eps,
                       const MacroGrid& macro_grid,
                       const std::vector<double>& f, const CellGrid& cell,
                       double eps) {
    if (micro_grid.dim != macro_grid.dim || micro_grid.dim != cell.dim)
        throw std::runtime_error("two_scale_error: dimension mismatch");
    for (int a = 0; a < micro_grid.dim; ++a)
        if (std::fabs(micro_grid.box_len[a] - macro_grid.box_len[a]) >
            1e-12 * macro_grid.box_len[a])
            throw std::runtime_error("two_scale_error: box mismatch");
    if (f_eps.size() != micro_grid.size() || f.size() != macro_grid.size())
        throw std::runtime_error("two_scale_error: field/grid mismatch");

    const int dim = macro_grid.dim;
    const int mnz = dim == 3 ? macro_grid.n[2] : 1;
    const int cnz = dim == 3 ? cell.n : 1;
    const double wx = std::pow(macro_grid.h, dim);
    const double wy = std::pow(cell.h, dim);
    const double hm = micro_grid.h;

    double sum = 0.0;
    for (int k = 0; k < mnz; ++k)
        for (int j = 0; j < macro_grid.n[1]; ++j)
            for (int i = 0; i < macro_grid.n[0]; ++i) {
                Vec3 x = macro_grid.voxel_center(i, j, k);
                double fx = f[macro_grid.index(i, j, k)];
                LatticePoint lp = lattice_decompose(x, eps);
                for (int ck = 0; ck < cnz; ++ck)
                    for (int cj = 0; cj < cell.n; ++cj)
                        for (int ci = 0; ci < cell.n; ++ci) {
                            Vec3 y = cell.voxel_center(ci, cj, ck);
                            double chi =
                                cell.material(ci, cj, ck) ? 1.0 : 0.0;
                            double target = chi * fx;
                            double sample = 0.0;
                            bool inside = true;
                            int idx[3] = {0, 0, 0};
                            for (int a = 0; a < dim; ++a) {
                                double pa =
                                    eps * static_cast<double>(lp.N[a]) +
                                    eps * y[a];
                                if (pa < 0.0 ||
                                    pa >= micro_grid.box_len[a]) {
                                    inside = false;
                                    break;
                                }
                                idx[a] = std::min(
                                    static_cast<int>(std::floor(pa / hm)),
                                    micro_grid.n[a] - 1);
                            }
                            if (inside)
                                sample = f_eps[micro_grid.index(
                                    idx[0], idx[1], idx[2])];
                            double d = sample - target;
                            sum += wx * wy * d * d;
                        }
            }
    return std::sqrt(sum);
}

std::string ConvergenceTable::to_csv() const {
    std::ostringstream os;
    os << "eps,field,error,observed_order\n";
    char buf[32];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g", r.eps);
        os << buf << ',' << r.field << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.error);
        os << buf << ',';
        if (r.has_order) {
            std::snprintf(buf, sizeof buf, "%.17g", r.order);
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

ConvergenceTable convergence_study(const VerifySetup& setup) {
    if (setup.eps_list.empty())
        throw std::runtime_error("convergence_study: empty eps list");
    for (std::size_t i = 1; i < setup.eps_list.size(); ++i)
        if (!(setup.eps_list[i] < setup.eps_list[i - 1]))
            throw std::runtime_error(
                "convergence_study: eps list must be strictly decreasing");
    if (setup.cell == nullptr)
        throw std::runtime_error("convergence_study: cell grid required");

    // homogenized reference, run once
    MacroConfig mc;
    mc.grid = build_macro(setup.box, setup.n_macro, setup.dim, setup.pad);
    mc.grid.pad = std::max(setup.pad, 2);
    mc.gamma = setup.gamma;
    mc.theta_c = setup.theta_c;
    mc.thermo = setup.thermo;
    mc.tensors = setup.tensors;
    mc.chi_bar = setup.macro_chi_init;
    mc.dt = setup.dt;
    mc.t_end = setup.t_check;
    mc.save_every = 1 << 30;
    mc.cg_tol = setup.cg_tol;
    mc.cg_max_iter = setup.cg_max_iter;
    mc.newton_tol = setup.newton_tol;
    mc.newton_max = setup.newton_max;
    mc.field_coupling = setup.field_coupling;
    mc.freeze_theta = setup.freeze_theta;
    MacroState ref = macro_run(mc, setup.m0, setup.theta0);

    ConvergenceTable table;
    const char* names[4] = {"v", "m1", "m2", "m3"};
    std::array<double, 4> prev_err{};
    bool have_prev = false;
    double prev_eps = 0.0;

    for (double eps : setup.eps_list) {
        const double h_micro = eps / setup.voxels_per_period;
        std::array<int, 3> n_micro;
        for (int a = 0; a < 3; ++a) {
            double cells = setup.box[a] / h_micro;
            n_micro[a] = static_cast<int>(std::lround(cells));
            if (a < setup.dim &&
                std::fabs(cells - n_micro[a]) > 1e-9 * cells)
                throw std::runtime_error(
                    "convergence_study: eps/voxels_per_period does not tile "
                    "the box");
        }

        MicroConfig micro;
        micro.grid = build_perforated_macro(setup.box, n_micro, setup.dim,
                                            eps, setup.hole, setup.cell);
        micro.eps = eps;
        micro.pad = std::max(setup.pad, 2);
        micro.A = setup.A;
        micro.K = setup.K;
        micro.mu = setup.mu;
        micro.gamma = setup.gamma;
        micro.theta_c = setup.theta_c;
        micro.thermo = setup.thermo;
        micro.dt = setup.dt;
        micro.t_end = setup.t_check;
        micro.save_every = 1 << 30;
        micro.cg_tol = setup.cg_tol;
        micro.cg_max_iter = setup.cg_max_iter;
        micro.newton_tol = setup.newton_tol;
        micro.newton_max = setup.newton_max;
        micro.field_coupling = setup.field_coupling;
        micro.freeze_theta = setup.freeze_theta;

        MicroState st = solve_micro(micro, setup.m0, setup.theta0);

        std::array<double, 4> err;
        err[0] = two_scale_error(micro.grid, st.v, mc.grid, ref.v,
                                 *setup.cell, eps);
        for (int c = 0; c < 3; ++c)
            err[c + 1] = two_scale_error(micro.grid, st.m[c], mc.grid,
                                         ref.m[c], *setup.cell, eps);

        for (int f = 0; f < 4; ++f) {
            ConvergenceRow row;
            row.eps = eps;
            row.field = names[f];
            row.error = err[f];
            if (have_prev && err[f] > 1e-300 && prev_err[f] > 1e-300) {
                row.has_order = true;
                row.order = std::log(prev_err[f] / err[f]) /
                            std::log(prev_eps / eps);
            }
            table.rows.push_back(row);
        }
        prev_err = err;
        prev_eps = eps;
        have_prev = true;
    }
    return table;
}

}  // namespace perfomag
