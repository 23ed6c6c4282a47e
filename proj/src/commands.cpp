#include "perfomag/commands.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "perfomag/io.hpp"

namespace perfomag {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_position(std::uint64_t seed, const Vec3& x) {
    std::uint64_t h = splitmix64(seed);
    for (int a = 0; a < 3; ++a) {
        std::uint64_t bits;
        double v = x[a];
        std::memcpy(&bits, &v, sizeof bits);
        h = splitmix64(h ^ bits);
    }
    return h;
}

double unit_double(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

void write_provenance(const SimConfig& cfg, const std::string& out_dir) {
    atomic_write(out_dir + "/config.ini", cfg.raw_text);
}

bool all_tensors_overridden(const SimConfig& cfg) {
    return cfg.ov_A_star && cfg.ov_K_star && cfg.ov_mu_star_in &&
           cfg.ov_mu_star_out && cfg.ov_mu_bar && cfg.ov_H1 && cfg.ov_H2;
}

}  // namespace

CellGrid build_cell_from_config(const SimConfig& cfg) {
    return build_cell_grid(cfg.cell_n, cfg.dim, cfg.hole);
}

EffectiveTensors compute_tensors(const SimConfig& cfg,
                                 CorrectorSet* correctors_out,
                                 CellGrid* grid_storage) {
    EffectiveTensors t;
    if (all_tensors_overridden(cfg) && cfg.ov_chi_bar) {
        t.A_star = *cfg.ov_A_star;
        t.K_star = *cfg.ov_K_star;
        t.mu_star_in = *cfg.ov_mu_star_in;
        t.mu_star_out = *cfg.ov_mu_star_out;
        t.mu_bar = *cfg.ov_mu_bar;
        t.H1 = *cfg.ov_H1;
        t.H2 = *cfg.ov_H2;
        t.chi_bar = *cfg.ov_chi_bar;
        t.curie = curie_tensor(t.H2, cfg.theta_c);
        return t;
    }

    if (correctors_out && !grid_storage)
        throw std::logic_error(
            "compute_tensors: correctors reference the cell grid; pass "
            "grid_storage");
    CellGrid local_grid;
    CellGrid& grid = grid_storage ? *grid_storage : local_grid;
    grid = build_cell_from_config(cfg);
    CorrectorOptions opts;
    opts.tol = cfg.cg_tol;
    opts.max_iter = cfg.cg_max_iter;
    opts.omega2_source = cfg.omega2_source;
    CorrectorSet set = solve_all_correctors(
        grid, cfg.A.fn(cfg.dim), cfg.K.fn(cfg.dim), cfg.mu.fn(cfg.dim), opts);
    t = assemble_effective_tensors(grid, cfg.A.fn(cfg.dim), cfg.K.fn(cfg.dim),
                                   cfg.mu.fn(cfg.dim), set, cfg.theta_c);
    if (correctors_out) *correctors_out = std::move(set);

    if (cfg.ov_A_star) t.A_star = *cfg.ov_A_star;
    if (cfg.ov_K_star) t.K_star = *cfg.ov_K_star;
    if (cfg.ov_mu_star_in) t.mu_star_in = *cfg.ov_mu_star_in;
    if (cfg.ov_mu_star_out) t.mu_star_out = *cfg.ov_mu_star_out;
    if (cfg.ov_mu_bar) t.mu_bar = *cfg.ov_mu_bar;
    if (cfg.ov_H1) t.H1 = *cfg.ov_H1;
    if (cfg.ov_H2) {
        t.H2 = *cfg.ov_H2;
        t.curie = curie_tensor(t.H2, cfg.theta_c);
    }
    if (cfg.ov_chi_bar) t.chi_bar = *cfg.ov_chi_bar;
    return t;
}

VectorInit make_m0_init(const SimConfig& cfg) {
    const InitSpec spec = cfg.m0;
    const std::uint64_t seed = cfg.seed;
    if (spec.kind == InitSpec::Kind::random) {
        const double amp = spec.amp;
        return [seed, amp](const Vec3& x) {
            std::uint64_t h = hash_position(seed, x);
            Vec3 out;
            for (int c = 0; c < 3; ++c) {
                h = splitmix64(h);
                out[c] = amp * (2.0 * unit_double(h) - 1.0);
            }
            return out;
        };
    }
    const Vec3 u = spec.uniform_vec;
    return [u](const Vec3&) { return u; };
}

ScalarInit make_theta0_init(const SimConfig& cfg) {
    const InitSpec spec = cfg.theta0;
    const int dim = cfg.dim;
    if (spec.kind == InitSpec::Kind::bump) {
        return [spec, dim](const Vec3& x) {
            double r2 = 0.0;
            for (int a = 0; a < dim; ++a) {
                double d = x[a] - spec.center[a];
                r2 += d * d;
            }
            return spec.base +
                   spec.amp * std::exp(-r2 / (spec.width * spec.width));
        };
    }
    const double v = spec.uniform_val;
    return [v](const Vec3&) { return v; };
}

MacroConfig build_macro_config(const SimConfig& cfg,
                               const EffectiveTensors& tensors) {
    MacroConfig mc;
    mc.grid = build_macro(cfg.box, cfg.n_macro, cfg.dim, cfg.pad_cells());
    mc.gamma = cfg.gamma;
    mc.theta_c = cfg.theta_c;
    mc.thermo = ThermoParams::make(cfg.c1, cfg.c2, cfg.k0, cfg.k1);
    mc.tensors = tensors;
    mc.chi_bar = tensors.chi_bar;
    mc.dt = cfg.dt;
    mc.t_end = cfg.t_end;
    mc.save_every = cfg.save_every;
    mc.cg_tol = cfg.cg_tol;
    mc.cg_max_iter = cfg.cg_max_iter;
    mc.newton_tol = cfg.newton_tol;
    mc.newton_max = cfg.newton_max;
    mc.field_coupling = cfg.field_coupling;
    mc.freeze_theta = cfg.freeze_theta;
    return mc;
}

std::string default_out_dir(const std::string& command,
                            const std::string& config_path) {
    std::filesystem::path p(config_path.empty() ? "run" : config_path);
    return "out/" + command + "/" + p.stem().string();
}

namespace {

const char* kind_name(CorrectorKind kind, CellDomain domain) {
    switch (kind) {
        case CorrectorKind::omega_A:
            return "omega_A";
        case CorrectorKind::omega_hat_K:
            return "omega_hat_K";
        case CorrectorKind::omega_bar1_mu:
            return domain == CellDomain::material ? "omega_bar1_int"
                                                  : "omega_bar1_ext";
        case CorrectorKind::omega_bar2_mu:
            return "omega_bar2";
    }
    return "corrector";
}

void export_family(const std::vector<CorrectorField>& family,
                   const CellGrid& grid, const std::string& out_dir,
                   std::vector<SolveLogEntry>& log) {
    for (const auto& corr : family) {
        std::string base = std::string(kind_name(corr.kind, corr.domain)) +
                           "_" + std::to_string(corr.direction + 1);
        write_vtk_cell_scalar(out_dir + "/" + base + ".vtk", grid,
                              corr.values, base);
        SolveLogEntry e;
        e.context = base;
        e.step = 0;
        e.iterations = corr.report.iterations;
        e.rel_residual = corr.report.rel_residual;
        e.converged = corr.report.converged;
        log.push_back(e);
    }
}

}  // namespace

void cmd_cell(const SimConfig& cfg, const std::string& out_dir) {
    CellGrid grid = build_cell_from_config(cfg);
    CorrectorOptions opts;
    opts.tol = cfg.cg_tol;
    opts.max_iter = cfg.cg_max_iter;
    opts.omega2_source = cfg.omega2_source;
    CorrectorSet set =
        solve_all_correctors(grid, cfg.A.fn(cfg.dim), cfg.K.fn(cfg.dim),
                             cfg.mu.fn(cfg.dim), opts);

    std::vector<SolveLogEntry> log;
    export_family(set.omega_A, grid, out_dir, log);
    export_family(set.omega_hat_K, grid, out_dir, log);
    export_family(set.bar1_interior, grid, out_dir, log);
    export_family(set.bar1_exterior, grid, out_dir, log);
    export_family(set.bar2, grid, out_dir, log);

    std::vector<double> mask_field(grid.size());
    for (std::size_t v = 0; v < grid.size(); ++v)
        mask_field[v] = grid.mask[v] ? 1.0 : 0.0;
    write_vtk_cell_scalar(out_dir + "/mask.vtk", grid, mask_field, "chi");
    write_mask(out_dir + "/mask.pmsk", grid);

    atomic_write(out_dir + "/run_log.csv", render_solve_log_csv(log));
    write_provenance(cfg, out_dir);
}

void cmd_tensors(const SimConfig& cfg, const std::string& out_dir) {
    CellGrid grid;
    EffectiveTensors t = compute_tensors(cfg, nullptr, &grid);
    TensorReport report = tensor_report(t);

    if (grid.n > 0) {
        Mat3 voigt = voigt_tensor(grid, cfg.A.fn(cfg.dim));
        const double s = 1.0 / std::sqrt(2.0);
        const double u = 1.0 / std::sqrt(3.0);
        const Vec3 dirs[7] = {{1, 0, 0}, {0, 1, 0},  {0, 0, 1},  {s, s, 0},
                              {s, 0, s}, {0, s, s},  {u, u, u}};
        const int count = cfg.dim == 3 ? 7 : 4;
        const Vec3 dirs2[4] = {{1, 0, 0}, {0, 1, 0}, {s, s, 0}, {0, 0, 1}};
        for (int i = 0; i < count; ++i) {
            Vec3 x = cfg.dim == 3 ? dirs[i] : dirs2[i];
            Mat3 diff = voigt - t.A_star;
            report.voigt_margins.push_back(x.dot(diff * x));
        }
    }

    atomic_write(out_dir + "/tensors.csv", report.to_csv());
    atomic_write(out_dir + "/tensors.txt", report.to_text());
    write_provenance(cfg, out_dir);
}

void cmd_curie(const SimConfig& cfg, const std::string& out_dir) {
    EffectiveTensors t = compute_tensors(cfg);
    const CurieTensor& ct = t.curie;

    std::ostringstream csv;
    csv << "quantity,entry_i,entry_j,value\n";
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            csv << "Theta_c," << i + 1 << ',' << j + 1 << ','
                << format_double(ct.Theta_c(i, j)) << '\n';
    for (int i = 0; i < 3; ++i)
        csv << "eigenvalue," << i + 1 << ",0,"
            << format_double(ct.eigenvalues[i]) << '\n';
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            csv << "eigenvector," << i + 1 << ',' << j + 1 << ','
                << format_double(ct.eigenvectors(i, j)) << '\n';
    csv << "theta_c_scalar,0,0," << format_double(ct.theta_c_scalar) << '\n';
    csv << "H2_asymmetry_defect,0,0," << format_double(ct.asymmetry_defect)
        << '\n';
    atomic_write(out_dir + "/curie.csv", csv.str());

    std::ostringstream txt;
    txt << "Curie temperature tensor Theta_c = theta_c I + sym(H2), theta_c = "
        << format_double(ct.theta_c_scalar) << "\n\n";
    for (int i = 0; i < 3; ++i) {
        txt << "  [";
        for (int j = 0; j < 3; ++j)
            txt << (j ? ", " : " ") << format_double(ct.Theta_c(i, j));
        txt << " ]\n";
    }
    txt << "\neigenvalues (ascending): " << format_double(ct.eigenvalues[0])
        << ", " << format_double(ct.eigenvalues[1]) << ", "
        << format_double(ct.eigenvalues[2]) << '\n'
        << "H2 asymmetry defect: " << format_double(ct.asymmetry_defect)
        << '\n'
        << "uniform theta above the largest eigenvalue keeps m = 0 stable;\n"
           "below the smallest one the zero state loses stability.\n";
    atomic_write(out_dir + "/curie.txt", txt.str());
    write_provenance(cfg, out_dir);
}

namespace {

class FileRunSink : public RunSink {
  public:
    FileRunSink(std::string out_dir, const MacroGrid& grid)
        : out_dir_(std::move(out_dir)), grid_(grid) {}

    void on_snapshot(const CoupledState& state, int step) override {
        char name[64];
        std::snprintf(name, sizeof name, "/snap_%06d.vtk", step);
        write_vtk_snapshot(out_dir_ + name, grid_, state);
    }
    void on_energy(const EnergyRecord& e) override { energy_.push_back(e); }
    void on_solve(const SolveLogEntry& e) override { solves_.push_back(e); }

    void flush() {
        atomic_write(out_dir_ + "/energy.csv", render_energy_csv(energy_));
        atomic_write(out_dir_ + "/run_log.csv",
                     render_solve_log_csv(solves_));
    }

    const std::vector<EnergyRecord>& energy() const { return energy_; }

  private:
    std::string out_dir_;
    MacroGrid grid_;
    std::vector<EnergyRecord> energy_;
    std::vector<SolveLogEntry> solves_;
};

}  // namespace

void cmd_simulate(const SimConfig& cfg, const std::string& out_dir) {
    EffectiveTensors t = compute_tensors(cfg);
    MacroConfig mc = build_macro_config(cfg, t);
    mc.grid.pad = cfg.pad_cells();
    FileRunSink sink(out_dir, mc.grid);
    MacroState final_state;
    try {
        final_state =
            macro_run(mc, make_m0_init(cfg), make_theta0_init(cfg), &sink);
    } catch (...) {
        sink.flush();  // partial outputs stay readable
        throw;
    }
    sink.flush();

    std::ostringstream txt;
    const auto& energy = sink.energy();
    txt << "final time " << format_double(final_state.t) << ", max |m| "
        << format_double(max_abs_m(final_state)) << '\n';
    if (!energy.empty()) {
        double emax = 0.0;
        for (const auto& e : energy) emax = std::max(emax, e.total);
        txt << "E(0) = " << format_double(energy.front().total)
            << ", max E = " << format_double(emax)
            << ", fitted Gronwall growth constant = "
            << format_double(fit_growth_constant(energy)) << '\n';
    }
    atomic_write(out_dir + "/summary.txt", txt.str());
    write_provenance(cfg, out_dir);
}

VerifySetup build_verify_setup(const SimConfig& cfg, const CellGrid& cell,
                               const EffectiveTensors& tensors) {
    VerifySetup s;
    s.box = cfg.box;
    s.n_macro = cfg.n_macro;
    s.dim = cfg.dim;
    s.hole = cfg.hole;
    s.cell = &cell;
    s.voxels_per_period = cfg.voxels_per_period;
    s.eps_list = cfg.eps_list;
    s.t_check = cfg.t_check;
    s.gamma = cfg.gamma;
    s.theta_c = cfg.theta_c;
    s.thermo = ThermoParams::make(cfg.c1, cfg.c2, cfg.k0, cfg.k1);
    s.A = cfg.A.fn(cfg.dim);
    s.K = cfg.K.fn(cfg.dim);
    s.mu = cfg.mu.fn(cfg.dim);

    // Limit-consistent reference: the perforated medium's time derivative
    // carries the porosity, so the coarse model that the fine solution
    // converges to uses tensors scaled by 1/chi_bar and unscaled initial
    // data.
    s.tensors = tensors;
    const double inv_chi = 1.0 / tensors.chi_bar;
    s.tensors.A_star = tensors.A_star * inv_chi;
    s.tensors.K_star = tensors.K_star * inv_chi;
    s.macro_chi_init = 1.0;

    s.dt = cfg.dt;
    s.cg_tol = cfg.cg_tol;
    s.cg_max_iter = cfg.cg_max_iter;
    s.newton_tol = cfg.newton_tol;
    s.newton_max = cfg.newton_max;
    s.field_coupling = false;
    s.freeze_theta = cfg.freeze_theta;
    s.pad = 2;
    s.m0 = make_m0_init(cfg);
    s.theta0 = make_theta0_init(cfg);
    return s;
}

void cmd_verify(const SimConfig& cfg, const std::string& out_dir) {
    SimConfig cell_cfg = cfg;
    cell_cfg.cell_n = cfg.voxels_per_period;
    CellGrid cell = build_cell_from_config(cell_cfg);

    CorrectorOptions opts;
    opts.tol = cfg.cg_tol;
    opts.max_iter = cfg.cg_max_iter;
    opts.omega2_source = cfg.omega2_source;
    CorrectorSet set = solve_all_correctors(cell, cfg.A.fn(cfg.dim),
                                            cfg.K.fn(cfg.dim),
                                            cfg.mu.fn(cfg.dim), opts);
    EffectiveTensors tensors = assemble_effective_tensors(
        cell, cfg.A.fn(cfg.dim), cfg.K.fn(cfg.dim), cfg.mu.fn(cfg.dim), set,
        cfg.theta_c);

    VerifySetup setup = build_verify_setup(cfg, cell, tensors);
    ConvergenceTable table = convergence_study(setup);
    atomic_write(out_dir + "/verify.csv", table.to_csv());

    std::ostringstream txt;
    txt << "two-scale convergence study: |v_eps o S_eps - chi v| at t = "
        << format_double(cfg.t_check) << "\n";
    for (const auto& r : table.rows) {
        if (r.field != "v") continue;
        txt << "  eps = " << format_double(r.eps)
            << "  error = " << format_double(r.error);
        if (r.has_order) txt << "  observed order = " << format_double(r.order);
        txt << '\n';
    }
    atomic_write(out_dir + "/summary.txt", txt.str());
    write_provenance(cfg, out_dir);
}

}  // namespace perfomag
