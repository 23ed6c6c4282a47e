#include "perfomag/macro.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace perfomag {

namespace {

MacroGrid padded_grid(const MacroGrid& domain, int pad) {
    MacroGrid g = domain;
    g.pad = 0;
    g.epsilon.reset();
    const int pz = domain.dim == 3 ? pad : 0;
    g.n = {domain.n[0] + 2 * pad, domain.n[1] + 2 * pad,
           domain.dim == 3 ? domain.n[2] + 2 * pz : 1};
    g.box_len = {domain.box_len[0] + 2 * pad * domain.h,
                 domain.box_len[1] + 2 * pad * domain.h,
                 domain.dim == 3 ? domain.box_len[2] + 2 * pz * domain.h : 1.0};
    g.mask.assign(static_cast<std::size_t>(g.n[0]) * g.n[1] *
                      (g.dim == 3 ? g.n[2] : 1),
                  1);
    // holes of the domain grid are excluded from the magnetostatic unknowns
    const int nz = domain.dim == 3 ? domain.n[2] : 1;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < domain.n[1]; ++j)
            for (int i = 0; i < domain.n[0]; ++i)
                if (!domain.material(i, j, k))
                    g.mask[g.index(i + pad, j + pad, k + pz)] = 0;
    return g;
}

}  // namespace

CoupledSim::CoupledSim(Problem problem) : prob_(std::move(problem)) {
    if (!(prob_.dt > 0.0)) throw std::runtime_error("stepper: dt must be > 0");
    if (prob_.pad < 2) throw std::runtime_error("stepper: pad must be >= 2");

    const MacroGrid& g = prob_.grid;
    const int nz = g.dim == 3 ? g.n[2] : 1;

    domain_spec_.n = {g.n[0], g.n[1], nz};
    domain_spec_.dim = g.dim;
    domain_spec_.h = g.h;
    domain_spec_.bc = Bc::box_neumann;
    domain_spec_.mask = &prob_.grid.mask;

    A_op_ = assemble_elliptic(domain_spec_, prob_.A, Bc::box_neumann);

    field_grid_ = padded_grid(g, prob_.pad);
    field_spec_.n = field_grid_.n;
    field_spec_.dim = g.dim;
    field_spec_.h = g.h;
    field_spec_.bc = Bc::box_neumann;
    field_spec_.mask = &field_grid_.mask;

    if (prob_.field_coupling)
        mu_op_ = assemble_elliptic(field_spec_, prob_.mu_field,
                                   Bc::box_neumann);

    const int pz = g.dim == 3 ? prob_.pad : 0;
    field_voxel_of_domain_.assign(g.size(), -1);
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i)
                field_voxel_of_domain_[g.index(i, j, k)] =
                    static_cast<int>(field_grid_.index(
                        i + prob_.pad, j + prob_.pad, k + pz));
}

void CoupledSim::log_solve(const std::string& context,
                           const SolveReport& rep) {
    if (!sink_) return;
    SolveLogEntry e;
    e.context = context;
    e.step = step_count_;
    e.iterations = rep.iterations;
    e.rel_residual = rep.rel_residual;
    e.converged = rep.converged;
    sink_->on_solve(e);
}

std::vector<double> CoupledSim::gather(const std::vector<double>& full,
                                       const SparseOperator& op) const {
    std::vector<double> out(op.n_rows);
    for (int u = 0; u < op.n_rows; ++u) out[u] = full[op.unknown_to_voxel[u]];
    return out;
}

void CoupledSim::scatter(const std::vector<double>& packed,
                         const SparseOperator& op,
                         std::vector<double>& full) const {
    for (int u = 0; u < op.n_rows; ++u) full[op.unknown_to_voxel[u]] = packed[u];
}

Vec3 CoupledSim::grad_phi_at(const std::vector<double>& phi, int i, int j,
                             int k) const {
    const MacroGrid& g = prob_.grid;
    const int pz = g.dim == 3 ? prob_.pad : 0;
    const int fi = i + prob_.pad, fj = j + prob_.pad, fk = k + pz;
    Vec3 grad;
    for (int d = 0; d < g.dim; ++d) {
        int cp[3] = {fi, fj, fk}, cm[3] = {fi, fj, fk};
        cp[d] += 1;
        cm[d] -= 1;
        auto at = [&](const int c[3]) -> const double* {
            if (c[0] < 0 || c[0] >= field_grid_.n[0] || c[1] < 0 ||
                c[1] >= field_grid_.n[1] || c[2] < 0 ||
                c[2] >= (g.dim == 3 ? field_grid_.n[2] : 1))
                return nullptr;
            std::size_t v = field_grid_.index(c[0], c[1], c[2]);
            if (field_grid_.mask[v] == 0) return nullptr;
            return &phi[v];
        };
        const double* pp = at(cp);
        const double* pm = at(cm);
        std::size_t self = field_grid_.index(fi, fj, fk);
        if (pp && pm)
            grad[d] = (*pp - *pm) / (2.0 * g.h);
        else if (pp)
            grad[d] = (*pp - phi[self]) / g.h;
        else if (pm)
            grad[d] = (phi[self] - *pm) / g.h;
    }
    return grad;
}

std::vector<double> CoupledSim::magnetostatic_solve(
    const std::array<std::vector<double>, 3>& m,
    const std::vector<double>* phi_warm) {
    if (!prob_.field_coupling)
        return std::vector<double>(field_grid_.size(), 0.0);

    const MacroGrid& g = prob_.grid;
    const MacroGrid& fg = field_grid_;
    const int fnz = g.dim == 3 ? fg.n[2] : 1;
    const double h = g.h;
    const int pz = g.dim == 3 ? prob_.pad : 0;

    // source s = chi_Omega H1 m at padded-box voxels
    std::array<std::vector<double>, 3> s;
    for (int c = 0; c < 3; ++c) s[c].assign(fg.size(), 0.0);
    const int nz = g.dim == 3 ? g.n[2] : 1;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                std::size_t dv = g.index(i, j, k);
                if (!g.material(i, j, k)) continue;
                Vec3 mv = {m[0][dv], m[1][dv], m[2][dv]};
                Vec3 sv = prob_.H1 * mv;
                std::size_t fv = fg.index(i + prob_.pad, j + prob_.pad,
                                          k + pz);
                for (int c = 0; c < 3; ++c) s[c][fv] = sv[c];
            }

    // b = div(s): face-averaged divergence over material-material faces
    std::vector<double> b(mu_op_.n_rows, 0.0);
    for (int k = 0; k < fnz; ++k)
        for (int j = 0; j < fg.n[1]; ++j)
            for (int i = 0; i < fg.n[0]; ++i) {
                std::size_t v = fg.index(i, j, k);
                int r = mu_op_.voxel_to_unknown[v];
                if (r < 0) continue;
                double div = 0.0;
                for (int d = 0; d < g.dim; ++d)
                    for (int side = -1; side <= 1; side += 2) {
                        int c[3] = {i, j, k};
                        c[d] += side;
                        if (c[0] < 0 || c[0] >= fg.n[0] || c[1] < 0 ||
                            c[1] >= fg.n[1] || c[2] < 0 || c[2] >= fnz)
                            continue;  // outer Neumann face: no flux
                        std::size_t q = fg.index(c[0], c[1], c[2]);
                        if (mu_op_.voxel_to_unknown[q] < 0)
                            continue;  // hole face carries the full no-flux BC
                        double face = 0.5 * (s[d][v] + s[d][q]);
                        div += side * face / h;
                    }
                b[r] = div;
            }

    std::vector<double> x0;
    if (phi_warm && !phi_warm->empty()) x0 = gather(*phi_warm, mu_op_);
    int max_iter = prob_.cg_max_iter > 0
                       ? prob_.cg_max_iter
                       : default_max_iter(mu_op_.n_rows, prob_.grid.dim);
    auto [x, rep] = solve_spd(mu_op_, b, prob_.cg_tol, true, max_iter, nullptr,
                              x0.empty() ? nullptr : &x0);
    log_solve("phi", rep);
    if (!rep.converged) {
        std::ostringstream msg;
        msg << "magnetostatic solve did not converge (iterations="
            << rep.iterations << ", rel_residual=" << rep.rel_residual << ")";
        throw std::runtime_error(msg.str());
    }
    std::vector<double> phi(fg.size(), 0.0);
    scatter(x, mu_op_, phi);
    return phi;
}

CoupledState CoupledSim::init_state(const VectorInit& m0,
                                    const ScalarInit& theta0) {
    const MacroGrid& g = prob_.grid;
    const int nz = g.dim == 3 ? g.n[2] : 1;
    CoupledState st;
    st.t = 0.0;
    for (int c = 0; c < 3; ++c) st.m[c].assign(g.size(), 0.0);
    st.v.assign(g.size(), 0.0);
    st.theta.assign(g.size(), 0.0);

    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                if (!g.material(i, j, k)) continue;
                std::size_t v = g.index(i, j, k);
                Vec3 x = g.voxel_center(i, j, k);
                double th0 = theta0(x);
                if (!(th0 > 0.0))
                    throw std::runtime_error(
                        "init_state: theta0 must be positive everywhere");
                Vec3 mv = m0(x);
                for (int c = 0; c < 3; ++c)
                    st.m[c][v] = prob_.chi_init * mv[c];
                st.v[v] = prob_.chi_init * thermo_F(th0, prob_.thermo);
                st.theta[v] = thermo_G_checked(st.v[v], prob_.thermo,
                                               prob_.newton_tol,
                                               prob_.newton_max)
                                  .theta;
            }

    st.phi = magnetostatic_solve(st.m, nullptr);
    if (st.phi.empty()) st.phi.assign(field_grid_.size(), 0.0);
    return st;
}

void CoupledSim::step(CoupledState& state) {
    const MacroGrid& g = prob_.grid;
    const int nz = g.dim == 3 ? g.n[2] : 1;
    const double dt = prob_.dt;
    const double gdt = prob_.gamma / dt;
    const int n_unknowns = A_op_.n_rows;
    int max_iter = prob_.cg_max_iter > 0
                       ? prob_.cg_max_iter
                       : default_max_iter(n_unknowns, g.dim);

    // (i) m-update: (gamma/dt + theta_c |m_old|^2 + G(v_old)) m_new
    //               - div(A grad m_new)
    //             = (gamma/dt) m_old + theta_c m_old
    //               + mu_bar grad phi_old + H2 m_old
    std::vector<double> shift(n_unknowns);
    std::array<std::vector<double>, 3> rhs;
    for (int c = 0; c < 3; ++c) rhs[c].assign(n_unknowns, 0.0);
    for (int u = 0; u < n_unknowns; ++u) {
        std::size_t v = A_op_.unknown_to_voxel[u];
        double m2 = state.m[0][v] * state.m[0][v] +
                    state.m[1][v] * state.m[1][v] +
                    state.m[2][v] * state.m[2][v];
        shift[u] = gdt + prob_.theta_c * m2 + state.theta[v];
    }
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                std::size_t v = g.index(i, j, k);
                int u = A_op_.voxel_to_unknown[v];
                if (u < 0) continue;
                Vec3 mold = {state.m[0][v], state.m[1][v], state.m[2][v]};
                Vec3 r = mold * (gdt + prob_.theta_c);
                if (prob_.field_coupling) {
                    Vec3 gp = grad_phi_at(state.phi, i, j, k);
                    r = r + prob_.mu_bar * gp + prob_.H2 * mold;
                }
                for (int c = 0; c < 3; ++c) rhs[c][u] = r[c];
            }

    std::array<std::vector<double>, 3> m_old = state.m;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> x0 = gather(state.m[c], A_op_);
        auto [x, rep] = solve_spd(A_op_, rhs[c], prob_.cg_tol, false, max_iter,
                                  &shift, &x0);
        log_solve("m" + std::to_string(c), rep);
        if (!rep.converged)
            throw std::runtime_error("m-update CG did not converge");
        scatter(x, A_op_, state.m[c]);
    }

    // (ii) v-update with frozen mobility g(G(v_old)) and the m . dm/dt
    // source; skipped entirely when the temperature is held.
    if (!prob_.freeze_theta) {
        std::vector<double> gtheta(g.size(), 0.0);
        for (int u = 0; u < n_unknowns; ++u) {
            std::size_t v = A_op_.unknown_to_voxel[u];
            gtheta[v] = thermo_g(state.theta[v], prob_.thermo);
        }
        SparseOperator K_op = assemble_elliptic(
            domain_spec_,
            [&](int i, int j, int k) {
                std::size_t v = g.index(i, j, k);
                return prob_.K(i, j, k) * gtheta[v];
            },
            Bc::box_neumann);
        std::vector<double> vshift(n_unknowns, 1.0 / dt);
        std::vector<double> vrhs(n_unknowns);
        for (int u = 0; u < n_unknowns; ++u) {
            std::size_t v = K_op.unknown_to_voxel[u];
            double source = 0.0;
            for (int c = 0; c < 3; ++c)
                source += state.m[c][v] * (state.m[c][v] - m_old[c][v]) / dt;
            vrhs[u] = state.v[v] / dt + source;
        }
        std::vector<double> x0 = gather(state.v, K_op);
        auto [x, rep] = solve_spd(K_op, vrhs, prob_.cg_tol, false, max_iter,
                                  &vshift, &x0);
        log_solve("v", rep);
        if (!rep.converged)
            throw std::runtime_error("v-update CG did not converge");
        scatter(x, K_op, state.v);
        for (int u = 0; u < n_unknowns; ++u) {
            std::size_t v = K_op.unknown_to_voxel[u];
            state.theta[v] = thermo_G_checked(state.v[v], prob_.thermo,
                                              prob_.newton_tol,
                                              prob_.newton_max)
                                 .theta;
        }
    }

    // (iii) magnetostatic refresh
    if (prob_.field_coupling)
        state.phi = magnetostatic_solve(state.m, &state.phi);

    state.t += dt;
}

EnergyRecord CoupledSim::energy(const CoupledState& state) const {
    const MacroGrid& g = prob_.grid;
    const double vol = std::pow(g.h, g.dim);
    EnergyRecord e;
    e.t = state.t;

    // gradient term through the assembled operator's quadratic form
    for (int c = 0; c < 3; ++c) {
        std::vector<double> x = gather(state.m[c], A_op_);
        std::vector<double> y(x.size());
        A_op_.apply(x.data(), y.data());
        double q = 0.0;
        for (std::size_t u = 0; u < x.size(); ++u) q += x[u] * y[u];
        e.grad += 0.5 * vol * q;
    }

    for (int u = 0; u < A_op_.n_rows; ++u) {
        std::size_t v = A_op_.unknown_to_voxel[u];
        double m2 = state.m[0][v] * state.m[0][v] +
                    state.m[1][v] * state.m[1][v] +
                    state.m[2][v] * state.m[2][v];
        e.quartic += 0.25 * prob_.theta_c * vol * m2 * m2;
        e.thermal += vol * (0.5 * prob_.thermo.c2 * state.theta[v] *
                                state.theta[v] +
                            prob_.thermo.c1 * state.theta[v]);
    }

    if (prob_.field_coupling && !state.phi.empty()) {
        std::vector<double> x = gather(state.phi, mu_op_);
        std::vector<double> y(x.size());
        mu_op_.apply(x.data(), y.data());
        double q = 0.0;
        for (std::size_t u = 0; u < x.size(); ++u) q += x[u] * y[u];
        e.field = 0.5 * vol * q;
    }

    e.total = e.grad + e.quartic + e.thermal + e.field;
    return e;
}

CoupledState CoupledSim::run(const VectorInit& m0, const ScalarInit& theta0,
                             RunSink* sink) {
    sink_ = sink;
    step_count_ = 0;
    CoupledState state = init_state(m0, theta0);
    if (sink) {
        sink->on_snapshot(state, 0);
        sink->on_energy(energy(state));
    }
    const long nsteps = std::lround(prob_.t_end / prob_.dt);
    for (long s = 1; s <= nsteps; ++s) {
        step_count_ = static_cast<int>(s);
        step(state);
        if (sink) {
            sink->on_energy(energy(state));
            if (s % prob_.save_every == 0 || s == nsteps)
                sink->on_snapshot(state, static_cast<int>(s));
        }
    }
    sink_ = nullptr;
    return state;
}

CoupledSim::Problem make_macro_problem(const MacroConfig& cfg) {
    CoupledSim::Problem p;
    p.grid = cfg.grid;
    p.pad = cfg.grid.pad;
    const Mat3 A_star = cfg.tensors.A_star;
    const Mat3 K_star = cfg.tensors.K_star;
    p.A = [A_star](int, int, int) { return A_star; };
    p.K = [K_star](int, int, int) { return K_star; };

    // mu*_in inside Omega, mu*_out in the far-field padding
    const Mat3 mu_in = cfg.tensors.mu_star_in;
    const Mat3 mu_out = cfg.tensors.mu_star_out;
    const int pad = cfg.grid.pad;
    const int pz = cfg.grid.dim == 3 ? pad : 0;
    const std::array<int, 3> n = cfg.grid.n;
    const int dim = cfg.grid.dim;
    p.mu_field = [mu_in, mu_out, pad, pz, n, dim](int i, int j, int k) {
        bool inside = i >= pad && i < pad + n[0] && j >= pad &&
                      j < pad + n[1] &&
                      (dim == 2 || (k >= pz && k < pz + n[2]));
        return inside ? mu_in : mu_out;
    };
    p.H1 = cfg.tensors.H1;
    p.mu_bar = cfg.tensors.mu_bar;
    p.H2 = cfg.tensors.H2;
    p.gamma = cfg.gamma;
    p.theta_c = cfg.theta_c;
    p.thermo = cfg.thermo;
    p.chi_init = cfg.chi_bar;
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

MacroState macro_init_state(const MacroConfig& cfg, const VectorInit& m0,
                            const ScalarInit& theta0) {
    CoupledSim sim(make_macro_problem(cfg));
    return sim.init_state(m0, theta0);
}

MacroState macro_run(const MacroConfig& cfg, const VectorInit& m0,
                     const ScalarInit& theta0, RunSink* sink) {
    CoupledSim sim(make_macro_problem(cfg));
    return sim.run(m0, theta0, sink);
}

double max_abs_m(const CoupledState& state) {
    double mx = 0.0;
    for (std::size_t v = 0; v < state.v.size(); ++v) {
        double m2 = state.m[0][v] * state.m[0][v] +
                    state.m[1][v] * state.m[1][v] +
                    state.m[2][v] * state.m[2][v];
        mx = std::max(mx, m2);
    }
    return std::sqrt(mx);
}

double fit_growth_constant(const std::vector<EnergyRecord>& records) {
    if (records.empty()) return 0.0;
    const double e0 = records.front().total;
    if (!(e0 > 0.0)) return 0.0;
    double c = 0.0;
    for (const EnergyRecord& e : records) {
        if (e.t <= 0.0 || e.total <= e0) continue;
        c = std::max(c, std::log(e.total / e0) / e.t);
    }
    return c;
}

}  // namespace perfomag
