#ifndef PERFOMAG_MACRO_HPP
#define PERFOMAG_MACRO_HPP

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "perfomag/geometry.hpp"
#include "perfomag/linsolve.hpp"
#include "perfomag/smallmat.hpp"
#include "perfomag/tensors.hpp"
#include "perfomag/thermo.hpp"

namespace perfomag {

// Discretized fields at one time level. m and v live on the domain grid
// (zero in hole voxels); phi lives on the padded magnetostatic box with a
// zero-mean gauge; theta caches G(v) on material voxels.
struct CoupledState {
    double t = 0.0;
    std::array<std::vector<double>, 3> m;
    std::vector<double> v;
    std::vector<double> phi;
    std::vector<double> theta;
};
using MacroState = CoupledState;
using MicroState = CoupledState;

struct EnergyRecord {
    double t = 0.0;
    double grad = 0.0;     // 1/2 int A grad m : grad m
    double quartic = 0.0;  // (theta_c/4) ||m||_L4^4
    double thermal = 0.0;  // (c2/2) ||theta||^2 + c1 int theta
    double field = 0.0;    // 1/2 int mu grad phi . grad phi
    double total = 0.0;
};

struct SolveLogEntry {
    std::string context;
    int step = 0;
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

class RunSink {
  public:
    virtual ~RunSink() = default;
    virtual void on_snapshot(const CoupledState&, int /*step*/) {}
    virtual void on_energy(const EnergyRecord&) {}
    virtual void on_solve(const SolveLogEntry&) {}
};

using ScalarInit = std::function<double(const Vec3&)>;
using VectorInit = std::function<Vec3(const Vec3&)>;

struct MacroConfig {
    MacroGrid grid;  // Omega; mask all-true for the homogenized model
    double gamma = 1.0;
    double theta_c = 1.0;
    ThermoParams thermo;
    EffectiveTensors tensors;
    double chi_bar = 1.0;  // initial-data scaling, normally tensors.chi_bar
    double dt = 1e-2;
    double t_end = 1.0;
    int save_every = 10;
    double cg_tol = 1e-10;
    int cg_max_iter = 0;  // 0 = default budget
    double newton_tol = 1e-13;
    int newton_max = 100;
    bool field_coupling = true;  // magnetostatics + (mu_bar grad phi + H2 m)
    bool freeze_theta = false;   // hold v (temperature) fixed
};

// Semi-implicit splitting of the coupled magnetization / v-temperature /
// magnetostatic system: (i) m-solve, implicit diffusion with semi-implicit
// reaction; (ii) v-solve with mobility frozen at g(G(v_old)) and the
// m . dm/dt source; (iii) magnetostatic refresh. Each sub-solve is SPD.
// The same core integrates the homogenized model (constant effective
// tensors) and the eps-resolved micro model (oscillating coefficients,
// perforated mask); only the problem description differs.
class CoupledSim {
  public:
    struct Problem {
        MacroGrid grid;      // domain grid for m, v (mask = material)
        int pad = 0;         // padding layers of the magnetostatic box
        CoeffFn A;           // on the domain grid
        CoeffFn K;           // base K; multiplied by g(theta) per step
        CoeffFn mu_field;    // on the padded box
        Mat3 H1;             // magnetostatic source coupling
        Mat3 mu_bar;         // field term matrices in the m-equation
        Mat3 H2;
        double gamma = 1.0;
        double theta_c = 1.0;
        ThermoParams thermo;
        double chi_init = 1.0;  // scaling of the initial data
        double dt = 1e-2;
        double t_end = 1.0;
        int save_every = 10;
        double cg_tol = 1e-10;
        int cg_max_iter = 0;
        double newton_tol = 1e-13;
        int newton_max = 100;
        bool field_coupling = true;
        bool freeze_theta = false;
    };

    explicit CoupledSim(Problem problem);

    CoupledState init_state(const VectorInit& m0, const ScalarInit& theta0);
    std::vector<double> magnetostatic_solve(
        const std::array<std::vector<double>, 3>& m,
        const std::vector<double>* phi_warm = nullptr);
    void step(CoupledState& state);
    EnergyRecord energy(const CoupledState& state) const;
    CoupledState run(const VectorInit& m0, const ScalarInit& theta0,
                     RunSink* sink = nullptr);

    const Problem& problem() const { return prob_; }
    const MacroGrid& field_grid() const { return field_grid_; }
    // Gradient of phi at a domain voxel (centered differences on the padded
    // grid, one-sided next to holes).
    Vec3 grad_phi_at(const std::vector<double>& phi, int i, int j, int k) const;

  private:
    Problem prob_;
    MacroGrid field_grid_;  // domain grid extended by pad layers
    GridSpec domain_spec_;
    GridSpec field_spec_;
    SparseOperator A_op_;
    SparseOperator mu_op_;
    std::vector<int> field_voxel_of_domain_;  // domain voxel -> padded voxel
    int step_count_ = 0;
    RunSink* sink_ = nullptr;

    void log_solve(const std::string& context, const SolveReport& rep);
    std::vector<double> gather(const std::vector<double>& full,
                               const SparseOperator& op) const;
    void scatter(const std::vector<double>& packed, const SparseOperator& op,
                 std::vector<double>& full) const;
};

// Homogenized-model ops: thin wrappers around CoupledSim with the effective
// tensors, chi_bar-scaled initial data and the all-material Omega grid.
CoupledSim::Problem make_macro_problem(const MacroConfig& cfg);

MacroState macro_init_state(const MacroConfig& cfg, const VectorInit& m0,
                            const ScalarInit& theta0);
MacroState macro_run(const MacroConfig& cfg, const VectorInit& m0,
                     const ScalarInit& theta0, RunSink* sink = nullptr);

// max over components of |m| at material voxels
double max_abs_m(const CoupledState& state);

// Smallest C with E(t) <= exp(C t) E(0) along a recorded series: the
// Gronwall-form growth constant, reported as a diagnostic only.
double fit_growth_constant(const std::vector<EnergyRecord>& records);

}  // namespace perfomag

#endif
