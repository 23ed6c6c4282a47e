#ifndef PERFOMAG_MICRO_HPP
#define PERFOMAG_MICRO_HPP

#include <string>
#include <vector>

#include "perfomag/cell.hpp"
#include "perfomag/geometry.hpp"
#include "perfomag/macro.hpp"

namespace perfomag {

// eps-resolved reference solver on a perforated grid: the same splitting as
// the homogenized stepper, with oscillating coefficients sampled at voxel
// centers via y = R(x/eps) and the raw grad(phi) forcing.
struct MicroConfig {
    MacroGrid grid;  // perforated (epsilon set)
    double eps = 0.0;
    int pad = 2;
    CellCoeffFn A, K, mu;
    double gamma = 1.0;
    double theta_c = 1.0;
    ThermoParams thermo;
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

CoupledSim::Problem make_micro_problem(const MicroConfig& cfg);

MicroState solve_micro(const MicroConfig& cfg, const VectorInit& m0,
                       const ScalarInit& theta0, RunSink* sink = nullptr);

enum class ExtendMode { zero_fill, neighbor_fill };

// Extension of a material-voxel field into the holes. zero_fill is the
// exact object of the two-scale statements; neighbor_fill iterates
// face-neighbor averaging of hole voxels until stationary (a visualization
// stand-in for the non-constructive extension operator).
std::vector<double> extend(const MacroGrid& grid,
                           const std::vector<double>& field, ExtendMode mode);

// || f_eps(unfold(x, y, eps)) - chi_{Y*}(y) f(x) ||_{L2(Omega x Y)} by
// midpoint quadrature over macro voxels x and cell voxels y, sampling the
// zero-extended micro field at the nearest voxel. Points that unfold
// outside the box sample 0 (fields are extended by zero outside Omega).
double two_scale_error(const MacroGrid& micro_grid,
                       const std::vector<double>& f_eps,
                       const MacroGrid& macro_grid,
                       const std::vector<double>& f, const CellGrid& cell,
                       double eps);

struct ConvergenceRow {
    double eps = 0.0;
    std::string field;
    double error = 0.0;
    bool has_order = false;
    double order = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::string to_csv() const;  // eps,field,error,observed_order
};

// Full verification pipeline inputs. The homogenized reference is run with
// the provided tensors and chi_init; for limit-consistent comparisons the
// caller passes porosity-rescaled tensors and chi_init = 1.
struct VerifySetup {
    std::array<double, 3> box = {1.0, 1.0, 1.0};
    std::array<int, 3> n_macro = {32, 32, 32};
    int dim = 2;
    HoleSpec hole;
    const CellGrid* cell = nullptr;
    int voxels_per_period = 8;
    std::vector<double> eps_list;
    double t_check = 0.25;

    double gamma = 1.0;
    double theta_c = 1.0;
    ThermoParams thermo;
    CellCoeffFn A, K, mu;

    EffectiveTensors tensors;
    double macro_chi_init = 1.0;

    double dt = 5e-3;
    double cg_tol = 1e-10;
    int cg_max_iter = 0;
    double newton_tol = 1e-13;
    int newton_max = 100;
    bool field_coupling = false;
    bool freeze_theta = false;
    int pad = 2;

    VectorInit m0;
    ScalarInit theta0;
};

// Runs the homogenized reference once and solve_micro per eps; reports the
// unfolding error of v and of each magnetization component at t_check,
// together with the observed order between consecutive eps values.
ConvergenceTable convergence_study(const VerifySetup& setup);

}  // namespace perfomag

#endif
