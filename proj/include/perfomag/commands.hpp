#ifndef PERFOMAG_COMMANDS_HPP
#define PERFOMAG_COMMANDS_HPP

#include <string>

#include "perfomag/config.hpp"
#include "perfomag/macro.hpp"
#include "perfomag/micro.hpp"
#include "perfomag/tensors.hpp"

namespace perfomag {

CellGrid build_cell_from_config(const SimConfig& cfg);

// Cell solves + tensor assembly, with any [tensors] overrides applied on
// top (the Curie tensor is rebuilt from the final H2). When every tensor is
// overridden the cell solves are skipped. grid_storage, when given,
// receives the cell grid used for the solves.
EffectiveTensors compute_tensors(const SimConfig& cfg,
                                 CorrectorSet* correctors_out = nullptr,
                                 CellGrid* grid_storage = nullptr);

VectorInit make_m0_init(const SimConfig& cfg);
ScalarInit make_theta0_init(const SimConfig& cfg);

MacroConfig build_macro_config(const SimConfig& cfg,
                               const EffectiveTensors& tensors);

// Command entry points: deterministic outputs under out_dir, a copy of the
// config for provenance, exit code 0 on success. Errors propagate as
// exceptions with module context.
void cmd_cell(const SimConfig& cfg, const std::string& out_dir);
void cmd_tensors(const SimConfig& cfg, const std::string& out_dir);
void cmd_curie(const SimConfig& cfg, const std::string& out_dir);
void cmd_simulate(const SimConfig& cfg, const std::string& out_dir);
void cmd_verify(const SimConfig& cfg, const std::string& out_dir);

// The verification reference must match the fine-scale limit: tensors from
// the voxels_per_period cell discretization scaled by 1/chi_bar, unscaled
// initial data, field coupling off.
VerifySetup build_verify_setup(const SimConfig& cfg, const CellGrid& cell,
                               const EffectiveTensors& tensors);

std::string default_out_dir(const std::string& command,
                            const std::string& config_path);

}  // namespace perfomag

#endif
