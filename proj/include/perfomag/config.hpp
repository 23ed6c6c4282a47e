#ifndef PERFOMAG_CONFIG_HPP
#define PERFOMAG_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perfomag/cell.hpp"
#include "perfomag/geometry.hpp"
#include "perfomag/smallmat.hpp"

namespace perfomag {

// Coefficient tensor: constant base matrix, optionally modulated by a
// scalar unit-cell profile.
struct CoeffSpec {
    Mat3 base = Mat3::identity();
    enum class Profile { constant, layered, checkerboard };
    Profile profile = Profile::constant;
    int axis = 0;  // layered: jump across y_axis = 1/2
    double a = 1.0, b = 1.0;

    CellCoeffFn fn(int dim) const;
};

struct InitSpec {
    enum class Kind { uniform, random, bump };
    Kind kind = Kind::uniform;
    Vec3 uniform_vec{};     // m0 uniform
    double uniform_val = 1.0;  // theta0 uniform
    double amp = 0.0;       // random / bump amplitude
    double base = 1.0;      // bump offset
    Vec3 center{};          // bump center
    double width = 0.2;     // bump width
};

struct SimConfig {
    std::string source_path;
    std::string raw_text;

    // [geometry]
    int dim = 3;
    int cell_n = 32;
    HoleSpec hole;
    std::array<double, 3> box = {1.0, 1.0, 1.0};
    std::array<int, 3> n_macro = {32, 32, 32};
    int pad = -1;  // -1 = auto (half the box diameter)

    // [physics]
    double gamma = 1.0;
    double theta_c = 1.0;
    double c1 = 1.0, c2 = 1.0, k0 = 1.0, k1 = 1.0;
    CoeffSpec A, K, mu;
    Omega2Source omega2_source = Omega2Source::mu_ei;

    // [discretization]
    double dt = 1e-2;
    double t_end = 1.0;
    int save_every = 10;
    double cg_tol = 1e-10;
    int cg_max_iter = 0;
    double newton_tol = 1e-13;
    int newton_max = 100;

    // [simulate]
    InitSpec m0;      // kind uniform(0,0,0) by default
    InitSpec theta0;  // uniform 1.0 by default
    bool field_coupling = true;
    bool freeze_theta = false;
    std::uint64_t seed = 0;

    // [tensors] explicit overrides (skip or replace the computed values)
    std::optional<Mat3> ov_A_star, ov_K_star, ov_mu_star_in, ov_mu_star_out,
        ov_mu_bar, ov_H1, ov_H2;
    std::optional<double> ov_chi_bar;

    // [verify]
    std::vector<double> eps_list = {0.25, 0.125};
    double t_check = 0.25;
    int voxels_per_period = 8;

    int pad_cells() const;  // resolved padding layer count
};

// Flat INI-style parser: [section] headers, key = value, '#' comments.
// Unknown sections/keys and constraint violations are hard errors carrying
// the key path and line number.
SimConfig parse_config(const std::string& path);
SimConfig parse_config_text(const std::string& text,
                            const std::string& name = "<config>");

}  // namespace perfomag

#endif
