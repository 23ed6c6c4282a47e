#include "perfomag/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace perfomag {

CellCoeffFn CoeffSpec::fn(int dim) const {
    const Mat3 base_m = base;
    switch (profile) {
        case Profile::constant:
            return [base_m](const Vec3&) { return base_m; };
        case Profile::layered: {
            const int ax = axis;
            const double lo = a, hi = b;
            return [base_m, ax, lo, hi](const Vec3& y) {
                return base_m * (y[ax] < 0.5 ? lo : hi);
            };
        }
        case Profile::checkerboard: {
            const double lo = a, hi = b;
            const int d = dim;
            return [base_m, lo, hi, d](const Vec3& y) {
                int parity = 0;
                for (int k = 0; k < d; ++k)
                    parity += y[k] < 0.5 ? 0 : 1;
                return base_m * (parity % 2 == 0 ? lo : hi);
            };
        }
    }
    return [base_m](const Vec3&) { return base_m; };
}

int SimConfig::pad_cells() const {
    if (pad >= 0) return pad;
    double max_len = 0.0;
    for (int a = 0; a < dim; ++a) max_len = std::max(max_len, box[a]);
    double h = box[0] / n_macro[0];
    return std::max(2, static_cast<int>(std::ceil(0.5 * max_len / h)));
}

namespace {

struct RawEntry {
    std::string value;
    int line = 0;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(const std::string& name, int line,
                       const std::string& msg) {
    std::ostringstream os;
    os << name << ':' << line << ": " << msg;
    throw ConfigError(os.str());
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

double parse_double(const std::string& name, int line, const std::string& s,
                    const std::string& key) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        fail(name, line, key + ": expected a number, got '" + s + "'");
    }
}

long parse_int(const std::string& name, int line, const std::string& s,
               const std::string& key) {
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        fail(name, line, key + ": expected an integer, got '" + s + "'");
    }
}

bool parse_bool(const std::string& name, int line, const std::string& s,
                const std::string& key) {
    if (s == "true" || s == "on" || s == "1") return true;
    if (s == "false" || s == "off" || s == "0") return false;
    fail(name, line, key + ": expected a boolean, got '" + s + "'");
}

Mat3 parse_matrix(const std::string& name, int line, const std::string& s,
                  const std::string& key, int dim) {
    auto t = tokens(s);
    if (!t.empty() && t[0] == "identity") return Mat3::identity();
    if (!t.empty() && t[0] == "zero") return Mat3::zero();
    if (!t.empty() && t[0] == "diag") {
        if (static_cast<int>(t.size()) - 1 == dim) {
            double d3 = dim == 3
                            ? parse_double(name, line, t[3], key)
                            : 1.0;
            return Mat3::diag(parse_double(name, line, t[1], key),
                              parse_double(name, line, t[2], key), d3);
        }
        if (t.size() == 4)
            return Mat3::diag(parse_double(name, line, t[1], key),
                              parse_double(name, line, t[2], key),
                              parse_double(name, line, t[3], key));
        fail(name, line, key + ": diag expects " + std::to_string(dim) +
                             " (or 3) entries");
    }
    if (t.size() == 9) {
        Mat3 m;
        for (int i = 0; i < 9; ++i)
            m.a[i] = parse_double(name, line, t[i], key);
        return m;
    }
    if (dim == 2 && t.size() == 4) {
        Mat3 m = Mat3::identity();
        m(0, 0) = parse_double(name, line, t[0], key);
        m(0, 1) = parse_double(name, line, t[1], key);
        m(1, 0) = parse_double(name, line, t[2], key);
        m(1, 1) = parse_double(name, line, t[3], key);
        return m;
    }
    fail(name, line,
         key + ": expected identity | zero | diag ... | row-major entries");
}

void validate_input_tensor(const std::string& name, int line, const Mat3& m,
                           const std::string& key, int dim) {
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (std::fabs(m(i, j) - m(j, i)) >
                1e-12 * std::max(1.0, m.norm_inf())) {
                std::ostringstream os;
                os << key << ": matrix must be symmetric, entries (" << i + 1
                   << ',' << j + 1 << ") and (" << j + 1 << ',' << i + 1
                   << ") differ";
                fail(name, line, os.str());
            }
    if (dim == 2)
        for (int i = 0; i < 2; ++i)
            if (m(i, 2) != 0.0 || m(2, i) != 0.0)
                fail(name, line,
                     key + ": 2-D tensors must not couple the third axis");
    if (!m.is_spd())
        fail(name, line, key + ": matrix must be positive definite (coercive)");
}

}  // namespace

SimConfig parse_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    SimConfig cfg = parse_config_text(buf.str(), path);
    cfg.source_path = path;
    return cfg;
}

SimConfig parse_config_text(const std::string& text, const std::string& name) {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"geometry",
         {"dim", "cell_n", "hole", "allow_boundary_hole", "box", "n_macro",
          "pad"}},
        {"physics",
         {"gamma", "theta_c", "c1", "c2", "k0", "k1", "A", "A_profile", "K",
          "K_profile", "mu", "mu_profile", "omega2_source"}},
        {"discretization",
         {"dt", "t_end", "save_every", "cg_tol", "cg_max_iter", "newton_tol",
          "newton_max"}},
        {"simulate",
         {"m0", "theta0", "field_coupling", "freeze_theta", "seed"}},
        {"tensors",
         {"A_star", "K_star", "mu_star_in", "mu_star_out", "mu_bar", "H1",
          "H2", "chi_bar"}},
        {"verify", {"eps_list", "t_check", "voxels_per_period"}},
    };

    // first pass: section/key/value triples with line numbers
    std::vector<std::tuple<std::string, std::string, RawEntry>> entries;
    {
        std::istringstream is(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    fail(name, lineno, "malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                if (schema.find(section) == schema.end())
                    fail(name, lineno, "unknown section [" + section + "]");
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos)
                fail(name, lineno, "expected key = value");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (section.empty())
                fail(name, lineno, "key '" + key + "' outside any section");
            auto it = schema.find(section);
            if (it->second.find(key) == it->second.end())
                fail(name, lineno,
                     "unknown key '" + key + "' in [" + section + "]");
            entries.emplace_back(section, key, RawEntry{value, lineno});
        }
    }

    SimConfig cfg;
    cfg.raw_text = text;
    cfg.theta0.uniform_val = 1.0;

    // geometry first (dim controls arities elsewhere)
    for (auto& [sec, key, e] : entries) {
        if (sec != "geometry") continue;
        if (key == "dim") {
            cfg.dim = static_cast<int>(parse_int(name, e.line, e.value, key));
            if (cfg.dim != 2 && cfg.dim != 3)
                fail(name, e.line, "dim must be 2 or 3");
        }
    }
    const int dim = cfg.dim;

    bool allow_boundary_hole = false;
    std::optional<std::pair<std::string, int>> hole_raw;
    for (auto& [sec, key, e] : entries) {
        const std::string& val = e.value;
        const int line = e.line;
        if (sec == "geometry") {
            if (key == "dim") continue;
            if (key == "cell_n") {
                cfg.cell_n = static_cast<int>(parse_int(name, line, val, key));
                if (cfg.cell_n < 4) fail(name, line, "cell_n must be >= 4");
            } else if (key == "allow_boundary_hole") {
                allow_boundary_hole = parse_bool(name, line, val, key);
            } else if (key == "hole") {
                hole_raw = {val, line};
            } else if (key == "box") {
                auto t = tokens(val);
                if (t.size() == 1) {
                    double l = parse_double(name, line, t[0], key);
                    cfg.box = {l, l, l};
                } else if (static_cast<int>(t.size()) == dim) {
                    for (int a = 0; a < dim; ++a)
                        cfg.box[a] = parse_double(name, line, t[a], key);
                    if (dim == 2) cfg.box[2] = 1.0;
                } else {
                    fail(name, line, "box: expected 1 or dim lengths");
                }
                for (int a = 0; a < dim; ++a)
                    if (!(cfg.box[a] > 0.0))
                        fail(name, line, "box lengths must be > 0");
            } else if (key == "n_macro") {
                auto t = tokens(val);
                if (t.size() == 1) {
                    int v = static_cast<int>(parse_int(name, line, t[0], key));
                    cfg.n_macro = {v, v, v};
                } else if (static_cast<int>(t.size()) == dim) {
                    for (int a = 0; a < dim; ++a)
                        cfg.n_macro[a] =
                            static_cast<int>(parse_int(name, line, t[a], key));
                    if (dim == 2) cfg.n_macro[2] = 1;
                } else {
                    fail(name, line, "n_macro: expected 1 or dim counts");
                }
                for (int a = 0; a < dim; ++a)
                    if (cfg.n_macro[a] < 2)
                        fail(name, line, "n_macro must be >= 2");
            } else if (key == "pad") {
                if (val == "auto")
                    cfg.pad = -1;
                else {
                    cfg.pad = static_cast<int>(parse_int(name, line, val, key));
                    if (cfg.pad < 2) fail(name, line, "pad must be >= 2 cells");
                }
            }
        } else if (sec == "physics") {
            if (key == "gamma") {
                cfg.gamma = parse_double(name, line, val, key);
                if (!(cfg.gamma > 0.0)) fail(name, line, "gamma must be > 0");
            } else if (key == "theta_c") {
                cfg.theta_c = parse_double(name, line, val, key);
                if (!(cfg.theta_c > 0.0))
                    fail(name, line, "theta_c must be > 0");
            } else if (key == "c1" || key == "c2" || key == "k0" ||
                       key == "k1") {
                double v = parse_double(name, line, val, key);
                if (!(v > 0.0)) fail(name, line, key + " must be > 0");
                if (key == "c1") cfg.c1 = v;
                if (key == "c2") cfg.c2 = v;
                if (key == "k0") cfg.k0 = v;
                if (key == "k1") cfg.k1 = v;
            } else if (key == "A" || key == "K" || key == "mu") {
                Mat3 m = parse_matrix(name, line, val, key, dim);
                validate_input_tensor(name, line, m, key, dim);
                if (key == "A") cfg.A.base = m;
                if (key == "K") cfg.K.base = m;
                if (key == "mu") cfg.mu.base = m;
            } else if (key == "A_profile" || key == "K_profile" ||
                       key == "mu_profile") {
                CoeffSpec* target = key == "A_profile"
                                        ? &cfg.A
                                        : (key == "K_profile" ? &cfg.K
                                                              : &cfg.mu);
                auto t = tokens(val);
                if (t.empty()) fail(name, line, key + ": empty profile");
                if (t[0] == "none") {
                    target->profile = CoeffSpec::Profile::constant;
                } else if (t[0] == "layered" && t.size() == 4) {
                    target->profile = CoeffSpec::Profile::layered;
                    int ax = static_cast<int>(
                        parse_int(name, line, t[1], key));
                    if (ax < 1 || ax > dim)
                        fail(name, line, key + ": axis out of range");
                    target->axis = ax - 1;
                    target->a = parse_double(name, line, t[2], key);
                    target->b = parse_double(name, line, t[3], key);
                } else if (t[0] == "checkerboard" && t.size() == 3) {
                    target->profile = CoeffSpec::Profile::checkerboard;
                    target->a = parse_double(name, line, t[1], key);
                    target->b = parse_double(name, line, t[2], key);
                } else {
                    fail(name, line,
                         key + ": expected none | layered axis a b | "
                               "checkerboard a b");
                }
                if (target->profile != CoeffSpec::Profile::constant &&
                    !(target->a > 0.0 && target->b > 0.0))
                    fail(name, line, key + ": profile values must be > 0");
            } else if (key == "omega2_source") {
                if (val == "mu_ei")
                    cfg.omega2_source = Omega2Source::mu_ei;
                else if (val == "ei")
                    cfg.omega2_source = Omega2Source::ei;
                else
                    fail(name, line, "omega2_source: expected mu_ei or ei");
            }
        } else if (sec == "discretization") {
            if (key == "dt") {
                cfg.dt = parse_double(name, line, val, key);
                if (!(cfg.dt > 0.0)) fail(name, line, "dt must be > 0");
            } else if (key == "t_end") {
                cfg.t_end = parse_double(name, line, val, key);
                if (cfg.t_end < 0.0) fail(name, line, "t_end must be >= 0");
            } else if (key == "save_every") {
                cfg.save_every =
                    static_cast<int>(parse_int(name, line, val, key));
                if (cfg.save_every < 1)
                    fail(name, line, "save_every must be >= 1");
            } else if (key == "cg_tol") {
                cfg.cg_tol = parse_double(name, line, val, key);
                if (!(cfg.cg_tol > 0.0)) fail(name, line, "cg_tol must be > 0");
            } else if (key == "cg_max_iter") {
                if (val == "auto")
                    cfg.cg_max_iter = 0;
                else
                    cfg.cg_max_iter =
                        static_cast<int>(parse_int(name, line, val, key));
            } else if (key == "newton_tol") {
                cfg.newton_tol = parse_double(name, line, val, key);
                if (!(cfg.newton_tol > 0.0))
                    fail(name, line, "newton_tol must be > 0");
            } else if (key == "newton_max") {
                cfg.newton_max =
                    static_cast<int>(parse_int(name, line, val, key));
                if (cfg.newton_max < 1)
                    fail(name, line, "newton_max must be >= 1");
            }
        } else if (sec == "simulate") {
            if (key == "m0") {
                auto t = tokens(val);
                if (!t.empty() && t[0] == "uniform" &&
                    static_cast<int>(t.size()) == 4) {
                    cfg.m0.kind = InitSpec::Kind::uniform;
                    for (int c = 0; c < 3; ++c)
                        cfg.m0.uniform_vec[c] =
                            parse_double(name, line, t[c + 1], key);
                } else if (!t.empty() && t[0] == "random" && t.size() == 2) {
                    cfg.m0.kind = InitSpec::Kind::random;
                    cfg.m0.amp = parse_double(name, line, t[1], key);
                } else {
                    fail(name, line,
                         "m0: expected uniform mx my mz | random amp");
                }
            } else if (key == "theta0") {
                auto t = tokens(val);
                if (!t.empty() && t[0] == "uniform" && t.size() == 2) {
                    cfg.theta0.kind = InitSpec::Kind::uniform;
                    cfg.theta0.uniform_val =
                        parse_double(name, line, t[1], key);
                    if (!(cfg.theta0.uniform_val > 0.0))
                        fail(name, line, "theta0 must be > 0");
                } else if (!t.empty() && t[0] == "bump" &&
                           static_cast<int>(t.size()) == 4 + dim) {
                    cfg.theta0.kind = InitSpec::Kind::bump;
                    cfg.theta0.base = parse_double(name, line, t[1], key);
                    cfg.theta0.amp = parse_double(name, line, t[2], key);
                    for (int a = 0; a < dim; ++a)
                        cfg.theta0.center[a] =
                            parse_double(name, line, t[3 + a], key);
                    cfg.theta0.width =
                        parse_double(name, line, t[3 + dim], key);
                    if (!(cfg.theta0.base > 0.0) ||
                        cfg.theta0.base + cfg.theta0.amp <= 0.0 ||
                        !(cfg.theta0.width > 0.0))
                        fail(name, line, "theta0 bump must stay positive");
                } else {
                    fail(name, line,
                         "theta0: expected uniform v | bump base amp c... w");
                }
            } else if (key == "field_coupling") {
                cfg.field_coupling = parse_bool(name, line, val, key);
            } else if (key == "freeze_theta") {
                cfg.freeze_theta = parse_bool(name, line, val, key);
            } else if (key == "seed") {
                cfg.seed = static_cast<std::uint64_t>(
                    parse_int(name, line, val, key));
            }
        } else if (sec == "tensors") {
            if (key == "chi_bar") {
                double v = parse_double(name, line, val, key);
                if (!(v > 0.0 && v <= 1.0))
                    fail(name, line, "chi_bar must be in (0, 1]");
                cfg.ov_chi_bar = v;
            } else {
                Mat3 m = parse_matrix(name, line, val, key, dim);
                if (key == "A_star") cfg.ov_A_star = m;
                if (key == "K_star") cfg.ov_K_star = m;
                if (key == "mu_star_in") cfg.ov_mu_star_in = m;
                if (key == "mu_star_out") cfg.ov_mu_star_out = m;
                if (key == "mu_bar") cfg.ov_mu_bar = m;
                if (key == "H1") cfg.ov_H1 = m;
                if (key == "H2") cfg.ov_H2 = m;
            }
        } else if (sec == "verify") {
            if (key == "eps_list") {
                auto t = tokens(val);
                if (t.empty()) fail(name, line, "eps_list: empty");
                cfg.eps_list.clear();
                for (auto& s : t) {
                    double e = parse_double(name, line, s, key);
                    if (!(e > 0.0)) fail(name, line, "eps must be > 0");
                    cfg.eps_list.push_back(e);
                }
                for (std::size_t i = 1; i < cfg.eps_list.size(); ++i)
                    if (!(cfg.eps_list[i] < cfg.eps_list[i - 1]))
                        fail(name, line,
                             "eps_list must be strictly decreasing");
            } else if (key == "t_check") {
                cfg.t_check = parse_double(name, line, val, key);
                if (!(cfg.t_check > 0.0))
                    fail(name, line, "t_check must be > 0");
            } else if (key == "voxels_per_period") {
                cfg.voxels_per_period =
                    static_cast<int>(parse_int(name, line, val, key));
                if (cfg.voxels_per_period < 4)
                    fail(name, line, "voxels_per_period must be >= 4");
            }
        }
    }

    if (hole_raw) {
        auto [val, line] = *hole_raw;
        auto t = tokens(val);
        if (t.empty()) fail(name, line, "hole: empty");
        if (t[0] == "none") {
            cfg.hole = HoleSpec::none();
        } else if (t[0] == "sphere" &&
                   static_cast<int>(t.size()) == dim + 2) {
            Vec3 c{};
            for (int a = 0; a < dim; ++a)
                c[a] = parse_double(name, line, t[a + 1], "hole");
            double r = parse_double(name, line, t[dim + 1], "hole");
            cfg.hole = HoleSpec::sphere(c, r, allow_boundary_hole);
        } else if (t[0] == "box" &&
                   static_cast<int>(t.size()) == 2 * dim + 1) {
            Vec3 lo{}, hi{};
            for (int a = 0; a < dim; ++a)
                lo[a] = parse_double(name, line, t[a + 1], "hole");
            for (int a = 0; a < dim; ++a)
                hi[a] = parse_double(name, line, t[dim + a + 1], "hole");
            cfg.hole = HoleSpec::box(lo, hi, allow_boundary_hole);
        } else if (t[0] == "mask" && t.size() == 2) {
            cfg.hole = HoleSpec::voxel_mask(t[1], allow_boundary_hole);
        } else {
            fail(name, line,
                 "hole: expected none | sphere c... r | box lo... hi... | "
                 "mask path");
        }
    } else {
        cfg.hole.allow_boundary_touching = allow_boundary_hole;
    }

    // cross-field validation
    {
        double h = cfg.box[0] / cfg.n_macro[0];
        for (int a = 1; a < dim; ++a) {
            double ha = cfg.box[a] / cfg.n_macro[a];
            if (std::fabs(ha - h) > 1e-12 * h)
                throw ConfigError(
                    name +
                    ": box/n_macro must give identical voxel sizes per axis");
        }
    }
    return cfg;
}

}  // namespace perfomag
