#include "perfomag/config.hpp"

#include <cmath>

#include "doctest.h"

using namespace perfomag;

TEST_CASE("empty config yields the documented defaults") {
    SimConfig cfg = parse_config_text("");
    CHECK(cfg.dim == 3);
    CHECK(cfg.cell_n == 32);
    CHECK(cfg.hole.shape == HoleSpec::Shape::none);
    CHECK(cfg.box[0] == 1.0);
    CHECK(cfg.n_macro[0] == 32);
    CHECK(cfg.gamma == 1.0);
    CHECK(cfg.theta_c == 1.0);
    CHECK(cfg.c1 == 1.0);
    CHECK(cfg.c2 == 1.0);
    CHECK(cfg.dt == 1e-2);
    CHECK(cfg.t_end == 1.0);
    CHECK(cfg.save_every == 10);
    CHECK(cfg.cg_tol == 1e-10);
    CHECK(cfg.field_coupling);
    CHECK_FALSE(cfg.freeze_theta);
    CHECK(cfg.seed == 0);
    CHECK(cfg.omega2_source == Omega2Source::mu_ei);
    CHECK(cfg.eps_list.size() == 2);
    CHECK(cfg.voxels_per_period == 8);
    CHECK(cfg.theta0.kind == InitSpec::Kind::uniform);
    CHECK(cfg.theta0.uniform_val == 1.0);
}

TEST_CASE("representative config round trip") {
    const char* text = R"(
# full exercise of the grammar
[geometry]
dim = 2
cell_n = 8
hole = box 0.25 0.25 0.75 0.75
box = 1 1
n_macro = 32
pad = 4

[physics]
gamma = 2.0
theta_c = 1.5
c1 = 1.0
c2 = 1.0
k0 = 2.0
k1 = 1.0
A = identity
K = diag 1.5 2.5
K_profile = layered 1 1 4
mu = 1 0.1 0.1 1
omega2_source = ei

[discretization]
dt = 0.005
t_end = 0.25
save_every = 5
cg_tol = 1e-11

[simulate]
m0 = random 0.01
theta0 = bump 1.0 0.5 0.5 0.5 0.2
field_coupling = off
freeze_theta = on
seed = 1234

[tensors]
H2 = zero

[verify]
eps_list = 0.25 0.125 0.0625
t_check = 0.2
voxels_per_period = 8
)";
    SimConfig cfg = parse_config_text(text, "test.ini");
    CHECK(cfg.dim == 2);
    CHECK(cfg.hole.shape == HoleSpec::Shape::box);
    CHECK(cfg.hole.lo.x == 0.25);
    CHECK(cfg.hole.hi.y == 0.75);
    CHECK(cfg.pad == 4);
    CHECK(cfg.gamma == 2.0);
    CHECK(cfg.K.base(1, 1) == 2.5);
    CHECK(cfg.K.profile == CoeffSpec::Profile::layered);
    CHECK(cfg.K.axis == 0);
    CHECK(cfg.K.b == 4.0);
    CHECK(cfg.mu.base(0, 1) == 0.1);
    CHECK(cfg.omega2_source == Omega2Source::ei);
    CHECK(cfg.m0.kind == InitSpec::Kind::random);
    CHECK(cfg.m0.amp == 0.01);
    CHECK(cfg.theta0.kind == InitSpec::Kind::bump);
    CHECK(cfg.theta0.width == 0.2);
    CHECK_FALSE(cfg.field_coupling);
    CHECK(cfg.freeze_theta);
    CHECK(cfg.seed == 1234);
    REQUIRE(cfg.ov_H2.has_value());
    CHECK(cfg.ov_H2->norm_inf() == 0.0);
    CHECK(cfg.eps_list.size() == 3);
    CHECK(cfg.t_check == 0.2);
    // layered modulation: value jumps across y1 = 1/2
    Mat3 lo = cfg.K.fn(2)({0.25, 0.5, 0.0});
    Mat3 hi = cfg.K.fn(2)({0.75, 0.5, 0.0});
    CHECK(lo(0, 0) == 1.5);
    CHECK(hi(0, 0) == 6.0);
}

TEST_CASE("constraint violations carry the key and line") {
    CHECK_THROWS_WITH_AS(
        parse_config_text("[physics]\nc2 = 0\n", "bad.ini"),
        doctest::Contains("c2 must be > 0"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        parse_config_text("[physics]\nc2 = 0\n", "bad.ini"),
        doctest::Contains("bad.ini:2"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        parse_config_text("[physics]\nA = 1 0 0 0 1 0 0.5 0 1\n", "bad.ini"),
        doctest::Contains("(1,3)"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        parse_config_text("[physics]\nA = diag -1 1 1\n", "bad.ini"),
        doctest::Contains("positive definite"), std::runtime_error);
}

TEST_CASE("unknown keys and sections are hard errors") {
    CHECK_THROWS_WITH_AS(
        parse_config_text("[geometry]\ncelln = 8\n", "typo.ini"),
        doctest::Contains("unknown key 'celln'"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config_text("[junk]\n", "typo.ini"),
                         doctest::Contains("unknown section"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config_text("dim = 3\n", "typo.ini"),
                         doctest::Contains("outside any section"),
                         std::runtime_error);
}

TEST_CASE("malformed values are rejected with context") {
    CHECK_THROWS_WITH_AS(
        parse_config_text("[geometry]\ndim = four\n", "bad.ini"),
        doctest::Contains("expected an integer"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        parse_config_text("[geometry]\nhole = sphere 0.5 0.5\n", "bad.ini"),
        doctest::Contains("hole"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        parse_config_text("[simulate]\nfield_coupling = maybe\n", "bad.ini"),
        doctest::Contains("boolean"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        parse_config_text("[verify]\neps_list = 0.125 0.25\n", "bad.ini"),
        doctest::Contains("strictly decreasing"), std::runtime_error);
}

TEST_CASE("2-D configs reject out-of-plane coupling") {
    CHECK_THROWS_WITH_AS(
        parse_config_text(
            "[geometry]\ndim = 2\n[physics]\nA = 1 0 0.2 0 1 0 0.2 0 1\n",
            "bad.ini"),
        doctest::Contains("third axis"), std::runtime_error);
}

TEST_CASE("pad auto resolves to half the box diameter") {
    SimConfig cfg = parse_config_text(
        "[geometry]\nn_macro = 32\nbox = 1\npad = auto\n");
    CHECK(cfg.pad_cells() == 16);
    SimConfig fixed = parse_config_text("[geometry]\npad = 3\n");
    CHECK(fixed.pad_cells() == 3);
}

TEST_CASE("checkerboard profile alternates per half-cell parity") {
    SimConfig cfg = parse_config_text(
        "[geometry]\ndim = 2\n[physics]\nmu_profile = checkerboard 1 4\n");
    auto fn = cfg.mu.fn(2);
    CHECK(fn({0.25, 0.25, 0.0})(0, 0) == 1.0);
    CHECK(fn({0.75, 0.25, 0.0})(0, 0) == 4.0);
    CHECK(fn({0.75, 0.75, 0.0})(0, 0) == 1.0);
}
