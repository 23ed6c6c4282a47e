#include "perfomag/tensors.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "perfomag/geometry.hpp"

using namespace perfomag;

namespace {

CellCoeffFn constant(const Mat3& m) {
    return [m](const Vec3&) { return m; };
}

CellCoeffFn layered14() {
    return [](const Vec3& y) {
        return Mat3::identity() * (y.x < 0.5 ? 1.0 : 4.0);
    };
}

std::vector<CorrectorField> family(const CellGrid& g, const CellCoeffFn& c,
                                   CorrectorKind kind,
                                   CellDomain domain = CellDomain::material) {
    std::vector<CorrectorField> out;
    for (int d = 0; d < g.dim; ++d)
        out.push_back(solve_corrector(g, c, d, kind, domain));
    return out;
}

// Richardson extrapolation from three dyadic levels.
double richardson(double v_coarse, double v_mid, double v_fine) {
    double num = v_coarse - v_mid;
    double den = v_mid - v_fine;
    if (std::fabs(den) < 1e-300) return v_fine;
    double rate = num / den;  // 2^p
    return v_fine + (v_fine - v_mid) / (rate - 1.0);
}

}  // namespace

TEST_CASE("no-hole identity coefficients give identity tensors") {
    CellGrid g = build_cell_grid(8, 3, HoleSpec::none());
    auto I = constant(Mat3::identity());
    Mat3 a = effective_diffusion(g, I, family(g, I, CorrectorKind::omega_A));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(a(i, j) == doctest::Approx(i == j ? 1.0 : 0.0)
                                 .epsilon(1e-14));

    FieldCoupling fc = field_coupling(
        g, I, family(g, I, CorrectorKind::omega_bar1_mu),
        family(g, I, CorrectorKind::omega_bar1_mu, CellDomain::full),
        family(g, I, CorrectorKind::omega_bar2_mu));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double d = i == j ? 1.0 : 0.0;
            CHECK(fc.mu_star_in(i, j) == doctest::Approx(d).epsilon(1e-14));
            CHECK(fc.mu_star_out(i, j) == doctest::Approx(d).epsilon(1e-14));
            CHECK(fc.mu_bar(i, j) == doctest::Approx(d).epsilon(1e-14));
            CHECK(fc.H1(i, j) == doctest::Approx(d).epsilon(1e-14));
            CHECK(fc.H2(i, j) == doctest::Approx(d).epsilon(1e-14));
        }
}

TEST_CASE("2-D laminate gives the classical harmonic/arithmetic pair") {
    CellGrid g = build_cell_grid(8, 2, HoleSpec::none());
    Mat3 a = effective_diffusion(
        g, layered14(), family(g, layered14(), CorrectorKind::omega_A));
    CHECK(a(0, 0) == doctest::Approx(1.6).epsilon(1e-8));
    CHECK(a(1, 1) == doctest::Approx(2.5).epsilon(1e-8));
    CHECK(std::fabs(a(0, 1)) < 1e-9);
    CHECK(std::fabs(a(1, 0)) < 1e-9);
    CHECK(a(2, 2) == doctest::Approx(2.5).epsilon(1e-12));  // plain average
    CHECK(a.symmetry_defect() < 1e-8);
}

TEST_CASE("sphere-hole diffusion tensor: symmetry, bounds, isotropy") {
    CellGrid g =
        build_cell_grid(32, 3, HoleSpec::sphere({0.5, 0.5, 0.5}, 0.25));
    auto I = constant(Mat3::identity());
    Mat3 a = effective_diffusion(g, I, family(g, I, CorrectorKind::omega_A));
    double chi = porosity(g);

    CHECK(a.symmetry_defect() < 1e-8);
    EigenSym3 eig = jacobi_eigen_sym3(a);
    CHECK(eig.values[0] > 0.0);  // positive definite
    double mean_diag = (a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
    for (int i = 0; i < 3; ++i) {
        CHECK(a(i, i) > 0.0);
        CHECK(a(i, i) < chi);  // Voigt bound, strict with holes
        CHECK(std::fabs(a(i, i) - mean_diag) / mean_diag < 5e-3);
    }
    // Voigt bound as a quadratic form on axis and diagonal vectors
    Mat3 voigt = voigt_tensor(g, I);
    const double s = 1.0 / std::sqrt(2.0), u = 1.0 / std::sqrt(3.0);
    const Vec3 dirs[7] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {s, s, 0},
                          {s, 0, s}, {0, s, s}, {u, u, u}};
    for (const Vec3& x : dirs) {
        Mat3 diff = voigt - a;
        CHECK(x.dot(diff * x) > 0.0);
    }
}

TEST_CASE("scaling equivariance of the effective tensor") {
    CellGrid g =
        build_cell_grid(12, 2, HoleSpec::sphere({0.5, 0.5, 0.0}, 0.2));
    auto base = layered14();
    auto scaled = [&](const Vec3& y) { return base(y) * 3.0; };
    Mat3 a1 = effective_diffusion(g, base,
                                  family(g, base, CorrectorKind::omega_A));
    Mat3 a3 = effective_diffusion(
        g, scaled, family(g, scaled, CorrectorKind::omega_A));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(a3(i, j) ==
                  doctest::Approx(3.0 * a1(i, j)).epsilon(1e-9).scale(1.0));
}

TEST_CASE("mu_star_out ignores the hole for identity permeability") {
    CellGrid g = build_cell_grid(
        16, 3, HoleSpec::box({0.25, 0.25, 0.25}, {0.75, 0.75, 0.75}));
    auto I = constant(Mat3::identity());
    FieldCoupling fc = field_coupling(
        g, I, family(g, I, CorrectorKind::omega_bar1_mu),
        family(g, I, CorrectorKind::omega_bar1_mu, CellDomain::full),
        family(g, I, CorrectorKind::omega_bar2_mu));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(fc.mu_star_out(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("cube-hole field coupling at n=32: all entries sane") {
    HoleSpec hole = HoleSpec::box({0.25, 0.25, 0.25}, {0.75, 0.75, 0.75});
    auto I = constant(Mat3::identity());
    CellGrid g = build_cell_grid(32, 3, hole);
    REQUIRE(porosity(g) == 0.875);
    FieldCoupling fc = field_coupling(
        g, I, family(g, I, CorrectorKind::omega_bar1_mu),
        family(g, I, CorrectorKind::omega_bar1_mu, CellDomain::full),
        family(g, I, CorrectorKind::omega_bar2_mu));
    for (int i = 0; i < 3; ++i) {
        CHECK(fc.H1(i, i) > 0.0);
        CHECK(fc.H1(i, i) < 0.875 + 1e-9);
        CHECK(fc.H2(i, i) > 0.8);
        CHECK(fc.H2(i, i) < 1.2);
        CHECK(fc.mu_bar(i, i) > 0.8);
        CHECK(fc.mu_bar(i, i) <= 1.0 + 1e-9);
        for (int j = 0; j < 3; ++j) {
            if (i == j) continue;
            // cubic symmetry kills the off-diagonal couplings
            CHECK(std::fabs(fc.H1(i, j)) < 1e-8);
            CHECK(std::fabs(fc.H2(i, j)) < 1e-8);
        }
    }
    // cubic symmetry: the three diagonal entries agree
    CHECK(fc.H2(1, 1) == doctest::Approx(fc.H2(0, 0)).epsilon(1e-8));
    CHECK(fc.H2(2, 2) == doctest::Approx(fc.H2(0, 0)).epsilon(1e-8));
}

TEST_CASE("cube-hole H1/H2 brackets refine (Richardson self-oracle)") {
    // mu = I, aligned cube hole of side 1/2: chi_bar = 0.875 exactly. With
    // identity permeability both entries are affine in the same gradient
    // average S = M_{Y*}(d1 bar2_1): H2_11 = 1 + S, H1_11 = chi_bar + S.
    HoleSpec hole = HoleSpec::box({0.25, 0.25, 0.25}, {0.75, 0.75, 0.75});
    auto I = constant(Mat3::identity());

    std::vector<double> h1_diag, h2_diag;
    for (int n : {32, 64, 128}) {
        CellGrid g = build_cell_grid(n, 3, hole);
        REQUIRE(porosity(g) == 0.875);
        CorrectorField bar2 =
            solve_corrector(g, I, 0, CorrectorKind::omega_bar2_mu);
        const double vol = std::pow(g.h, 3);
        double grad_avg = 0.0;
        for (std::size_t v = 0; v < g.size(); ++v)
            grad_avg += vol * bar2.face_grad[0][v];
        h2_diag.push_back(1.0 + grad_avg);
        h1_diag.push_back(0.875 + grad_avg);
    }

    for (double v : h1_diag) {
        CHECK(v > 0.0);
        CHECK(v < 0.875 + 1e-9);
    }
    for (double v : h2_diag) {
        CHECK(v > 0.8);
        CHECK(v < 1.2);
    }
    // self-oracle: the fine value is closest to the extrapolated limit and
    // the refinement steps shrink
    double h2_inf = richardson(h2_diag[0], h2_diag[1], h2_diag[2]);
    CHECK(std::fabs(h2_diag[2] - h2_inf) <=
          std::fabs(h2_diag[1] - h2_inf) + 1e-12);
    CHECK(std::fabs(h2_diag[1] - h2_diag[2]) <=
          std::fabs(h2_diag[0] - h2_diag[1]) + 1e-12);
}

TEST_CASE("curie tensor closed forms") {
    SUBCASE("identity H2") {
        CurieTensor ct = curie_tensor(Mat3::identity(), 1.0);
        for (int i = 0; i < 3; ++i)
            CHECK(ct.eigenvalues[i] == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("diagonal shift") {
        CurieTensor ct = curie_tensor(Mat3::diag(1.2, 1.0, 0.8), 0.5);
        CHECK(ct.eigenvalues[0] == doctest::Approx(1.3).epsilon(1e-14));
        CHECK(ct.eigenvalues[1] == doctest::Approx(1.5).epsilon(1e-14));
        CHECK(ct.eigenvalues[2] == doctest::Approx(1.7).epsilon(1e-14));
    }
    SUBCASE("non-symmetric input is symmetrized and the defect reported") {
        Mat3 h2 = Mat3::identity();
        h2(0, 1) = 0.2;  // sym part has 0.1 off-diagonals
        CurieTensor ct = curie_tensor(h2, 1.0);
        CHECK(ct.asymmetry_defect == doctest::Approx(0.2).epsilon(1e-14));
        CHECK(ct.eigenvalues[0] == doctest::Approx(1.9).epsilon(1e-12));
        CHECK(ct.eigenvalues[2] == doctest::Approx(2.1).epsilon(1e-12));
        CHECK(ct.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(curie_tensor(Mat3::identity(), 0.0), std::runtime_error);
}

TEST_CASE("tensor report flags defects") {
    EffectiveTensors t;
    t.A_star = Mat3::identity();
    t.K_star = Mat3::identity();
    t.mu_star_in = Mat3::identity();
    t.mu_star_out = Mat3::identity();
    t.mu_bar = Mat3::identity();
    t.H1 = Mat3::identity();
    t.H2 = Mat3::identity();
    t.chi_bar = 1.0;
    t.curie = curie_tensor(t.H2, 1.0);

    TensorReport rep = tensor_report(t);
    for (const auto& e : rep.entries) {
        if (e.name == "Theta_c") continue;
        CHECK(e.symmetry_defect == 0.0);
        CHECK(e.positive_definite);
    }
    CHECK(rep.to_csv().find("A_star,1,1,1") != std::string::npos);
    CHECK(rep.to_text().find("NOT positive definite") == std::string::npos);

    t.A_star = Mat3::diag(-1.0, 1.0, 1.0);  // forced non-PD input
    TensorReport bad = tensor_report(t);
    CHECK_FALSE(bad.entries[0].positive_definite);
    CHECK(bad.to_text().find("NOT positive definite") != std::string::npos);
}

TEST_CASE("jacobi eigen solver handles a full 3x3") {
    Mat3 m;
    m.a = {4, 1, 0.5, 1, 3, -0.2, 0.5, -0.2, 2};
    EigenSym3 eig = jacobi_eigen_sym3(m, 1e-14);
    // residual check: M v = lambda v for each pair
    for (int k = 0; k < 3; ++k) {
        Vec3 v = {eig.vectors(0, k), eig.vectors(1, k), eig.vectors(2, k)};
        Vec3 mv = m * v;
        for (int i = 0; i < 3; ++i)
            CHECK(mv[i] == doctest::Approx(eig.values[k] * v[i])
                               .epsilon(1e-10));
    }
    CHECK(eig.values[0] <= eig.values[1]);
    CHECK(eig.values[1] <= eig.values[2]);
}
