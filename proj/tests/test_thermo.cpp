#include "perfomag/thermo.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"

using namespace perfomag;

namespace {

// independent inversion oracle: plain bisection on F(x) - v
double bisect_G(double v, const ThermoParams& p) {
    double lo = 1e-300, hi = 1.0;
    while (thermo_F(hi, p) < v) hi *= 2.0;
    while (lo < 1e-12 && thermo_F(std::max(lo, 1e-300), p) > v) lo *= 0.5;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (thermo_F(mid, p) < v)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> log_spaced(double lo, double hi, int count) {
    std::vector<double> out;
    double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < count; ++i)
        out.push_back(std::exp(llo + (lhi - llo) * i / (count - 1)));
    return out;
}

}  // namespace

TEST_CASE("F at analytic points") {
    ThermoParams p = ThermoParams::make(1, 1, 1, 1);
    CHECK(thermo_F(1.0, p) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(thermo_F(std::exp(1.0), p) ==
          doctest::Approx(1.0 + std::exp(1.0)).epsilon(1e-15));
    ThermoParams q = ThermoParams::make(2, 0.5, 1, 1);
    CHECK(thermo_F(4.0, q) ==
          doctest::Approx(2.0 * std::log(4.0) + 2.0).epsilon(1e-15));
    CHECK_THROWS_AS(thermo_F(0.0, p), std::domain_error);
    CHECK_THROWS_AS(thermo_F(-1.0, p), std::domain_error);
}

TEST_CASE("G inverts F") {
    ThermoParams p = ThermoParams::make(1, 1, 1, 1);
    for (double theta : {0.1, 1.0, 10.0}) {
        double v = thermo_F(theta, p);
        CHECK(thermo_G(v, p) == doctest::Approx(theta).epsilon(1e-12));
    }
    CHECK(thermo_G(1.0, p) == doctest::Approx(1.0).epsilon(1e-13));
    // bisection oracle, independent of the Newton implementation
    double g = thermo_G(3.718281828, p);
    double oracle = bisect_G(3.718281828, p);
    CHECK(g == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(g == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
}

TEST_CASE("G handles extreme arguments") {
    ThermoParams p = ThermoParams::make(1, 1, 1, 1);
    GResult r = thermo_G_checked(-1e9, p);
    CHECK(r.clamped);
    CHECK(r.theta == std::numeric_limits<double>::min());
    GResult big = thermo_G_checked(1e9, p);
    CHECK_FALSE(big.clamped);
    CHECK(thermo_F(big.theta, p) == doctest::Approx(1e9).epsilon(1e-12));
    // moderately negative v: theta deep in the logarithmic regime
    GResult neg = thermo_G_checked(-50.0, p);
    CHECK_FALSE(neg.clamped);
    CHECK(thermo_F(neg.theta, p) ==
          doctest::Approx(-50.0).epsilon(1e-12));
}

TEST_CASE("g bounds and limits") {
    ThermoParams p = ThermoParams::make(1, 2, 2, 1);  // c1=1 c2=2 k0=2 k1=1
    CHECK(p.pi0 == 0.5);
    CHECK(p.pi1 == 2.0);
    CHECK(thermo_g(1.0, p) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::fabs(thermo_g(1e-9, p) - p.k0 / p.c1) < 1e-8);
    CHECK(std::fabs(thermo_g(1e9, p) - p.k1 / p.c2) < 1e-8);
    CHECK_THROWS_AS(thermo_g(0.0, p), std::domain_error);
}

TEST_CASE("heat law coefficients") {
    ThermoParams p = ThermoParams::make(1, 1, 1, 1);
    HeatCoeffs hc = heat_coeffs(2.0, p);
    CHECK(hc.c == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(hc.k == doctest::Approx(3.0).epsilon(1e-15));
    HeatCoeffs tiny = heat_coeffs(1e-12, p);
    CHECK(tiny.c == doctest::Approx(0.0).epsilon(1e-11));
    CHECK(tiny.k == doctest::Approx(p.k0).epsilon(1e-11));
    CHECK_THROWS_AS(heat_coeffs(0.0, p), std::domain_error);
}

TEST_CASE("F' matches a finite difference") {
    ThermoParams p = ThermoParams::make(1, 1, 1, 1);
    const double theta = 1.5, d = 1e-7;
    double fd = (thermo_F(theta + d, p) - thermo_F(theta - d, p)) / (2 * d);
    CHECK(fd == doctest::Approx(p.c1 / theta + p.c2).epsilon(1e-6));
}

TEST_CASE("monotonicity and two-sided round trips on a log grid") {
    ThermoParams p = ThermoParams::make(1.3, 0.7, 2.1, 0.9);
    auto thetas = log_spaced(1e-6, 1e6, 1000);
    double prev_f = -std::numeric_limits<double>::infinity();
    double prev_g = 0.0;
    for (double theta : thetas) {
        double f = thermo_F(theta, p);
        CHECK(f > prev_f);
        prev_f = f;
        double back = thermo_G(f, p);
        CHECK(std::fabs(back - theta) <= 1e-12 * std::max(1.0, theta));
        CHECK(back > prev_g);  // G strictly increasing along the image grid
        prev_g = back;
        CHECK(std::fabs(thermo_F(back, p) - f) <=
              1e-12 * std::max(1.0, std::fabs(f)));
        double gv = thermo_g(theta, p);
        CHECK(gv >= p.pi0 - 1e-15);
        CHECK(gv <= p.pi1 + 1e-15);
    }
}

TEST_CASE("G is 1/c2-Lipschitz") {
    ThermoParams p = ThermoParams::make(0.8, 2.5, 1.0, 1.0);
    auto vs = log_spaced(1e-3, 1e4, 60);
    for (std::size_t i = 0; i + 1 < vs.size(); ++i) {
        double v1 = vs[i] - 2.0, v2 = vs[i + 1] - 2.0;
        double g1 = thermo_G(v1, p), g2 = thermo_G(v2, p);
        CHECK(std::fabs(g1 - g2) <=
              std::fabs(v1 - v2) / p.c2 + 1e-12 * std::fabs(v1 - v2));
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(ThermoParams::make(1, 0, 1, 1), std::runtime_error);
    CHECK_THROWS_AS(ThermoParams::make(-1, 1, 1, 1), std::runtime_error);
}
