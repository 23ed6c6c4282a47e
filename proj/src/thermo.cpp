#include "perfomag/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace perfomag {

ThermoParams ThermoParams::make(double c1, double c2, double k0, double k1) {
    if (!(c1 > 0.0 && c2 > 0.0 && k0 > 0.0 && k1 > 0.0))
        throw std::runtime_error("thermo: c1, c2, k0, k1 must all be > 0");
    ThermoParams p;
    p.c1 = c1;
    p.c2 = c2;
    p.k0 = k0;
    p.k1 = k1;
    p.pi0 = std::min(k0 / c1, k1 / c2);
    p.pi1 = std::max(k0 / c1, k1 / c2);
    return p;
}

double thermo_F(double theta, const ThermoParams& p) {
    if (!(theta > 0.0))
        throw std::domain_error("F: theta must be > 0");
    return p.c1 * std::log(theta) + p.c2 * theta;
}

GResult thermo_G_checked(double v, const ThermoParams& p, double tol,
                         int max_iter) {
    GResult out;
    const double theta_min = std::numeric_limits<double>::min();

    // Below F(theta_min) the preimage underflows; clamp with a flag.
    if (v <= thermo_F(theta_min, p)) {
        out.theta = theta_min;
        out.clamped = true;
        return out;
    }

    // Valid bracket: for theta <= 1, c1*ln(theta) = v - c2*theta >= v - c2,
    // so theta >= exp((v - c2)/c1); capping the exponent at 0 keeps the
    // bound on the correct side for theta > 1 as well. For theta >= 1,
    // c2*theta <= v, so theta <= max(1, v/c2).
    double lo = std::exp(std::min((v - p.c2) / p.c1, 0.0));
    double hi = std::max(1.0, v / p.c2) + 1.0;
    if (lo <= 0.0 || !std::isfinite(lo)) lo = theta_min;

    const double scale = std::max(1.0, std::fabs(v));
    double x = std::clamp(v >= p.c2 ? v / p.c2 : lo, lo, hi);
    double f = thermo_F(x, p) - v;

    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it;
        if (std::fabs(f) <= tol * scale) break;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        double fp = p.c1 / x + p.c2;  // F' >= c2 > 0
        double step = f / fp;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);  // bisection fallback
        x = xn;
        f = thermo_F(x, p) - v;
    }
    out.theta = x;
    return out;
}

double thermo_G(double v, const ThermoParams& p, double tol) {
    return thermo_G_checked(v, p, tol).theta;
}

double thermo_g(double theta, const ThermoParams& p) {
    if (!(theta > 0.0))
        throw std::domain_error("g: theta must be > 0");
    return (p.k0 + p.k1 * theta) / (p.c1 + p.c2 * theta);
}

HeatCoeffs heat_coeffs(double theta, const ThermoParams& p) {
    if (!(theta > 0.0))
        throw std::domain_error("heat_coeffs: theta must be > 0");
    return {p.c1 * theta + 0.5 * p.c2 * theta * theta, p.k0 + p.k1 * theta};
}

}  // namespace perfomag
