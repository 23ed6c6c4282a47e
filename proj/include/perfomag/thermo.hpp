#ifndef PERFOMAG_THERMO_HPP
#define PERFOMAG_THERMO_HPP

namespace perfomag {

// Heat-law constants c(theta) = c1*theta + c2*theta^2/2, k(theta) = k0 +
// k1*theta, together with the derived bounds pi0 <= g <= pi1 of the
// diffusion factor.
struct ThermoParams {
    double c1 = 1.0, c2 = 1.0, k0 = 1.0, k1 = 1.0;
    double pi0 = 1.0, pi1 = 1.0;

    static ThermoParams make(double c1, double c2, double k0, double k1);
};

// F(theta) = c1*ln(theta) + c2*theta, strictly increasing, bijective from
// (0, inf) onto R.
double thermo_F(double theta, const ThermoParams& p);

struct GResult {
    double theta = 0.0;
    bool clamped = false;  // underflow clamp at the smallest positive normal
    int iterations = 0;
};

// G = F^{-1}, defined on all of R, computed by safeguarded Newton with a
// bisection fallback. |F(G(v)) - v| <= tol * max(1, |v|).
GResult thermo_G_checked(double v, const ThermoParams& p, double tol = 1e-13,
                         int max_iter = 100);
double thermo_G(double v, const ThermoParams& p, double tol = 1e-13);

// g(theta) = (k0 + k1*theta)/(c1 + c2*theta), bounded in [pi0, pi1].
double thermo_g(double theta, const ThermoParams& p);

struct HeatCoeffs {
    double c = 0.0;
    double k = 0.0;
};
HeatCoeffs heat_coeffs(double theta, const ThermoParams& p);

}  // namespace perfomag

#endif
