#pragma once

#include <functional>
#include <string>
#include <vector>

namespace halflap {

/// Reaction triple (f, f', G) with G' = -f. G is stored explicitly rather
/// than integrated from f at call time; the pairing is enforced by
/// consistency_report / tests, not by construction.
struct Nonlinearity {
    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> fprime;
    std::function<double(double)> G;
    std::string smoothness; // declared regularity, recorded as metadata only

    double operator()(double u) const { return f(u); }
};

/// Probe-grid hypothesis checks (h1)-(h3): f odd; G a double well with
/// G >= 0 = G(+-1), G > 0 on (-1, 1); f' decreasing on (0, 1). Booleans are
/// computed from probe grids with the recorded tolerances, never asserted.
struct HypothesisReport {
    bool odd = false;
    bool double_well = false;
    bool fprime_decreasing = false;
    double tol_odd = 1e-8;
    double tol_well = 1e-8;
    double tol_decreasing = 1e-9;
    bool all() const { return odd && double_well && fprime_decreasing; }
};

/// max |G'(u) + f(u)| and max |f'(u) - (f)'_fd(u)| over a probe grid of
/// [-2, 2], central differences with step 1e-4.
struct ConsistencyReport {
    double max_G_defect = 0.0;
    double max_fprime_defect = 0.0;
};

/// Named builtins:
///   allen-cahn        f = u - u^3,   G = (1 - u^2)^2 / 4
///   sine              f = sin(pi u), G = (1/pi)(1 + cos(pi u))
///   cubic-custom(a,b) f = a u - b u^3, G the exact antiderivative of -f
///                     with G(1) = 0
Nonlinearity builtin(const std::string& name);

/// f given by polynomial coefficients (c0 + c1 u + ...); G is the exact
/// antiderivative of -f with the constant fixed by G(1) = 0.
Nonlinearity polynomial_nonlinearity(const std::vector<double>& f_coeffs,
                                     const std::string& name = "polynomial");

/// Minimum of G over [lo, hi]: dense 4096-point scan plus one Newton
/// refinement step at the best cell, clamped to the interval.
struct RangeMinimum {
    double value = 0.0;
    double argmin = 0.0;
};
RangeMinimum c_u_of(const Nonlinearity& nl, double lo, double hi);

HypothesisReport check_hypotheses(const Nonlinearity& nl);
ConsistencyReport consistency_report(const Nonlinearity& nl);

} // namespace halflap
