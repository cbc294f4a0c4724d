#pragma once

#include <optional>
#include <string>
#include <vector>

#include "halflap/domain.hpp"
#include "halflap/grid.hpp"
#include "halflap/nonlinearity.hpp"

namespace halflap {

/// Energy accounting over one cylinder: Dirichlet part, potential part with
/// the c_u offset, total, and the metadata needed by the scaling fit.
struct EnergyBreakdown {
    double dirichlet = 0.0;   // 1/2 integral of |grad v|^2
    double potential = 0.0;   // integral of G(u) - c_u over the bottom
    double total = 0.0;
    double c_u = 0.0;
    double R = 0.0;
    int n = 1;                // base dimension used by the fit basis
};

/// c_offset: automatic (minimum of G over the trace range) or explicit.
struct COffset {
    bool automatic = true;
    double value = 0.0;
    static COffset auto_offset() { return {true, 0.0}; }
    static COffset explicit_offset(double c) { return {false, c}; }
};

/// Breakdown of a field over given region/bottom masks. `weight` multiplies
/// the quadrature pointwise (used by saddle scans in (s, t) coordinates).
EnergyBreakdown energy_breakdown(const ScalarField& v, const Nonlinearity& nl,
                                 const Mask& region, const Mask& bottom,
                                 COffset c_offset, double R, int n,
                                 const ScalarField* weight = nullptr);

/// Convenience overload over a full cylinder domain.
EnergyBreakdown energy_breakdown(const CylinderDomain& dom, const ScalarField& v,
                                 const Nonlinearity& nl, COffset c_offset = COffset::auto_offset());

/// One breakdown per nested sub-cylinder C_r (restriction masks; no
/// re-solve). The c_u offset is computed once from the full trace range.
/// Radii must exceed 2 (the estimates' hypothesis) and 3h.
std::vector<EnergyBreakdown> energy_scan(const CylinderDomain& dom, const ScalarField& v,
                                         const Nonlinearity& nl, const std::vector<double>& radii,
                                         COffset c_offset = COffset::auto_offset());

/// Scan of an assembled saddle field over sub-cylinders in wedge coordinates,
/// weighted so totals are energies in R^(2m); fit dimension n = 2m.
std::vector<EnergyBreakdown> saddle_energy_scan(const WedgeDomain& wedge, const ScalarField& assembled,
                                                const Nonlinearity& nl, const std::vector<double>& radii);

/// Least-squares fit of E(R) = a R^(n-1) log R + b R^(n-1).
struct ScalingFit {
    double a = 0.0;
    double b = 0.0;
    double r_squared = 0.0;
    std::vector<double> radii;
    std::vector<double> residuals;
    bool trend_flagged = false;   // residuals correlate with R (misfit)
    int n = 1;
};

ScalingFit scaling_fit(const std::vector<EnergyBreakdown>& scan);

/// Per-level sup of |grad v|, the fitted constant of C/(1+lambda), and the
/// max/min ratio of profile(lambda) * (1 + lambda).
struct GradientDecayProfile {
    std::vector<double> lambdas;
    std::vector<double> sup_grad;
    double C = 0.0;
    double max_ratio = 0.0;
};

GradientDecayProfile gradient_decay_profile(const ScalarField& v);

/// CSV with header R,dirichlet,potential,total,c_u (LF endings, %.17g).
std::string scan_csv(const std::vector<EnergyBreakdown>& scan);
std::string fit_report(const ScalingFit& fit);

} // namespace halflap
