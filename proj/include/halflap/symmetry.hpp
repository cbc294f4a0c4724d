#pragma once

#include <array>
#include <vector>

#include "halflap/domain.hpp"
#include "halflap/grid.hpp"

namespace halflap {

inline constexpr double kPhiFloor = 1e-8;

/// Core region of a cylinder: the central 60% along each base axis and
/// lambda <= 0.6 height (a 20% collar dodges truncation artefacts).
Mask core_mask(const CylinderDomain& dom);
Mask core_bottom_mask(const CylinderDomain& dom);

/// phi = directional derivative of v along `axis`. The field must be
/// monotone along that axis (checked on the core; rejects with the observed
/// violation fraction in the message).
ScalarField stability_witness(const CylinderDomain& dom, const ScalarField& v, int axis);

/// Diagnostics for the Liouville mechanism: quotients sigma_i = v_{x_i}/phi,
/// residuals of div(phi^2 grad sigma), bottom flux -sigma d_lambda sigma,
/// growth ratios of the (phi sigma)^2 integrals, and the constancy measure
/// osc over the core.
struct SymmetryReport {
    std::vector<ScalarField> sigma;            // one per base axis
    std::vector<double> osc;                   // max - min over the core
    std::vector<double> interior_residual_rms; // div(phi^2 grad sigma) on the core
    std::vector<double> bottom_flux_sup;       // sup |-sigma d_lambda sigma| on the core bottom
    std::vector<double> integral_ratio_max;    // max_r of int (phi sigma)^2 / (r^2 log r)
    std::array<double, 3> direction{};         // estimated unit direction a
    double alignment_deviation = 0.0;          // max angle(grad u, a) on the core
    bool direction_defined = false;
    bool is_one_d = false;                     // all osc <= 10 h
    double phi_floor = kPhiFloor;
};

SymmetryReport liouville_check(const CylinderDomain& dom, const ScalarField& v,
                               const ScalarField& phi);

/// Direction estimate from a trace: a = normalised average of grad u over
/// the core, deviation = max angle between the pointwise gradient and a
/// where |grad u| > 1e-6. Throws when fewer than half the core points carry
/// a usable gradient.
struct DirectionEstimate {
    std::array<double, 3> a{};
    double deviation = 0.0;
};
DirectionEstimate one_d_direction(const CylinderDomain& dom, const ScalarField& trace);

} // namespace halflap
