#pragma once

#include <functional>
#include <string>
#include <vector>

#include "halflap/domain.hpp"
#include "halflap/grid.hpp"

namespace halflap {

/// One quadrature cell of a trace set A: ambient centre, measure, distance
/// to the marked interface Gamma (along A), and which side of Gamma it lies
/// on (+1/-1; 0 when Gamma does not split A in two).
struct TraceCell {
    std::array<double, 3> z{};
    double measure = 0.0;
    double dist = 0.0;
    double side = 0.0;
    int facet = 0;
};

/// Discretised set A with marked Gamma. `intrinsic_dim` is the n of the
/// kernel |z - zbar|^(n+1); distances between cells are ambient chords.
struct TraceDomain {
    int intrinsic_dim = 1;
    int ambient_dim = 1;
    double h = 0.0;
    bool two_sided = true;
    std::vector<TraceCell> cells;

    double total_measure() const;
};

/// Q_1 = (-1, 1) in R^1 with Gamma = {0}.
TraceDomain make_segment_domain(double h);

/// The boundary of the unit cylinder C_1 = (-1, 1) x (0, 1) (n = 1), split
/// into bottom / lateral / top facets; Gamma is the edge set
/// dB_1 x {lambda = 0}, i.e. the two bottom corners. Distances to Gamma are
/// measured along the boundary loop; pair distances in the seminorm are
/// ambient chords.
TraceDomain make_cylinder_boundary_domain(double h);

/// Function on a trace domain with the key theorem's metadata.
struct TraceFunction {
    TraceDomain domain;
    std::vector<double> values;
    double c0 = 1.0;
    double eps = 0.0;
};

/// Gagliardo double sum: sum over ordered cell pairs of
/// |w(z)-w(zbar)|^2 / |z-zbar|^(n+1) * mu mu, cell-centre rule, pairs with
/// |z - zbar| < h/2 excluded. Deterministic order.
double h_half_seminorm(const TraceDomain& dom, const std::vector<double>& values);
double l2_norm_sq(const TraceDomain& dom, const std::vector<double>& values);

/// w = clamp(side * dist / eps, -1, 1) (or clamp(dist/eps, 0, 1) for
/// one-sided Gamma); satisfies |w| <= 1 and the gradient hypothesis with
/// c0 = 1 by construction. eps must lie in (0, 1/2).
TraceFunction ramp_profile(const TraceDomain& dom, double eps);

/// Checks the two hypothesis bounds on a trace function: sup |w| / c0 and
/// the worst ratio of the discrete tangential gradient to
/// c0 min(1/eps, 1/dist) (1 + 3h).
struct TraceHypothesisCheck {
    double sup_amplitude_ratio = 0.0;
    double worst_gradient_ratio = 0.0;
    bool ok = false;
};
TraceHypothesisCheck check_trace_hypotheses(const TraceFunction& fn);

struct LogBoundRow {
    double eps = 0.0;
    double l2_part = 0.0;
    double seminorm = 0.0;
    double total = 0.0;
};

/// Squared norm per epsilon and the least-squares fit total = s |log eps| + b.
struct LogBoundFit {
    std::vector<LogBoundRow> rows;
    std::vector<double> dropped; // under-resolved epsilons (< 4h)
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LogBoundFit log_bound_experiment(const TraceDomain& dom, std::vector<double> epsilons);

/// Ratio of the harmonic extension's Dirichlet energy (no 1/2) to the
/// squared H^(1/2)(dC_1) norm of the boundary data, evaluated at spacing h.
struct ExtensionRatio {
    double dirichlet_energy = 0.0;
    double norm_sq = 0.0;
    double ratio = 0.0;
};

/// `boundary` maps an ambient point (x, lambda) on dC_1 to a value.
ExtensionRatio extension_inequality_check(
    const std::function<double(double, double)>& boundary, double h);

/// Band-limited loop data on dC_1: a seeded random trigonometric polynomial
/// in the arclength along the boundary loop (perimeter 6), with `modes`
/// harmonics. Continuous around the loop by construction.
std::function<double(double, double)> random_loop_data(std::uint64_t seed, int modes);

std::string log_bound_csv(const LogBoundFit& fit);
std::string log_bound_report(const LogBoundFit& fit);

} // namespace halflap
