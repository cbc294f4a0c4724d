#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "halflap/domain.hpp"
#include "halflap/grid.hpp"
#include "halflap/nonlinearity.hpp"

namespace halflap {

enum class InitPolicy {
    TanhLayer,   // tanh(x_n), clipped to box bounds
    Constant,
    Field,       // user-provided initial field
    SaddleTanh,  // tanh((s - t) / sqrt 2) on wedge grids
};

enum class SolveStatus { Converged, IterationCap, LineSearchFailure, NanEnergy };

struct SolveConfig {
    int max_iterations = 5000;
    double energy_tol = 1e-11;   // relative energy decrease, two consecutive accepted steps
    double residual_tol = 1e-7;  // sup of the volume-scaled Euler-Lagrange residual
    double armijo_c1 = 1e-4;
    double armijo_backtrack = 0.5;
    int armijo_max_backtracks = 50;
    InitPolicy init = InitPolicy::TanhLayer;
    double init_constant = 0.0;
    std::optional<ScalarField> init_field;
    std::optional<ScalarField> lower;  // box bounds; projected-gradient mode when set
    std::optional<ScalarField> upper;
    std::function<void(int, const ScalarField&)> iterate_callback; // diagnostics hook
};

/// Converged (or best-effort) variational solution. `v` carries the full
/// cylinder mask; `trace` is v restricted to the bottom.
struct Solution {
    ScalarField v;
    ScalarField trace;
    SolveStatus status = SolveStatus::IterationCap;
    int iterations = 0;
    std::vector<double> energy_history;   // one entry per accepted step
    double final_energy = 0.0;
    double interior_residual_sup = 0.0;   // Laplacian stencil residual
    double neumann_defect_sup = 0.0;      // |-d_lambda v - f(v)| on the bottom
    double scaled_gradient_sup = 0.0;     // volume-scaled (projected) gradient
};

/// Minimises the discrete energy
///   sum_bonds 1/2 |dv|^2 * dualvol + sum_bottom G(v) * area
/// over interior + bottom unknowns with the lateral/top values pinned to
/// `plus_boundary`. The bond quadrature uses trapezoid dual volumes, so the
/// gradient of the energy is exactly the interior 5/7-point stencil and the
/// ghost-point Neumann row at the bottom. With box bounds the iteration is
/// projected and stationarity is measured by the projected gradient.
Solution minimize_cylinder(const CylinderDomain& dom, const Nonlinearity& nl,
                           const ScalarField& plus_boundary, const SolveConfig& cfg);

struct SaddleSolution {
    Solution core;          // field on the wedge (t <= s), zero on the pinned set
    ScalarField assembled;  // odd reflection across {s = t} on the quarter disk
    bool nontrivial = true; // false when the minimiser is identically zero
};

/// Minimises the weighted wedge energy (weight s^(m-1) t^(m-1), evaluated at
/// bond midpoints) with v = 0 on the Simons-cone trace, the outer arc and the
/// top, and v kept in [0, 1] by projection.
SaddleSolution saddle_minimize(const WedgeDomain& wedge, const Nonlinearity& nl,
                               const SolveConfig& cfg);

struct SlideProfile {
    std::vector<double> shifts;    // as realised on the grid
    std::vector<double> energies;  // E_{C_R}(v^t), potential offset c = 0
    bool truncated = false;        // some requested shifts left the field
};

/// Energies of x_n-shifted window restrictions of a monotone field on a wide
/// box: window = {|x_n - t| <= R} x (0, R).
SlideProfile slide_energy_profile(const CylinderDomain& dom, const ScalarField& v,
                                  const Nonlinearity& nl, double R,
                                  const std::vector<double>& shifts);

struct LimitProfiles {
    ScalarField v_lower;  // masked to the x_n = min slab
    ScalarField v_upper;  // masked to the x_n = max slab
    double m = 0.0;       // inf of the lower trace
    double m_tilde = 0.0; // sup of the lower trace
    double M_tilde = 0.0; // inf of the upper trace
    double M = 0.0;       // sup of the upper trace
};

/// Edge averages approximating the limits as x_n -> -inf / +inf. The input
/// must be monotone in x_n.
LimitProfiles limit_profiles(const CylinderDomain& dom, const ScalarField& v,
                             double edge_fraction);

/// Compares the analytic energy gradient against central finite differences
/// of the energy along `n_dirs` seeded random directions supported on the
/// unknowns. Returns the maximum relative error.
double gradient_consistency_check(const CylinderDomain& dom, const Nonlinearity& nl,
                                  const ScalarField& state, int n_dirs, std::uint64_t seed);

/// Perturbs a converged solution by seeded random bumps vanishing on the
/// lateral/top boundary and returns the most negative energy change,
/// normalised by the bump's weighted L1 mass (a discrete minimality check:
/// values above -residual_tol are consistent with stationarity).
double minimality_check(const CylinderDomain& dom, const Nonlinearity& nl,
                        const Solution& sol, int n_bumps, std::uint64_t seed);

/// Discrete energy of a field in the solver's own (bond) quadrature;
/// exposed for cross-checks against the grid-module quadrature.
double discrete_cylinder_energy(const CylinderDomain& dom, const Nonlinearity& nl,
                                const ScalarField& v);

/// Coarse-to-fine solve: minimises on each spacing in order, interpolating
/// the previous solution as the next initial guess. `boundary_for` supplies
/// the lateral/top data on each level's grid. Returns the finest Solution.
Solution cascade_minimize_cylinder(int n, double R, double height, BaseShape shape,
                                   const Nonlinearity& nl,
                                   const std::function<ScalarField(const CylinderDomain&)>& boundary_for,
                                   const SolveConfig& cfg, const std::vector<double>& spacings);

SaddleSolution cascade_saddle_minimize(int m, double R, double L, const Nonlinearity& nl,
                                       const SolveConfig& cfg, const std::vector<double>& spacings);

} // namespace halflap
