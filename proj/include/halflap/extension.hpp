#pragma once

#include <functional>
#include <vector>

#include "halflap/domain.hpp"
#include "halflap/grid.hpp"

namespace halflap {

/// Smooth bump exp(-1/(1-|x|^2)) on the unit ball of R^n, normalised to
/// unit mass numerically.
struct MollifierKernel {
    int n = 1;
    double normalization = 1.0;

    double value(double r2) const; // takes |x|^2
};
MollifierKernel make_bump_kernel(int n);
/// Quadrature check of the unit-mass invariant (fine grid); returns |mass-1|.
double kernel_mass_defect(const MollifierKernel& k);

/// Harmonic extension of bottom data by half-space Poisson convolution.
/// `u` is a one-layer field (its mask marks the bottom slab of its grid along
/// the last axis); output lives on the same grid extended in lambda over
/// `levels`, which must match the grid's lambda coordinates.
///
/// Far field: for n = 1 the kernel tail masses are assigned exactly (closed
/// form) to the edge values, which realises constant padding. For n >= 2 the
/// in-domain weights are renormalised; edge behaviour is approximate there.
ScalarField poisson_extend(const ScalarField& bottom, const UniformGrid& target);

struct MollifierReport {
    double max_l2_ratio = 0.0;    // max over levels of ||ext|| / ||data||
    bool l2_bound_ok = true;
};

/// Extension by convolution with lambda^-n K(x/lambda). Data outside the
/// grid is taken from the nearest edge (clamped indices), so constants are
/// extended exactly; levels with lambda < 2h use a refined sub-grid kernel
/// quadrature with linear interpolation of the data. The L2 post-check
/// assumes data that flattens toward the edge.
ScalarField mollifier_extend(const ScalarField& bottom, const MollifierKernel& kernel,
                             const UniformGrid& target, MollifierReport* report = nullptr);

struct DirichletResult {
    ScalarField field;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
    double boundary_min = 0.0, boundary_max = 0.0;
    double interior_min = 0.0, interior_max = 0.0;
    /// Discrete maximum principle: interior range inside boundary range
    /// (with rounding slack).
    bool max_principle_ok = false;
    std::vector<double> residual_history; // only kept when not converged
};

/// Conjugate-gradient solve of the 5/7-point Laplace system on the cylinder
/// interior with Dirichlet data taken from `boundary_values` on bottom and
/// plus masks. Relative residual target 1e-10.
DirichletResult dirichlet_solve(const CylinderDomain& dom, const ScalarField& boundary_values,
                                double tol = 1e-10, int max_iter = 0);

struct ComparisonData {
    ScalarField eta;     // radial cutoff, 1 on B_{R-1}, 0 outside B_R
    ScalarField g;       // bottom data s*eta + (1-eta) v(.,0)
    ScalarField wbar;    // harmonic in C_R, = g on bottom, = v on plus
    double grad_g_sup = 0.0;
    double s = 0.0;
};

/// Comparison construction: quintic smoothstep cutoff on [R-1, R],
/// g = s eta_R + (1 - eta_R) v(., 0), and the Dirichlet solve with bottom g
/// and lateral/top v. s must lie in the range of the trace of v.
ComparisonData build_comparison(const CylinderDomain& dom, const ScalarField& v, double s);

} // namespace halflap
