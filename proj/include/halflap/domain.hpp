#pragma once

#include "halflap/grid.hpp"

namespace halflap {

enum class BaseShape { Ball, Box };

/// Discretisation of the cylinder C_R = B_R x (0, height) (or box base
/// [-R, R]^n). The grid has n base axes followed by the lambda axis.
/// Masks: `in` covers the closed cylinder, `bottom` is {|x| <= R, lambda=0},
/// `interior` the points with all 2(n+1) neighbours inside and lambda in
/// (0, height), `plus` the lateral and top boundary {lambda > 0}. The three
/// masks are disjoint and cover `in`.
struct CylinderDomain {
    int n = 1;
    double R = 1.0;
    double height = 1.0;
    BaseShape base_shape = BaseShape::Ball;
    UniformGrid grid;
    Mask in, interior, bottom, plus;

    /// Trace u = v(., 0): same grid, masked to `bottom`. Lower-dimensional
    /// objects are represented as one-layer slabs; the grid module treats
    /// the degenerate axis with counting measure.
    ScalarField trace(const ScalarField& v) const;
};

/// Build a cylinder with spacing h (axis counts are rounded to fit).
CylinderDomain make_cylinder(int n, double R, double height, double h,
                             BaseShape shape = BaseShape::Ball);

/// Restriction masks of the sub-cylinder C_r (same base shape/centre):
/// region = {base point of C_r} x {0 <= lambda <= r}, bottom likewise.
struct CylinderRestriction {
    Mask region;
    Mask bottom;
};
CylinderRestriction restrict_cylinder(const CylinderDomain& dom, double r);

/// Discretisation of the wedge set O_R x (0, L) in the (s, t, lambda)
/// variables: {0 <= t <= s, s^2 + t^2 <= R^2, 0 <= lambda <= L}. The
/// diagonal {s = t} carries the odd-reflection trace and is pinned to zero
/// together with the outer arc and the top.
struct WedgeDomain {
    int m = 1;
    double R = 1.0;
    double L = 1.0;
    UniformGrid grid;          // axes: s, t, lambda
    Mask in;                   // wedge points (closed)
    Mask pinned;               // diagonal + arc + top (v = 0 there)
    Mask bottom;               // lambda = 0 slice of `in`
    Mask quarter;              // quarter disk {s, t >= 0, s^2+t^2 <= R^2} x [0, L]

    /// Volume weight s^(m-1) t^(m-1); identically 1 when m = 1.
    double weight_at(double s, double t) const;
};

WedgeDomain make_wedge(int m, double R, double L, double h);

/// Odd reflection across {s = t}: input is a field on the wedge grid with
/// values for t <= s; output covers the full quarter disk with
/// v(s, t) = -v(t, s) for t > s.
ScalarField odd_reflect(const WedgeDomain& w, const ScalarField& v);

/// Pointwise weight field c(m) * s^(m-1) t^(m-1) on the wedge grid, where
/// c(m) = (area of S^(m-1))^2 converts quarter-disk (s, t) integrals into
/// integrals over B_R in R^(2m). For m = 1 the weight is the constant 4.
ScalarField ambient_weight(const WedgeDomain& w);

/// Sub-cylinder restriction masks in wedge coordinates:
/// {s^2 + t^2 <= r^2} x {0 <= lambda <= r} intersected with `quarter`.
CylinderRestriction restrict_wedge_cylinder(const WedgeDomain& w, double r);

} // namespace halflap
