#pragma once

#include <functional>

#include "halflap/domain.hpp"
#include "halflap/grid.hpp"

namespace halflap {

/// Closed-form reference fields.
///
/// The arctan layer solves the extension problem for f(u) = sin(pi u):
///   u(x)    = (2/pi) arctan(pi x)
///   v(x,l)  = (2/pi) arctan(pi x / (1 + pi l))
/// v is harmonic in the upper half-plane and -d_lambda v = sin(pi v) on
/// {lambda = 0} holds exactly.
double arctan_layer_trace(double x);
double arctan_layer_extension(double x, double lambda);
/// d/dx and d/dlambda of the extension.
double arctan_layer_dx(double x, double lambda);
double arctan_layer_dlambda(double x, double lambda);
/// sup over x of |grad v| at a level: 2 / (1 + pi lambda).
double arctan_layer_grad_sup(double lambda);

/// Field with v(p) = fn(x_1, .., x_d) evaluated on every grid point (full mask).
ScalarField sample_field(const UniformGrid& g,
                         const std::function<double(const std::array<double, kMaxDim>&)>& fn);

/// The arctan layer sampled on a cylinder grid: v(x_n, lambda), masked to
/// the cylinder. x_n is the last base axis; tilt rotates the profile to
/// v(e . x, lambda) for a unit base vector e (n = 2 only).
ScalarField layer_field(const CylinderDomain& dom);
ScalarField tilted_layer_field(const CylinderDomain& dom, double e1, double e2);

} // namespace halflap
