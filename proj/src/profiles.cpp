#include "halflap/profiles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace halflap {

using std::numbers::pi;

double arctan_layer_trace(double x) { return (2.0 / pi) * std::atan(pi * x); }

double arctan_layer_extension(double x, double lambda) {
    return (2.0 / pi) * std::atan(pi * x / (1.0 + pi * lambda));
}

double arctan_layer_dx(double x, double lambda) {
    const double a = 1.0 + pi * lambda;
    return 2.0 * a / (a * a + pi * pi * x * x);
}

double arctan_layer_dlambda(double x, double lambda) {
    const double a = 1.0 + pi * lambda;
    return -2.0 * pi * x / (a * a + pi * pi * x * x);
}

double arctan_layer_grad_sup(double lambda) { return 2.0 / (1.0 + pi * lambda); }

ScalarField sample_field(const UniformGrid& g,
                         const std::function<double(const std::array<double, kMaxDim>&)>& fn) {
    ScalarField f(g, 0.0);
    for (std::size_t p = 0; p < g.size(); ++p) f[p] = fn(g.point(p));
    return f;
}

ScalarField layer_field(const CylinderDomain& dom) {
    const int xn = dom.n - 1;
    const int lam = dom.n;
    ScalarField f = sample_field(dom.grid, [&](const std::array<double, kMaxDim>& x) {
        return arctan_layer_extension(x[static_cast<std::size_t>(xn)], x[static_cast<std::size_t>(lam)]);
    });
    f.mask() = dom.in;
    return f;
}

ScalarField tilted_layer_field(const CylinderDomain& dom, double e1, double e2) {
    if (dom.n != 2) throw std::invalid_argument("tilted_layer_field: base dimension must be 2");
    const double norm = std::hypot(e1, e2);
    if (!(norm > 0.0)) throw std::invalid_argument("tilted_layer_field: zero direction");
    const double a = e1 / norm, b = e2 / norm;
    ScalarField f = sample_field(dom.grid, [&](const std::array<double, kMaxDim>& x) {
        return arctan_layer_extension(a * x[0] + b * x[1], x[2]);
    });
    f.mask() = dom.in;
    return f;
}

} // namespace halflap
