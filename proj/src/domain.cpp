#include "halflap/domain.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace halflap {

namespace {

int count_for(double halfwidth, double h) {
    return 2 * static_cast<int>(std::llround(halfwidth / h)) + 1;
}

bool in_base(const CylinderDomain& d, const std::array<double, kMaxDim>& x) {
    if (d.base_shape == BaseShape::Box) {
        for (int a = 0; a < d.n; ++a)
            if (std::abs(x[static_cast<std::size_t>(a)]) > d.R * (1.0 + 1e-12)) return false;
        return true;
    }
    double r2 = 0.0;
    for (int a = 0; a < d.n; ++a) r2 += x[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
    return r2 <= d.R * d.R * (1.0 + 1e-12);
}

} // namespace

CylinderDomain make_cylinder(int n, double R, double height, double h, BaseShape shape) {
    if (n < 1 || n > 3) throw std::invalid_argument("make_cylinder: base dimension in [1, 3]");
    if (!(R > 0.0) || !(height > 0.0) || !(h > 0.0))
        throw std::invalid_argument("make_cylinder: R, height, h must be > 0");
    std::vector<AxisSpec> axes;
    for (int a = 0; a < n; ++a) axes.push_back({-R, h, count_for(R, h)});
    const int nl = static_cast<int>(std::llround(height / h)) + 1;
    axes.push_back({0.0, h, nl < 2 ? 2 : nl});

    CylinderDomain d;
    d.n = n;
    d.R = R;
    d.height = height;
    d.base_shape = shape;
    d.grid = UniformGrid(std::move(axes));
    const std::size_t N = d.grid.size();
    d.in.assign(N, 0);
    d.interior.assign(N, 0);
    d.bottom.assign(N, 0);
    d.plus.assign(N, 0);

    const int lam_axis = n;
    IndexWalker w(d.grid);
    for (std::size_t p = 0; p < N; ++p, w.advance()) {
        const auto x = d.grid.point(p);
        if (in_base(d, x)) d.in[p] = 1;
    }
    w = IndexWalker(d.grid);
    for (std::size_t p = 0; p < N; ++p, w.advance()) {
        if (!d.in[p]) continue;
        const int il = w.i[static_cast<std::size_t>(lam_axis)];
        if (il == 0) { d.bottom[p] = 1; continue; }
        bool inner = il + 1 < d.grid.axis(lam_axis).count;
        for (int a = 0; a < n && inner; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            const std::size_t s = d.grid.stride(a);
            if (w.i[ua] == 0 || w.i[ua] + 1 == w.n[ua]) { inner = false; break; }
            if (!d.in[p - s] || !d.in[p + s]) inner = false;
        }
        if (inner) d.interior[p] = 1;
        else d.plus[p] = 1;
    }
    return d;
}

ScalarField CylinderDomain::trace(const ScalarField& v) const {
    if (v.grid() != grid) throw std::invalid_argument("trace: field not on the cylinder grid");
    ScalarField u = v;
    u.mask() = bottom;
    return u;
}

CylinderRestriction restrict_cylinder(const CylinderDomain& dom, double r) {
    if (r > dom.R * (1.0 + 1e-12) || r > dom.height * (1.0 + 1e-12))
        throw std::invalid_argument("restrict_cylinder: radius exceeds domain");
    if (r < 3.0 * dom.grid.axis(0).spacing)
        throw std::invalid_argument("restrict_cylinder: radius below 3h");
    const UniformGrid& g = dom.grid;
    CylinderRestriction res;
    res.region.assign(g.size(), 0);
    res.bottom.assign(g.size(), 0);
    const int lam_axis = dom.n;
    IndexWalker w(g);
    for (std::size_t p = 0; p < g.size(); ++p, w.advance()) {
        if (!dom.in[p]) continue;
        const auto x = g.point(p);
        bool inside;
        if (dom.base_shape == BaseShape::Box) {
            inside = true;
            for (int a = 0; a < dom.n; ++a)
                if (std::abs(x[static_cast<std::size_t>(a)]) > r * (1.0 + 1e-12)) inside = false;
        } else {
            double r2 = 0.0;
            for (int a = 0; a < dom.n; ++a) r2 += x[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
            inside = r2 <= r * r * (1.0 + 1e-12);
        }
        if (!inside) continue;
        const double lam = x[static_cast<std::size_t>(lam_axis)];
        if (lam > r * (1.0 + 1e-12)) continue;
        res.region[p] = 1;
        if (w.i[static_cast<std::size_t>(lam_axis)] == 0) res.bottom[p] = 1;
    }
    return res;
}

double WedgeDomain::weight_at(double s, double t) const {
    if (m == 1) return 1.0;
    return std::pow(s, m - 1) * std::pow(t, m - 1);
}

WedgeDomain make_wedge(int m, double R, double L, double h) {
    if (m < 1) throw std::invalid_argument("make_wedge: m >= 1");
    if (!(R > 0.0) || !(L > 0.0) || !(h > 0.0))
        throw std::invalid_argument("make_wedge: R, L, h must be > 0");
    const int ns = static_cast<int>(std::llround(R / h)) + 1;
    const int nl = static_cast<int>(std::llround(L / h)) + 1;
    WedgeDomain w;
    w.m = m;
    w.R = R;
    w.L = L;
    w.grid = UniformGrid({{0.0, h, ns}, {0.0, h, ns}, {0.0, h, nl}});
    const std::size_t N = w.grid.size();
    w.in.assign(N, 0);
    w.pinned.assign(N, 0);
    w.bottom.assign(N, 0);
    w.quarter.assign(N, 0);

    const double R2 = R * R * (1.0 + 1e-12);
    IndexWalker it(w.grid);
    for (std::size_t p = 0; p < N; ++p, it.advance()) {
        const int is = it.i[0], jt = it.i[1], kl = it.i[2];
        const double s = w.grid.coord(0, is), t = w.grid.coord(1, jt);
        if (s * s + t * t > R2) continue;
        w.quarter[p] = 1;
        if (jt > is) continue;
        w.in[p] = 1;
        if (kl == 0) w.bottom[p] = 1;
        bool pin = false;
        if (jt == is) pin = true;                                   // Simons-cone trace
        if (kl + 1 == w.grid.axis(2).count) pin = true;             // top
        // outer arc: an outward (s, t) neighbour leaves the disk
        const double hh = w.grid.axis(0).spacing;
        if ((s + hh) * (s + hh) + t * t > R2) pin = true;
        if (s * s + (t + hh) * (t + hh) > R2) pin = true;
        if (pin) w.pinned[p] = 1;
    }
    return w;
}

ScalarField odd_reflect(const WedgeDomain& w, const ScalarField& v) {
    if (v.grid() != w.grid) throw std::invalid_argument("odd_reflect: field not on wedge grid");
    ScalarField out(w.grid, 0.0);
    out.mask() = w.quarter;
    IndexWalker it(w.grid);
    for (std::size_t p = 0; p < w.grid.size(); ++p, it.advance()) {
        if (!w.quarter[p]) continue;
        const int is = it.i[0], jt = it.i[1];
        if (jt <= is) {
            out[p] = v[p];
        } else {
            std::array<int, kMaxDim> sw{jt, is, it.i[2], 0};
            out[p] = -v[w.grid.flat(sw)];
        }
    }
    return out;
}

ScalarField ambient_weight(const WedgeDomain& w) {
    // surface area of S^(m-1): 2 pi^(m/2) / Gamma(m/2); squared as the
    // product of the two radial fibres.
    const double mm = static_cast<double>(w.m);
    const double surf = 2.0 * std::pow(std::numbers::pi, mm / 2.0) / std::tgamma(mm / 2.0);
    ScalarField wf(w.grid, 0.0);
    IndexWalker it(w.grid);
    for (std::size_t p = 0; p < w.grid.size(); ++p, it.advance()) {
        const double s = w.grid.coord(0, it.i[0]);
        const double t = w.grid.coord(1, it.i[1]);
        wf[p] = surf * surf * w.weight_at(s, t);
    }
    return wf;
}

CylinderRestriction restrict_wedge_cylinder(const WedgeDomain& w, double r) {
    if (r > w.R * (1.0 + 1e-12) || r > w.L * (1.0 + 1e-12))
        throw std::invalid_argument("restrict_wedge_cylinder: radius exceeds domain");
    if (r < 3.0 * w.grid.axis(0).spacing)
        throw std::invalid_argument("restrict_wedge_cylinder: radius below 3h");
    CylinderRestriction res;
    res.region.assign(w.grid.size(), 0);
    res.bottom.assign(w.grid.size(), 0);
    const double r2 = r * r * (1.0 + 1e-12);
    IndexWalker it(w.grid);
    for (std::size_t p = 0; p < w.grid.size(); ++p, it.advance()) {
        if (!w.quarter[p]) continue;
        const double s = w.grid.coord(0, it.i[0]);
        const double t = w.grid.coord(1, it.i[1]);
        const double lam = w.grid.coord(2, it.i[2]);
        if (s * s + t * t > r2 || lam > r * (1.0 + 1e-12)) continue;
        res.region[p] = 1;
        if (it.i[2] == 0) res.bottom[p] = 1;
    }
    return res;
}

} // namespace halflap
