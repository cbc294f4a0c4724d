#include "halflap/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace halflap {

namespace {

bool in_core_axes(const CylinderDomain& dom, const std::array<int, kMaxDim>& idx) {
    for (int a = 0; a < dom.n; ++a) {
        const int cnt = dom.grid.axis(a).count;
        const int collar = static_cast<int>(0.2 * cnt);
        const int i = idx[static_cast<std::size_t>(a)];
        if (i < collar || i >= cnt - collar) return false;
    }
    return true;
}

} // namespace

Mask core_mask(const CylinderDomain& dom) {
    const UniformGrid& g = dom.grid;
    Mask core(g.size(), 0);
    const int lam_axis = dom.n;
    IndexWalker w(g);
    for (std::size_t p = 0; p < g.size(); ++p, w.advance()) {
        if (!dom.in[p]) continue;
        if (!in_core_axes(dom, w.i)) continue;
        const double lam = g.coord(lam_axis, w.i[static_cast<std::size_t>(lam_axis)]);
        if (lam > 0.6 * dom.height * (1.0 + 1e-12)) continue;
        core[p] = 1;
    }
    return core;
}

Mask core_bottom_mask(const CylinderDomain& dom) {
    Mask core = core_mask(dom);
    for (std::size_t p = 0; p < core.size(); ++p)
        if (core[p] && !dom.bottom[p]) core[p] = 0;
    return core;
}

ScalarField stability_witness(const CylinderDomain& dom, const ScalarField& v, int axis) {
    if (v.grid() != dom.grid) throw std::invalid_argument("stability_witness: grid mismatch");
    if (axis < 0 || axis >= dom.n) throw std::invalid_argument("stability_witness: axis out of range");

    const UniformGrid& g = dom.grid;
    const Mask core = core_mask(dom);
    const std::size_t s = g.stride(axis);
    std::size_t total = 0, increasing = 0;
    IndexWalker w(g);
    for (std::size_t p = 0; p < g.size(); ++p, w.advance()) {
        if (!core[p]) continue;
        if (w.i[static_cast<std::size_t>(axis)] + 1 >= w.n[static_cast<std::size_t>(axis)]) continue;
        if (!dom.in[p + s]) continue;
        ++total;
        if (v[p + s] - v[p] > 0.0) ++increasing;
    }
    if (total == 0) throw std::invalid_argument("stability_witness: empty core");
    const double frac = static_cast<double>(increasing) / static_cast<double>(total);
    if (frac < 0.99)
        throw std::invalid_argument("stability_witness: field not monotone along axis (increasing on " +
                                    std::to_string(frac * 100.0) + "% of core points)");

    const std::vector<ScalarField> grads = gradient(v);
    return grads[static_cast<std::size_t>(axis)];
}

SymmetryReport liouville_check(const CylinderDomain& dom, const ScalarField& v,
                               const ScalarField& phi) {
    const UniformGrid& g = dom.grid;
    if (v.grid() != g || phi.grid() != g) throw std::invalid_argument("liouville_check: grid mismatch");
    const Mask core = core_mask(dom);
    const Mask core_bot = core_bottom_mask(dom);

    SymmetryReport rep;
    const std::vector<ScalarField> grads = gradient(v);
    const int lam_axis = dom.n;
    const double h = g.axis(0).spacing;

    // sigma_i on points where the witness clears the floor
    Mask sigma_mask(g.size(), 0);
    for (std::size_t p = 0; p < g.size(); ++p)
        sigma_mask[p] = dom.in[p] && std::abs(phi[p]) >= kPhiFloor;

    for (int i = 0; i < dom.n; ++i) {
        ScalarField sig(g, 0.0);
        sig.mask() = sigma_mask;
        for (std::size_t p = 0; p < g.size(); ++p)
            if (sigma_mask[p]) sig[p] = grads[static_cast<std::size_t>(i)][p] / phi[p];

        double lo = 1e300, hi = -1e300;
        for (std::size_t p = 0; p < g.size(); ++p) {
            if (!core[p] || !sigma_mask[p]) continue;
            lo = std::min(lo, sig[p]);
            hi = std::max(hi, sig[p]);
        }
        rep.osc.push_back(lo <= hi ? hi - lo : 0.0);

        // residual of div(phi^2 grad sigma) with midpoint phi^2, core points
        double rss = 0.0;
        std::size_t cnt = 0;
        IndexWalker w(g);
        for (std::size_t p = 0; p < g.size(); ++p, w.advance()) {
            if (!core[p] || !sigma_mask[p]) continue;
            bool ok = true;
            double acc = 0.0;
            for (int a = 0; a <= dom.n && ok; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                const std::size_t s = g.stride(a);
                if (w.i[ua] == 0 || w.i[ua] + 1 >= w.n[ua]) { ok = false; break; }
                if (!sigma_mask[p - s] || !sigma_mask[p + s]) { ok = false; break; }
                const double ha = g.axis(a).spacing;
                const double phi2p = 0.5 * (phi[p] * phi[p] + phi[p + s] * phi[p + s]);
                const double phi2m = 0.5 * (phi[p] * phi[p] + phi[p - s] * phi[p - s]);
                acc += (phi2p * (sig[p + s] - sig[p]) - phi2m * (sig[p] - sig[p - s])) / (ha * ha);
            }
            if (!ok) continue;
            rss += acc * acc;
            ++cnt;
        }
        rep.interior_residual_rms.push_back(cnt ? std::sqrt(rss / static_cast<double>(cnt)) : 0.0);

        // bottom flux -sigma d_lambda sigma (one-sided second order)
        double flux_sup = 0.0;
        const std::size_t sl = g.stride(lam_axis);
        const double hl = g.axis(lam_axis).spacing;
        for (std::size_t p = 0; p < g.size(); ++p) {
            if (!core_bot[p] || !sigma_mask[p]) continue;
            if (!sigma_mask[p + sl] || !sigma_mask[p + 2 * sl]) continue;
            const double dls = (-3.0 * sig[p] + 4.0 * sig[p + sl] - sig[p + 2 * sl]) / (2.0 * hl);
            flux_sup = std::max(flux_sup, std::abs(-sig[p] * dls));
        }
        rep.bottom_flux_sup.push_back(flux_sup);

        // growth of int_{C_r} (phi sigma)^2 against r^2 log r
        ScalarField phis(g, 0.0);
        phis.mask() = sigma_mask;
        for (std::size_t p = 0; p < g.size(); ++p)
            if (sigma_mask[p]) phis[p] = grads[static_cast<std::size_t>(i)][p] * grads[static_cast<std::size_t>(i)][p];
        double ratio_max = 0.0;
        for (double frac : {0.25, 0.5, 0.75, 1.0}) {
            const double r = frac * std::min(dom.R, dom.height);
            if (r <= 2.0 || r < 3.0 * h) continue;
            const CylinderRestriction res = restrict_cylinder(dom, r);
            Mask region = mask_and(res.region, sigma_mask);
            const double val = integrate(phis, region);
            ratio_max = std::max(ratio_max, val / (r * r * std::log(r)));
        }
        rep.integral_ratio_max.push_back(ratio_max);

        rep.sigma.push_back(std::move(sig));
    }

    double osc_max = 0.0;
    for (double o : rep.osc) osc_max = std::max(osc_max, o);
    rep.is_one_d = osc_max <= 10.0 * h;

    try {
        const DirectionEstimate de = one_d_direction(dom, dom.trace(v));
        rep.direction = de.a;
        rep.alignment_deviation = de.deviation;
        rep.direction_defined = true;
    } catch (const std::exception&) {
        rep.direction_defined = false;
    }
    return rep;
}

DirectionEstimate one_d_direction(const CylinderDomain& dom, const ScalarField& trace) {
    const UniformGrid& g = dom.grid;
    if (trace.grid() != g) throw std::invalid_argument("one_d_direction: grid mismatch");
    const Mask core_bot = core_bottom_mask(dom);
    const std::vector<ScalarField> grads = gradient(trace);

    std::size_t total = 0, usable = 0;
    std::array<double, 3> avg{};
    for (std::size_t p = 0; p < g.size(); ++p) {
        if (!core_bot[p] || !trace.in(p)) continue;
        ++total;
        double norm2 = 0.0;
        for (int a = 0; a < dom.n; ++a) {
            const double gi = grads[static_cast<std::size_t>(a)][p];
            norm2 += gi * gi;
        }
        if (std::sqrt(norm2) <= 1e-6) continue;
        ++usable;
        for (int a = 0; a < dom.n; ++a) avg[static_cast<std::size_t>(a)] += grads[static_cast<std::size_t>(a)][p];
    }
    if (total == 0 || usable * 2 < total)
        throw std::invalid_argument("one_d_direction: gradient vanishes on most of the core");

    double norm = 0.0;
    for (double c : avg) norm += c * c;
    norm = std::sqrt(norm);
    if (norm <= 0.0) throw std::invalid_argument("one_d_direction: degenerate average gradient");

    DirectionEstimate de;
    for (int a = 0; a < 3; ++a) de.a[static_cast<std::size_t>(a)] = avg[static_cast<std::size_t>(a)] / norm;

    double worst = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        if (!core_bot[p] || !trace.in(p)) continue;
        double dot = 0.0, norm2 = 0.0;
        for (int a = 0; a < dom.n; ++a) {
            const double gi = grads[static_cast<std::size_t>(a)][p];
            dot += gi * de.a[static_cast<std::size_t>(a)];
            norm2 += gi * gi;
        }
        const double gn = std::sqrt(norm2);
        if (gn <= 1e-6) continue;
        const double c = std::clamp(dot / gn, -1.0, 1.0);
        worst = std::max(worst, std::acos(c));
    }
    de.deviation = worst;
    return de;
}

} // namespace halflap
