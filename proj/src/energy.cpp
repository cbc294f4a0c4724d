#include "halflap/energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace halflap {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double resolve_offset(const ScalarField& v, const Nonlinearity& nl, const Mask& bottom,
                      COffset c) {
    if (!c.automatic) return c.value;
    double lo = 1e300, hi = -1e300;
    for (std::size_t p = 0; p < v.grid().size(); ++p)
        if (bottom[p]) { lo = std::min(lo, v[p]); hi = std::max(hi, v[p]); }
    if (lo > hi) return 0.0;
    return c_u_of(nl, lo, hi).value;
}

} // namespace

EnergyBreakdown energy_breakdown(const ScalarField& v, const Nonlinearity& nl,
                                 const Mask& region, const Mask& bottom,
                                 COffset c_offset, double R, int n,
                                 const ScalarField* weight) {
    EnergyBreakdown eb;
    eb.R = R;
    eb.n = n;
    eb.c_u = resolve_offset(v, nl, bottom, c_offset);

    const ScalarField grad2 = gradient_squared(v);
    eb.dirichlet = 0.5 * integrate(grad2, region, weight);

    ScalarField pot(v.grid(), 0.0);
    pot.mask() = bottom;
    for (std::size_t p = 0; p < v.grid().size(); ++p)
        if (bottom[p]) pot[p] = nl.G(v[p]) - eb.c_u;
    eb.potential = integrate(pot, bottom, weight);
    eb.total = eb.dirichlet + eb.potential;
    return eb;
}

EnergyBreakdown energy_breakdown(const CylinderDomain& dom, const ScalarField& v,
                                 const Nonlinearity& nl, COffset c_offset) {
    return energy_breakdown(v, nl, dom.in, dom.bottom, c_offset, dom.R, dom.n);
}

std::vector<EnergyBreakdown> energy_scan(const CylinderDomain& dom, const ScalarField& v,
                                         const Nonlinearity& nl, const std::vector<double>& radii,
                                         COffset c_offset) {
    for (double r : radii) {
        if (r <= 2.0) throw std::invalid_argument("energy_scan: radii must exceed 2");
        if (r < 3.0 * dom.grid.axis(0).spacing)
            throw std::invalid_argument("energy_scan: radius below 3h");
    }
    // one offset for the whole scan, from the full trace range
    const double c = resolve_offset(v, nl, dom.bottom, c_offset);
    const ScalarField grad2 = gradient_squared(v);
    ScalarField pot(v.grid(), 0.0);
    pot.mask() = dom.bottom;
    for (std::size_t p = 0; p < v.grid().size(); ++p)
        if (dom.bottom[p]) pot[p] = nl.G(v[p]) - c;

    std::vector<EnergyBreakdown> out;
    for (double r : radii) {
        const CylinderRestriction res = restrict_cylinder(dom, r);
        EnergyBreakdown eb;
        eb.R = r;
        eb.n = dom.n;
        eb.c_u = c;
        eb.dirichlet = 0.5 * integrate(grad2, res.region);
        eb.potential = integrate(pot, res.bottom);
        eb.total = eb.dirichlet + eb.potential;
        out.push_back(eb);
    }
    return out;
}

std::vector<EnergyBreakdown> saddle_energy_scan(const WedgeDomain& wedge, const ScalarField& assembled,
                                                const Nonlinearity& nl, const std::vector<double>& radii) {
    for (double r : radii) {
        if (r <= 2.0) throw std::invalid_argument("saddle_energy_scan: radii must exceed 2");
        if (r < 3.0 * wedge.grid.axis(0).spacing)
            throw std::invalid_argument("saddle_energy_scan: radius below 3h");
    }
    const ScalarField w = ambient_weight(wedge);
    const ScalarField grad2 = gradient_squared(assembled);
    ScalarField pot(assembled.grid(), 0.0);

    std::vector<EnergyBreakdown> out;
    for (double r : radii) {
        const CylinderRestriction res = restrict_wedge_cylinder(wedge, r);
        pot.mask() = res.bottom;
        for (std::size_t p = 0; p < assembled.grid().size(); ++p)
            if (res.bottom[p]) pot[p] = nl.G(assembled[p]);
        EnergyBreakdown eb;
        eb.R = r;
        eb.n = 2 * wedge.m;
        eb.c_u = 0.0; // h2 normalisation
        eb.dirichlet = 0.5 * integrate(grad2, res.region, &w);
        eb.potential = integrate(pot, res.bottom, &w);
        eb.total = eb.dirichlet + eb.potential;
        out.push_back(eb);
    }
    return out;
}

ScalingFit scaling_fit(const std::vector<EnergyBreakdown>& scan) {
    if (scan.size() < 4) throw std::invalid_argument("scaling_fit: need at least 4 radii");
    ScalingFit fit;
    fit.n = scan.front().n;
    double prev = 0.0;
    for (const auto& eb : scan) {
        if (eb.R <= 2.0) throw std::invalid_argument("scaling_fit: radii must exceed 2");
        if (eb.R <= prev) throw std::invalid_argument("scaling_fit: radii must be strictly increasing");
        prev = eb.R;
        fit.radii.push_back(eb.R);
    }

    // 2x2 normal equations for E = a * R^(n-1) log R + b * R^(n-1)
    double s11 = 0, s12 = 0, s22 = 0, t1 = 0, t2 = 0;
    for (const auto& eb : scan) {
        const double pw = std::pow(eb.R, fit.n - 1);
        const double b1 = pw * std::log(eb.R);
        const double b2 = pw;
        s11 += b1 * b1;
        s12 += b1 * b2;
        s22 += b2 * b2;
        t1 += b1 * eb.total;
        t2 += b2 * eb.total;
    }
    const double det = s11 * s22 - s12 * s12;
    if (std::abs(det) < 1e-12 * std::max(1.0, s11 * s22))
        throw std::invalid_argument("scaling_fit: singular normal equations");
    fit.a = (t1 * s22 - t2 * s12) / det;
    fit.b = (s11 * t2 - s12 * t1) / det;

    double ss_res = 0.0, mean = 0.0;
    for (const auto& eb : scan) mean += eb.total;
    mean /= static_cast<double>(scan.size());
    double ss_tot = 0.0;
    for (const auto& eb : scan) {
        const double pw = std::pow(eb.R, fit.n - 1);
        const double model = fit.a * pw * std::log(eb.R) + fit.b * pw;
        const double res = eb.total - model;
        fit.residuals.push_back(res);
        ss_res += res * res;
        ss_tot += (eb.total - mean) * (eb.total - mean);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;

    // residual trend: Pearson correlation of residuals with R
    double mr = 0.0;
    for (double r : fit.radii) mr += r;
    mr /= static_cast<double>(fit.radii.size());
    double mres = 0.0;
    for (double r : fit.residuals) mres += r;
    mres /= static_cast<double>(fit.residuals.size());
    double cov = 0.0, vr = 0.0, vres = 0.0;
    for (std::size_t i = 0; i < fit.radii.size(); ++i) {
        cov += (fit.radii[i] - mr) * (fit.residuals[i] - mres);
        vr += (fit.radii[i] - mr) * (fit.radii[i] - mr);
        vres += (fit.residuals[i] - mres) * (fit.residuals[i] - mres);
    }
    if (vr > 0.0 && vres > 1e-24) {
        const double corr = cov / std::sqrt(vr * vres);
        fit.trend_flagged = std::abs(corr) > 0.5 && fit.r_squared < 0.999;
    }
    return fit;
}

GradientDecayProfile gradient_decay_profile(const ScalarField& v) {
    const UniformGrid& g = v.grid();
    const int lam_axis = g.dim() - 1;
    const ScalarField grad2 = gradient_squared(v);
    GradientDecayProfile prof;
    const int nl = g.axis(lam_axis).count;
    std::vector<double> sup(static_cast<std::size_t>(nl), 0.0);
    std::vector<bool> seen(static_cast<std::size_t>(nl), false);
    IndexWalker w(g);
    for (std::size_t p = 0; p < g.size(); ++p, w.advance()) {
        if (!v.in(p)) continue;
        const auto j = static_cast<std::size_t>(w.i[static_cast<std::size_t>(lam_axis)]);
        sup[j] = std::max(sup[j], std::sqrt(grad2[p]));
        seen[j] = true;
    }
    for (int j = 0; j < nl; ++j) {
        if (!seen[static_cast<std::size_t>(j)]) continue;
        prof.lambdas.push_back(g.coord(lam_axis, j));
        prof.sup_grad.push_back(sup[static_cast<std::size_t>(j)]);
    }
    double lo = 1e300, hi = 0.0;
    for (std::size_t j = 0; j < prof.lambdas.size(); ++j) {
        const double scaled = prof.sup_grad[j] * (1.0 + prof.lambdas[j]);
        hi = std::max(hi, scaled);
        lo = std::min(lo, scaled);
    }
    prof.C = hi;
    prof.max_ratio = lo > 0.0 ? hi / lo : 0.0;
    return prof;
}

std::string scan_csv(const std::vector<EnergyBreakdown>& scan) {
    std::string out = "R,dirichlet,potential,total,c_u\n";
    for (const auto& eb : scan) {
        out += fmt(eb.R) + "," + fmt(eb.dirichlet) + "," + fmt(eb.potential) + "," +
               fmt(eb.total) + "," + fmt(eb.c_u) + "\n";
    }
    return out;
}

std::string fit_report(const ScalingFit& fit) {
    std::string out;
    out += "model=a*R^(n-1)*logR+b*R^(n-1)\n";
    out += "n=" + std::to_string(fit.n) + "\n";
    out += "a=" + fmt(fit.a) + "\n";
    out += "b=" + fmt(fit.b) + "\n";
    out += "r_squared=" + fmt(fit.r_squared) + "\n";
    out += std::string("trend_flagged=") + (fit.trend_flagged ? "1" : "0") + "\n";
    return out;
}

} // namespace halflap
