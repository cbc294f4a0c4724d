#include "halflap/hhalf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

#include "halflap/extension.hpp"
#include "halflap/parallel.hpp"

namespace halflap {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

double TraceDomain::total_measure() const {
    double m = 0.0;
    for (const auto& c : cells) m += c.measure;
    return m;
}

TraceDomain make_segment_domain(double h) {
    if (!(h > 0.0) || h >= 1.0) throw std::invalid_argument("make_segment_domain: bad spacing");
    const int n = static_cast<int>(std::llround(2.0 / h));
    TraceDomain dom;
    dom.intrinsic_dim = 1;
    dom.ambient_dim = 1;
    dom.h = 2.0 / n;
    dom.two_sided = true;
    for (int k = 0; k < n; ++k) {
        TraceCell c;
        const double x = -1.0 + (k + 0.5) * dom.h;
        c.z = {x, 0.0, 0.0};
        c.measure = dom.h;
        c.dist = std::abs(x);
        c.side = x < 0.0 ? -1.0 : 1.0;
        c.facet = 0;
        dom.cells.push_back(c);
    }
    return dom;
}

TraceDomain make_cylinder_boundary_domain(double h) {
    if (!(h > 0.0) || h >= 0.5) throw std::invalid_argument("make_cylinder_boundary_domain: bad spacing");
    TraceDomain dom;
    dom.intrinsic_dim = 1;
    dom.ambient_dim = 2;
    dom.two_sided = true;

    const int nb = static_cast<int>(std::llround(2.0 / h)); // bottom/top cells
    const int nl = static_cast<int>(std::llround(1.0 / h)); // lateral cells
    dom.h = 2.0 / nb;
    const double hh = dom.h;

    // Gamma = the two corners (+-1, 0). dist = arclength along the loop.
    auto push = [&](double x, double lam, double dist, double side, int facet) {
        TraceCell c;
        c.z = {x, lam, 0.0};
        c.measure = hh;
        c.dist = dist;
        c.side = side;
        c.facet = facet;
        dom.cells.push_back(c);
    };
    // bottom: side -1, dist = distance to nearest corner along the bottom
    for (int k = 0; k < nb; ++k) {
        const double x = -1.0 + (k + 0.5) * hh;
        push(x, 0.0, std::min(x + 1.0, 1.0 - x), -1.0, 0);
    }
    // right lateral: side +1, dist = lambda
    for (int k = 0; k < nl; ++k) {
        const double lam = (k + 0.5) * hh;
        push(1.0, lam, lam, 1.0, 1);
    }
    // top: dist = loop distance to a corner, at least 1 (through a lateral)
    for (int k = 0; k < nb; ++k) {
        const double x = 1.0 - (k + 0.5) * hh;
        push(x, 1.0, 1.0 + std::min(1.0 - x, x + 1.0), 1.0, 2);
    }
    // left lateral
    for (int k = 0; k < nl; ++k) {
        const double lam = 1.0 - (k + 0.5) * hh;
        push(-1.0, lam, lam, 1.0, 3);
    }
    return dom;
}

double h_half_seminorm(const TraceDomain& dom, const std::vector<double>& values) {
    const std::size_t N = dom.cells.size();
    if (values.size() != N) throw std::invalid_argument("h_half_seminorm: value count mismatch");
    const double min_d2 = 0.25 * dom.h * dom.h;
    const int expo = dom.intrinsic_dim + 1;

    return deterministic_reduce(N, [&](std::size_t lo, std::size_t hi) {
        return pairwise_sum(lo, hi, [&](std::size_t i) {
            const TraceCell& ci = dom.cells[i];
            double acc = 0.0;
            for (std::size_t j = 0; j < N; ++j) {
                if (j == i) continue;
                const TraceCell& cj = dom.cells[j];
                const double dx = ci.z[0] - cj.z[0];
                const double dy = ci.z[1] - cj.z[1];
                const double dz = ci.z[2] - cj.z[2];
                const double d2 = dx * dx + dy * dy + dz * dz;
                if (d2 < min_d2) continue;
                const double dw = values[i] - values[j];
                double kern;
                if (expo == 2) kern = 1.0 / d2;
                else kern = 1.0 / std::pow(d2, 0.5 * expo);
                acc += dw * dw * kern * cj.measure;
            }
            return acc * ci.measure;
        });
    });
}

double l2_norm_sq(const TraceDomain& dom, const std::vector<double>& values) {
    if (values.size() != dom.cells.size()) throw std::invalid_argument("l2_norm_sq: value count mismatch");
    return deterministic_reduce(dom.cells.size(), [&](std::size_t lo, std::size_t hi) {
        return pairwise_sum(lo, hi, [&](std::size_t i) {
            return values[i] * values[i] * dom.cells[i].measure;
        });
    });
}

TraceFunction ramp_profile(const TraceDomain& dom, double eps) {
    if (!(eps > 0.0) || eps >= 0.5)
        throw std::invalid_argument("ramp_profile: eps must lie in (0, 1/2)");
    TraceFunction fn{dom, {}, 1.0, eps};
    fn.values.reserve(dom.cells.size());
    for (const auto& c : dom.cells) {
        if (dom.two_sided)
            fn.values.push_back(std::clamp(c.side * c.dist / eps, -1.0, 1.0));
        else
            fn.values.push_back(std::clamp(c.dist / eps, 0.0, 1.0));
    }
    return fn;
}

TraceHypothesisCheck check_trace_hypotheses(const TraceFunction& fn) {
    const TraceDomain& dom = fn.domain;
    TraceHypothesisCheck chk;
    for (double v : fn.values)
        chk.sup_amplitude_ratio = std::max(chk.sup_amplitude_ratio, std::abs(v) / fn.c0);
    for (std::size_t i = 0; i + 1 < dom.cells.size(); ++i) {
        const TraceCell& a = dom.cells[i];
        const TraceCell& b = dom.cells[i + 1];
        if (a.facet != b.facet) continue;
        const double slope = std::abs(fn.values[i + 1] - fn.values[i]) / dom.h;
        const double dist = std::min(a.dist, b.dist);
        const double bound = fn.c0 * std::min(1.0 / fn.eps, dist > 0.0 ? 1.0 / dist : 1e300)
                             * (1.0 + 3.0 * dom.h);
        if (bound > 0.0) chk.worst_gradient_ratio = std::max(chk.worst_gradient_ratio, slope / bound);
    }
    chk.ok = chk.sup_amplitude_ratio <= 1.0 + 1e-12 && chk.worst_gradient_ratio <= 1.0 + 1e-12;
    return chk;
}

LogBoundFit log_bound_experiment(const TraceDomain& dom, std::vector<double> epsilons) {
    if (epsilons.size() < 4) throw std::invalid_argument("log_bound_experiment: need >= 4 epsilons");
    for (double e : epsilons)
        if (!(e > 0.0) || e >= 0.5)
            throw std::invalid_argument("log_bound_experiment: eps must lie in (0, 1/2)");

    LogBoundFit fit;
    for (double e : epsilons) {
        if (e < 4.0 * dom.h) { fit.dropped.push_back(e); continue; }
        const TraceFunction fn = ramp_profile(dom, e);
        LogBoundRow row;
        row.eps = e;
        row.l2_part = l2_norm_sq(dom, fn.values);
        row.seminorm = h_half_seminorm(dom, fn.values);
        row.total = row.l2_part + row.seminorm;
        fit.rows.push_back(row);
    }
    if (fit.rows.size() < 2) throw std::invalid_argument("log_bound_experiment: too few resolvable epsilons");

    double sxx = 0, sx = 0, sy = 0, sxy = 0;
    const double n = static_cast<double>(fit.rows.size());
    for (const auto& r : fit.rows) {
        const double x = std::abs(std::log(r.eps));
        sx += x;
        sy += r.total;
        sxx += x * x;
        sxy += x * r.total;
    }
    const double det = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy * sxx - sx * sxy) / det;

    double ss_res = 0.0, ss_tot = 0.0;
    const double mean = sy / n;
    for (const auto& r : fit.rows) {
        const double x = std::abs(std::log(r.eps));
        const double res = r.total - (fit.slope * x + fit.intercept);
        ss_res += res * res;
        ss_tot += (r.total - mean) * (r.total - mean);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

ExtensionRatio extension_inequality_check(
    const std::function<double(double, double)>& boundary, double h) {
    const CylinderDomain dom = make_cylinder(1, 1.0, 1.0, h, BaseShape::Box);
    ScalarField bvals(dom.grid, 0.0);
    IndexWalker w(dom.grid);
    for (std::size_t p = 0; p < dom.grid.size(); ++p, w.advance()) {
        if (!dom.bottom[p] && !dom.plus[p]) continue;
        const auto x = dom.grid.point(p);
        bvals[p] = boundary(x[0], x[1]);
    }
    const DirichletResult dr = dirichlet_solve(dom, bvals);
    if (!dr.converged) throw std::runtime_error("extension_inequality_check: solve failed");
    const ScalarField grad2 = gradient_squared(dr.field);
    ExtensionRatio out;
    out.dirichlet_energy = integrate(grad2, dom.in);

    const TraceDomain tdom = make_cylinder_boundary_domain(h);
    std::vector<double> vals;
    vals.reserve(tdom.cells.size());
    for (const auto& c : tdom.cells) vals.push_back(boundary(c.z[0], c.z[1]));
    out.norm_sq = l2_norm_sq(tdom, vals) + h_half_seminorm(tdom, vals);
    out.ratio = out.norm_sq > 0.0 ? out.dirichlet_energy / out.norm_sq : 0.0;
    return out;
}

std::function<double(double, double)> random_loop_data(std::uint64_t seed, int modes) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> ac, as;
    for (int k = 0; k < modes; ++k) {
        ac.push_back(uni(rng) / (k + 1.0));
        as.push_back(uni(rng) / (k + 1.0));
    }
    // arclength along the loop bottom -> right -> top -> left, perimeter 6
    auto arclength = [](double x, double lam) {
        constexpr double tol = 1e-9;
        if (lam < tol) return x + 1.0;                   // bottom [0, 2]
        if (x > 1.0 - tol) return 2.0 + lam;             // right  [2, 3]
        if (lam > 1.0 - tol) return 3.0 + (1.0 - x);     // top    [3, 5]
        return 5.0 + (1.0 - lam);                        // left   [5, 6]
    };
    return [ac, as, arclength](double x, double lam) {
        const double s = arclength(x, lam);
        double v = 0.0;
        for (std::size_t k = 0; k < ac.size(); ++k) {
            const double th = 2.0 * std::numbers::pi * (static_cast<double>(k) + 1.0) * s / 6.0;
            v += ac[k] * std::cos(th) + as[k] * std::sin(th);
        }
        return v;
    };
}

std::string log_bound_csv(const LogBoundFit& fit) {
    std::string out = "eps,l2_part,seminorm,total\n";
    for (const auto& r : fit.rows)
        out += fmt(r.eps) + "," + fmt(r.l2_part) + "," + fmt(r.seminorm) + "," + fmt(r.total) + "\n";
    return out;
}

std::string log_bound_report(const LogBoundFit& fit) {
    std::string out;
    out += "model=s*|log(eps)|+b\n";
    out += "s=" + fmt(fit.slope) + "\n";
    out += "b=" + fmt(fit.intercept) + "\n";
    out += "r_squared=" + fmt(fit.r_squared) + "\n";
    out += "dropped=" + std::to_string(fit.dropped.size()) + "\n";
    return out;
}

} // namespace halflap
