#include "halflap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "halflap/parallel.hpp"

namespace halflap {

namespace {

// Discrete energy over a masked region:
//   sum over bonds (p, q) in `in`  of 1/2 ((v_q - v_p)/h_a)^2 * h_a * tau * W
//   + sum over `bottom` of G(v_p) * area(p) * W
// tau is the transverse trapezoid dual volume of the bond, W an optional
// coordinate weight evaluated at bond midpoints / bottom points. Unknowns
// are the points of `free_pts`; everything else is pinned data.
class EnergyModel {
public:
    EnergyModel(const UniformGrid& g, const Mask& in, const Mask& free_mask,
                const Mask& bottom, const Nonlinearity& nl,
                std::function<double(const std::array<double, kMaxDim>&)> weight = {})
        : g_(g), in_(in), free_(free_mask), bottom_(bottom), nl_(nl), weight_(std::move(weight)) {
        const int d = g_.dim();
        for (int a = 0; a < d; ++a) {
            h_[static_cast<std::size_t>(a)] = g_.axis(a).spacing;
            stride_[static_cast<std::size_t>(a)] = g_.stride(a);
        }
        // Static quadrature data: bottom areas, dual volumes, and one bond
        // coefficient per axis, coeff_[a][p] = tau * W / h for the bond
        // (p, p + e_a) (zero where there is no bond).
        area_.assign(g_.size(), 0.0);
        vol_.assign(g_.size(), 0.0);
        for (int a = 0; a < d; ++a) coeff_[static_cast<std::size_t>(a)].assign(g_.size(), 0.0);
        parallel_ranges(g_.size(), [&](std::size_t lo, std::size_t hi) {
            IndexWalker w(g_);
            w.seek(g_, lo);
            for (std::size_t p = lo; p < hi; ++p, w.advance()) {
                if (!in_[p]) continue;
                if (bottom_[p]) {
                    double ar = point_weight(g_, bottom_, p, w.i);
                    if (weight_) ar *= weight_(g_.point(p));
                    area_[p] = ar;
                }
                vol_[p] = point_weight(g_, in_, p, w.i);
                for (int a = 0; a < d; ++a) {
                    const auto ua = static_cast<std::size_t>(a);
                    if (w.i[ua] + 1 >= w.n[ua]) continue;
                    const std::size_t q = p + stride_[ua];
                    if (!in_[q]) continue;
                    double tau = 1.0;
                    auto qidx = w.i;
                    qidx[ua] += 1;
                    for (int b = 0; b < d; ++b) {
                        if (b == a) continue;
                        tau *= 0.5 * (axis_weight(g_, in_, p, w.i, b) +
                                      axis_weight(g_, in_, q, qidx, b));
                    }
                    double wgt = 1.0;
                    if (weight_) {
                        auto x = g_.point(p);
                        x[ua] += 0.5 * h_[ua];
                        wgt = weight_(x);
                    }
                    coeff_[ua][p] = tau * wgt / h_[ua];
                }
            }
        });
    }

    const Mask& free_mask() const { return free_; }
    double vol(std::size_t p) const { return vol_[p]; }

    double energy(const std::vector<double>& v) const {
        const int d = g_.dim();
        return deterministic_reduce(g_.size(), [&](std::size_t lo, std::size_t hi) {
            return pairwise_sum_t(lo, hi, [&](std::size_t p) {
                if (!in_[p]) return 0.0;
                double acc = 0.0;
                for (int a = 0; a < d; ++a) {
                    const auto ua = static_cast<std::size_t>(a);
                    const double c = coeff_[ua][p];
                    if (c != 0.0) {
                        const double dv = v[p + stride_[ua]] - v[p];
                        acc += 0.5 * c * dv * dv;
                    }
                }
                if (area_[p] != 0.0) acc += nl_.G(v[p]) * area_[p];
                return acc;
            });
        });
    }

    // curvature of the energy along d at state v: <d, A d> for the Dirichlet
    // part plus the (possibly negative) potential term.
    double curvature(const std::vector<double>& v, const std::vector<double>& d) const {
        const int dim = g_.dim();
        return deterministic_reduce(g_.size(), [&](std::size_t lo, std::size_t hi) {
            return pairwise_sum_t(lo, hi, [&](std::size_t p) {
                if (!in_[p]) return 0.0;
                double acc = 0.0;
                for (int a = 0; a < dim; ++a) {
                    const auto ua = static_cast<std::size_t>(a);
                    const double c = coeff_[ua][p];
                    if (c != 0.0) {
                        const double dd = d[p + stride_[ua]] - d[p];
                        acc += c * dd * dd;
                    }
                }
                if (area_[p] != 0.0) acc -= nl_.fprime(v[p]) * d[p] * d[p] * area_[p];
                return acc;
            });
        });
    }

    // gather-form gradient; zero at pinned points
    void gradient(const std::vector<double>& v, std::vector<double>& grad) const {
        const int d = g_.dim();
        parallel_ranges(g_.size(), [&](std::size_t lo, std::size_t hi) {
            IndexWalker w(g_);
            w.seek(g_, lo);
            for (std::size_t p = lo; p < hi; ++p, w.advance()) {
                if (!free_[p]) { grad[p] = 0.0; continue; }
                double acc = 0.0;
                for (int a = 0; a < d; ++a) {
                    const auto ua = static_cast<std::size_t>(a);
                    const double cu = coeff_[ua][p];
                    if (cu != 0.0) acc -= cu * (v[p + stride_[ua]] - v[p]);
                    if (w.i[ua] > 0) {
                        const std::size_t q = p - stride_[ua];
                        const double cl = coeff_[ua][q];
                        if (cl != 0.0) acc += cl * (v[p] - v[q]);
                    }
                }
                if (area_[p] != 0.0) acc -= nl_.f(v[p]) * area_[p];
                grad[p] = acc;
            }
        });
    }

private:
    const UniformGrid& g_;
    const Mask& in_;
    const Mask& free_;
    const Mask& bottom_;
    const Nonlinearity& nl_;
    std::function<double(const std::array<double, kMaxDim>&)> weight_;
    std::array<double, kMaxDim> h_{};
    std::array<std::size_t, kMaxDim> stride_{};
    std::vector<double> area_;
    std::vector<double> vol_;
    std::array<std::vector<double>, kMaxDim> coeff_;
};

struct BoxBounds {
    const std::vector<double>* lower = nullptr;
    const std::vector<double>* upper = nullptr;
    bool active() const { return lower || upper; }
    double clip(double v, std::size_t p) const {
        if (lower) v = std::max(v, (*lower)[p]);
        if (upper) v = std::min(v, (*upper)[p]);
        return v;
    }
};

struct MinimizeOutcome {
    SolveStatus status = SolveStatus::IterationCap;
    int iterations = 0;
    std::vector<double> energy_history;
    double final_energy = 0.0;
    double scaled_gradient_sup = 0.0;
};

double dot_masked(const std::vector<double>& a, const std::vector<double>& b) {
    return deterministic_reduce(a.size(), [&](std::size_t lo, std::size_t hi) {
        return pairwise_sum(lo, hi, [&](std::size_t i) { return a[i] * b[i]; });
    });
}

// Nonlinear CG (Polak-Ribiere+) with Armijo backtracking; plain projected
// descent steps when box bounds are active. `values` holds pinned data on
// entry and the minimiser on exit.
MinimizeOutcome run_minimize(const EnergyModel& model, std::vector<double>& values,
                             const SolveConfig& cfg, const BoxBounds& box,
                             const UniformGrid& grid) {
    MinimizeOutcome out;
    const std::size_t N = values.size();
    const Mask& free_mask = model.free_mask();

    std::vector<double> g(N, 0.0), gnew(N, 0.0), dir(N, 0.0), trial(N);

    auto project = [&](std::vector<double>& v) {
        if (!box.active()) return;
        for (std::size_t p = 0; p < N; ++p)
            if (free_mask[p]) v[p] = box.clip(v[p], p);
    };
    project(values);

    double E = model.energy(values);
    if (!std::isfinite(E)) { out.status = SolveStatus::NanEnergy; return out; }
    out.energy_history.push_back(E);
    model.gradient(values, g);

    auto scaled_sup = [&](const std::vector<double>& v, const std::vector<double>& grad) {
        double sup = 0.0;
        for (std::size_t p = 0; p < N; ++p) {
            if (!free_mask[p]) continue;
            const double vol = model.vol(p);
            if (box.active()) {
                const double proj = box.clip(v[p] - grad[p] / vol, p);
                sup = std::max(sup, std::abs(v[p] - proj));
            } else {
                sup = std::max(sup, std::abs(grad[p]) / vol);
            }
        }
        return sup;
    };

    for (std::size_t p = 0; p < N; ++p) dir[p] = free_mask[p] ? -g[p] : 0.0;
    double g_dot_g = dot_masked(g, g);
    double alpha_start = 1.0;
    int plateau = 0;

    int it = 0;
    for (; it < cfg.max_iterations; ++it) {
        const double res = scaled_sup(values, g);
        out.scaled_gradient_sup = res;
        if (res <= cfg.residual_tol) { out.status = SolveStatus::Converged; break; }

        double slope = dot_masked(g, dir);
        if (slope >= 0.0) { // stale CG direction; restart on steepest descent
            for (std::size_t p = 0; p < N; ++p) dir[p] = free_mask[p] ? -g[p] : 0.0;
            slope = -g_dot_g;
        }

        // near-exact step from the local quadratic model; Armijo verifies
        double alpha = alpha_start;
        const double curv = model.curvature(values, dir);
        if (curv > 0.0 && std::isfinite(curv)) {
            const double astar = -slope / curv;
            if (astar > 0.0 && std::isfinite(astar)) alpha = std::min(astar, 1e8);
        }
        double Enew = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int bt = 0; bt < cfg.armijo_max_backtracks; ++bt) {
            for (std::size_t p = 0; p < N; ++p)
                trial[p] = free_mask[p] ? values[p] + alpha * dir[p] : values[p];
            project(trial);
            Enew = model.energy(trial);
            if (std::isnan(Enew)) { out.status = SolveStatus::NanEnergy; return out; }
            double sufficient;
            if (box.active()) {
                double step2 = 0.0;
                for (std::size_t p = 0; p < N; ++p)
                    if (free_mask[p]) { const double dv = trial[p] - values[p]; step2 += dv * dv; }
                sufficient = E - cfg.armijo_c1 / alpha * step2;
            } else {
                sufficient = E + cfg.armijo_c1 * alpha * slope;
            }
            if (Enew <= sufficient) { accepted = true; break; }
            alpha *= cfg.armijo_backtrack;
        }
        if (!accepted) {
            // retry once along steepest descent before giving up
            bool was_sd = true;
            for (std::size_t p = 0; p < N; ++p)
                if (free_mask[p] && dir[p] != -g[p]) { was_sd = false; break; }
            if (!was_sd) {
                for (std::size_t p = 0; p < N; ++p) dir[p] = free_mask[p] ? -g[p] : 0.0;
                alpha_start = 1.0;
                continue;
            }
            out.status = SolveStatus::LineSearchFailure;
            break;
        }

        std::swap(values, trial);
        const double drop = E - Enew;
        E = Enew;
        out.energy_history.push_back(E);
        if (cfg.iterate_callback) {
            ScalarField snapshot(grid, 0.0);
            snapshot.values() = values;
            cfg.iterate_callback(it, snapshot);
        }
        if (drop <= cfg.energy_tol * std::max(1.0, std::abs(E))) {
            if (++plateau >= 2) { out.status = SolveStatus::Converged; ++it; break; }
        } else {
            plateau = 0;
        }

        model.gradient(values, gnew);
        const double gg_new = dot_masked(gnew, gnew);
        double beta = 0.0;
        if (!box.active() && g_dot_g > 0.0) {
            double gy = 0.0;
            for (std::size_t p = 0; p < N; ++p)
                if (free_mask[p]) gy += gnew[p] * (gnew[p] - g[p]);
            beta = std::max(0.0, gy / g_dot_g);
        }
        for (std::size_t p = 0; p < N; ++p)
            dir[p] = free_mask[p] ? -gnew[p] + beta * dir[p] : 0.0;
        std::swap(g, gnew);
        g_dot_g = gg_new;
        alpha_start = std::min(2.0 * alpha, 1e8);
    }
    if (out.status == SolveStatus::IterationCap) out.iterations = it;
    else out.iterations = it;
    out.final_energy = E;
    if (out.status == SolveStatus::Converged || out.status == SolveStatus::IterationCap)
        out.scaled_gradient_sup = scaled_sup(values, g);
    return out;
}

void fill_initial(const UniformGrid& g, const Mask& free_mask, InitPolicy policy,
                  double constant, const std::optional<ScalarField>& field,
                  int layer_axis, std::vector<double>& values) {
    switch (policy) {
    case InitPolicy::Constant:
        for (std::size_t p = 0; p < g.size(); ++p)
            if (free_mask[p]) values[p] = constant;
        break;
    case InitPolicy::Field: {
        if (!field) throw std::invalid_argument("init policy Field requires init_field");
        if (field->grid() != g) throw std::invalid_argument("init_field grid mismatch");
        for (std::size_t p = 0; p < g.size(); ++p)
            if (free_mask[p]) values[p] = (*field)[p];
        break;
    }
    case InitPolicy::TanhLayer: {
        IndexWalker w(g);
        for (std::size_t p = 0; p < g.size(); ++p, w.advance())
            if (free_mask[p]) values[p] = std::tanh(g.coord(layer_axis, w.i[static_cast<std::size_t>(layer_axis)]));
        break;
    }
    case InitPolicy::SaddleTanh: {
        IndexWalker w(g);
        for (std::size_t p = 0; p < g.size(); ++p, w.advance()) {
            if (!free_mask[p]) continue;
            const double s = g.coord(0, w.i[0]);
            const double t = g.coord(1, w.i[1]);
            values[p] = std::tanh((s - t) / std::sqrt(2.0));
        }
        break;
    }
    }
}

void validate_box(const SolveConfig& cfg, const UniformGrid& g) {
    if (cfg.lower && cfg.lower->grid() != g) throw std::invalid_argument("lower bound grid mismatch");
    if (cfg.upper && cfg.upper->grid() != g) throw std::invalid_argument("upper bound grid mismatch");
    if (cfg.lower && cfg.upper) {
        for (std::size_t p = 0; p < g.size(); ++p)
            if ((*cfg.lower)[p] > (*cfg.upper)[p] + 1e-15)
                throw std::invalid_argument("box bounds violate lower <= upper");
    }
    if (!(cfg.energy_tol > 0.0) || !(cfg.residual_tol > 0.0))
        throw std::invalid_argument("tolerances must be positive");
}

// Residual diagnostics for cylinder solves (skipped for wedges, whose
// interior equation carries the coordinate weight).
void fill_residual_report(const CylinderDomain* dom, const Nonlinearity& nl, Solution& sol) {
    if (!dom) return;
    const ScalarField lap = laplacian_residual(sol.v);
    double sup = 0.0;
    for (std::size_t p = 0; p < lap.grid().size(); ++p)
        if (dom->interior[p]) sup = std::max(sup, std::abs(lap[p]));
    sol.interior_residual_sup = sup;
    const UniformGrid& g = dom->grid;
    const int lam = dom->n;
    const std::size_t s = g.stride(lam);
    const double h = g.axis(lam).spacing;
    double nsup = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        if (!dom->bottom[p]) continue;
        const double dl = (-3.0 * sol.v[p] + 4.0 * sol.v[p + s] - sol.v[p + 2 * s]) / (2.0 * h);
        nsup = std::max(nsup, std::abs(-dl - nl.f(sol.v[p])));
    }
    sol.neumann_defect_sup = nsup;
}

} // namespace

Solution minimize_cylinder(const CylinderDomain& dom, const Nonlinearity& nl,
                           const ScalarField& plus_boundary, const SolveConfig& cfg) {
    const UniformGrid& g = dom.grid;
    if (plus_boundary.grid() != g)
        throw std::invalid_argument("minimize_cylinder: boundary field not on domain grid");
    validate_box(cfg, g);
    for (std::size_t p = 0; p < g.size(); ++p)
        if (dom.plus[p] && !std::isfinite(plus_boundary[p]))
            throw std::invalid_argument("minimize_cylinder: boundary data not finite on plus mask");

    Mask free_mask(g.size(), 0);
    for (std::size_t p = 0; p < g.size(); ++p)
        free_mask[p] = dom.in[p] && !dom.plus[p];

    EnergyModel model(g, dom.in, free_mask, dom.bottom, nl);

    std::vector<double> values(g.size(), 0.0);
    for (std::size_t p = 0; p < g.size(); ++p)
        if (dom.plus[p]) values[p] = plus_boundary[p];
    fill_initial(g, free_mask, cfg.init, cfg.init_constant, cfg.init_field, dom.n - 1, values);

    BoxBounds box;
    if (cfg.lower) box.lower = &cfg.lower->values();
    if (cfg.upper) box.upper = &cfg.upper->values();

    MinimizeOutcome out = run_minimize(model, values, cfg, box, g);

    Solution sol{ScalarField(g, 0.0), ScalarField(g, 0.0), out.status, out.iterations,
                 std::move(out.energy_history), out.final_energy, 0.0, 0.0,
                 out.scaled_gradient_sup};
    sol.v.values() = std::move(values);
    sol.v.mask() = dom.in;
    sol.trace = dom.trace(sol.v);
    fill_residual_report(&dom, nl, sol);
    return sol;
}

SaddleSolution saddle_minimize(const WedgeDomain& wedge, const Nonlinearity& nl,
                               const SolveConfig& cfg) {
    const UniformGrid& g = wedge.grid;
    SolveConfig local = cfg;
    validate_box(local, g);
    {
        const HypothesisReport hyp = check_hypotheses(nl);
        if (!hyp.all())
            std::fprintf(stderr, "saddle_minimize: warning: nonlinearity fails (h1)-(h3) probe checks\n");
    }

    Mask free_mask(g.size(), 0);
    for (std::size_t p = 0; p < g.size(); ++p)
        free_mask[p] = wedge.in[p] && !wedge.pinned[p];

    const int m = wedge.m;
    std::function<double(const std::array<double, kMaxDim>&)> weight;
    if (m > 1) {
        weight = [m](const std::array<double, kMaxDim>& x) {
            return std::pow(x[0], m - 1) * std::pow(x[1], m - 1);
        };
    }
    EnergyModel model(g, wedge.in, free_mask, wedge.bottom, nl, weight);

    std::vector<double> values(g.size(), 0.0); // pinned set is zero
    if (local.init == InitPolicy::TanhLayer) local.init = InitPolicy::SaddleTanh;
    fill_initial(g, free_mask, local.init, local.init_constant, local.init_field, 0, values);

    // nonnegativity (and |v| <= 1) by projection each iterate
    ScalarField lower(g, 0.0), upper(g, 1.0);
    if (!local.lower) local.lower = lower;
    if (!local.upper) local.upper = upper;
    BoxBounds box{&local.lower->values(), &local.upper->values()};

    MinimizeOutcome out = run_minimize(model, values, local, box, g);

    SaddleSolution sad{Solution{ScalarField(g, 0.0), ScalarField(g, 0.0), out.status,
                                out.iterations, std::move(out.energy_history), out.final_energy,
                                0.0, 0.0, out.scaled_gradient_sup},
                       ScalarField(g, 0.0), true};
    sad.core.v.values() = std::move(values);
    sad.core.v.mask() = wedge.in;
    sad.core.trace = sad.core.v;
    sad.core.trace.mask() = wedge.bottom;
    fill_residual_report(nullptr, nl, sad.core);

    double amax = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p)
        if (wedge.in[p]) amax = std::max(amax, std::abs(sad.core.v[p]));
    sad.nontrivial = amax > 1e-8;

    sad.assembled = odd_reflect(wedge, sad.core.v);
    return sad;
}

SlideProfile slide_energy_profile(const CylinderDomain& dom, const ScalarField& v,
                                  const Nonlinearity& nl, double R,
                                  const std::vector<double>& shifts) {
    const UniformGrid& g = dom.grid;
    if (v.grid() != g) throw std::invalid_argument("slide_energy_profile: field not on domain grid");
    const int xn = dom.n - 1;
    const int lam = dom.n;

    // monotonicity along x_n on the trace
    {
        const std::size_t s = g.stride(xn);
        double lo = v.min_masked(), hi = v.max_masked();
        const double slack = 1e-9 * std::max(1.0, hi - lo);
        IndexWalker w(g);
        for (std::size_t p = 0; p < g.size(); ++p, w.advance()) {
            if (!dom.bottom[p]) continue;
            if (w.i[static_cast<std::size_t>(xn)] + 1 >= w.n[static_cast<std::size_t>(xn)]) continue;
            if (!dom.bottom[p + s]) continue;
            if (v[p + s] - v[p] < -slack)
                throw std::invalid_argument("slide_energy_profile: field not monotone in x_n");
        }
    }

    const ScalarField grad2 = gradient_squared(v);
    ScalarField potential(g, 0.0);
    potential.mask() = dom.bottom;
    for (std::size_t p = 0; p < g.size(); ++p)
        if (dom.bottom[p]) potential[p] = nl.G(v[p]);

    SlideProfile prof;
    for (double t : shifts) {
        // window {|x_n - t| <= R} x [0, R], snapped to the grid
        const double h = g.axis(xn).spacing;
        const double ts = h * std::llround(t / h);
        const double xmax = g.coord(xn, g.axis(xn).count - 1);
        const double xmin = g.coord(xn, 0);
        if (ts + R > xmax * (1.0 + 1e-12) || ts - R < xmin * (1.0 + 1e-12)) {
            prof.truncated = true;
            continue;
        }
        Mask region(g.size(), 0), bot(g.size(), 0);
        IndexWalker w(g);
        for (std::size_t p = 0; p < g.size(); ++p, w.advance()) {
            if (!dom.in[p]) continue;
            const auto x = g.point(p);
            bool inside = std::abs(x[static_cast<std::size_t>(xn)] - ts) <= R * (1.0 + 1e-12) &&
                          x[static_cast<std::size_t>(lam)] <= R * (1.0 + 1e-12);
            for (int a = 0; a + 1 < dom.n; ++a)
                if (std::abs(x[static_cast<std::size_t>(a)]) > R * (1.0 + 1e-12)) inside = false;
            if (!inside) continue;
            region[p] = 1;
            if (w.i[static_cast<std::size_t>(lam)] == 0) bot[p] = 1;
        }
        const double dir = 0.5 * integrate(grad2, region);
        const double pot = integrate(potential, bot);
        prof.shifts.push_back(ts);
        prof.energies.push_back(dir + pot);
    }
    return prof;
}

LimitProfiles limit_profiles(const CylinderDomain& dom, const ScalarField& v,
                             double edge_fraction) {
    const UniformGrid& g = dom.grid;
    if (v.grid() != g) throw std::invalid_argument("limit_profiles: field not on domain grid");
    if (!(edge_fraction > 0.0) || edge_fraction > 0.5)
        throw std::invalid_argument("limit_profiles: edge_fraction in (0, 0.5]");
    const int xn = dom.n - 1;
    const std::size_t s = g.stride(xn);
    const int count = g.axis(xn).count;

    // monotone along x_n everywhere in the mask
    {
        double lo = v.min_masked(), hi = v.max_masked();
        const double slack = 1e-9 * std::max(1.0, hi - lo);
        IndexWalker w(g);
        for (std::size_t p = 0; p < g.size(); ++p, w.advance()) {
            if (!dom.in[p]) continue;
            if (w.i[static_cast<std::size_t>(xn)] + 1 >= count) continue;
            if (!dom.in[p + s]) continue;
            if (v[p + s] - v[p] < -slack)
                throw std::invalid_argument("limit_profiles: field not monotone along x_n");
        }
    }

    const int width = std::max(1, static_cast<int>(edge_fraction * count));
    LimitProfiles lp{ScalarField(g, 0.0), ScalarField(g, 0.0), 0, 0, 0, 0};
    lp.v_lower.mask().assign(g.size(), 0);
    lp.v_upper.mask().assign(g.size(), 0);

    IndexWalker w(g);
    for (std::size_t p = 0; p < g.size(); ++p, w.advance()) {
        const int i = w.i[static_cast<std::size_t>(xn)];
        if (i != 0) continue;
        if (!dom.in[p]) continue;
        double lo_avg = 0.0, hi_avg = 0.0;
        int lo_n = 0, hi_n = 0;
        for (int k = 0; k < width; ++k) {
            const std::size_t pl = p + static_cast<std::size_t>(k) * s;
            const std::size_t pu = p + static_cast<std::size_t>(count - 1 - k) * s;
            if (dom.in[pl]) { lo_avg += v[pl]; ++lo_n; }
            if (dom.in[pu]) { hi_avg += v[pu]; ++hi_n; }
        }
        if (lo_n > 0) { lp.v_lower[p] = lo_avg / lo_n; lp.v_lower.mask()[p] = 1; }
        const std::size_t ptop = p + static_cast<std::size_t>(count - 1) * s;
        if (hi_n > 0) { lp.v_upper[ptop] = hi_avg / hi_n; lp.v_upper.mask()[ptop] = 1; }
    }

    double m = 1e300, mt = -1e300, Mt = 1e300, M = -1e300;
    IndexWalker w2(g);
    for (std::size_t p = 0; p < g.size(); ++p, w2.advance()) {
        const bool at_bottom = w2.i[static_cast<std::size_t>(dom.n)] == 0;
        if (!at_bottom) continue;
        if (lp.v_lower.mask()[p]) { m = std::min(m, lp.v_lower[p]); mt = std::max(mt, lp.v_lower[p]); }
        if (lp.v_upper.mask()[p]) { Mt = std::min(Mt, lp.v_upper[p]); M = std::max(M, lp.v_upper[p]); }
    }
    lp.m = m;
    lp.m_tilde = mt;
    lp.M_tilde = Mt;
    lp.M = M;
    return lp;
}

double gradient_consistency_check(const CylinderDomain& dom, const Nonlinearity& nl,
                                  const ScalarField& state, int n_dirs, std::uint64_t seed) {
    const UniformGrid& g = dom.grid;
    if (state.grid() != g) throw std::invalid_argument("gradient_consistency_check: grid mismatch");
    Mask free_mask(g.size(), 0);
    for (std::size_t p = 0; p < g.size(); ++p)
        free_mask[p] = dom.in[p] && !dom.plus[p];
    EnergyModel model(g, dom.in, free_mask, dom.bottom, nl);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> base = state.values();
    std::vector<double> grad(g.size(), 0.0), xi(g.size(), 0.0), pert(g.size());
    model.gradient(base, grad);

    double worst = 0.0;
    const double eps = 1e-5;
    for (int k = 0; k < n_dirs; ++k) {
        double sup = 0.0;
        for (std::size_t p = 0; p < g.size(); ++p) {
            xi[p] = free_mask[p] ? gauss(rng) : 0.0;
            sup = std::max(sup, std::abs(xi[p]));
        }
        for (std::size_t p = 0; p < g.size(); ++p) xi[p] /= sup;

        for (std::size_t p = 0; p < g.size(); ++p) pert[p] = base[p] + eps * xi[p];
        const double ep = model.energy(pert);
        for (std::size_t p = 0; p < g.size(); ++p) pert[p] = base[p] - eps * xi[p];
        const double em = model.energy(pert);
        const double fd = (ep - em) / (2.0 * eps);
        const double an = dot_masked(grad, xi);
        const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-12});
        worst = std::max(worst, rel);
    }
    return worst;
}

double minimality_check(const CylinderDomain& dom, const Nonlinearity& nl,
                        const Solution& sol, int n_bumps, std::uint64_t seed) {
    const UniformGrid& g = dom.grid;
    Mask free_mask(g.size(), 0);
    std::vector<std::size_t> free_pts;
    for (std::size_t p = 0; p < g.size(); ++p) {
        free_mask[p] = dom.in[p] && !dom.plus[p];
        if (free_mask[p]) free_pts.push_back(p);
    }
    EnergyModel model(g, dom.in, free_mask, dom.bottom, nl);
    const std::vector<double>& base = sol.v.values();
    const double E0 = model.energy(base);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, free_pts.size() - 1);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double h = g.axis(0).spacing;

    std::vector<double> pert(g.size());
    double worst = 0.0; // most negative normalised energy change
    for (int k = 0; k < n_bumps; ++k) {
        const std::size_t c = free_pts[pick(rng)];
        const auto xc = g.point(c);
        const double radius = (2.0 + 6.0 * uni(rng)) * h;
        const double amp = (uni(rng) - 0.5) * 0.4;
        double mass = 0.0;
        pert = base;
        IndexWalker w(g);
        for (std::size_t p = 0; p < g.size(); ++p, w.advance()) {
            if (!free_mask[p]) continue;
            const auto x = g.point(p);
            double r2 = 0.0;
            for (int a = 0; a < g.dim(); ++a) {
                const double dx = x[static_cast<std::size_t>(a)] - xc[static_cast<std::size_t>(a)];
                r2 += dx * dx;
            }
            if (r2 >= radius * radius) continue;
            const double q = 1.0 - r2 / (radius * radius);
            const double bump = amp * q * q;
            pert[p] += bump;
            mass += std::abs(bump) * point_weight(g, dom.in, p, w.i);
        }
        if (mass == 0.0) continue;
        const double dE = model.energy(pert) - E0;
        worst = std::min(worst, dE / mass);
    }
    return worst;
}

double discrete_cylinder_energy(const CylinderDomain& dom, const Nonlinearity& nl,
                                const ScalarField& v) {
    const UniformGrid& g = dom.grid;
    if (v.grid() != g) throw std::invalid_argument("discrete_cylinder_energy: grid mismatch");
    Mask free_mask(g.size(), 0);
    for (std::size_t p = 0; p < g.size(); ++p)
        free_mask[p] = dom.in[p] && !dom.plus[p];
    EnergyModel model(g, dom.in, free_mask, dom.bottom, nl);
    return model.energy(v.values());
}

Solution cascade_minimize_cylinder(int n, double R, double height, BaseShape shape,
                                   const Nonlinearity& nl,
                                   const std::function<ScalarField(const CylinderDomain&)>& boundary_for,
                                   const SolveConfig& cfg, const std::vector<double>& spacings) {
    if (spacings.empty()) throw std::invalid_argument("cascade: no spacings given");
    Solution sol{ScalarField(UniformGrid(), 0.0), ScalarField(UniformGrid(), 0.0)};
    bool have_prev = false;
    for (std::size_t level = 0; level < spacings.size(); ++level) {
        const CylinderDomain dom = make_cylinder(n, R, height, spacings[level], shape);
        SolveConfig lc = cfg;
        if (have_prev) {
            lc.init = InitPolicy::Field;
            lc.init_field = interpolate_to(sol.v, dom.grid);
        }
        sol = minimize_cylinder(dom, nl, boundary_for(dom), lc);
        have_prev = true;
        if (sol.status == SolveStatus::LineSearchFailure || sol.status == SolveStatus::NanEnergy)
            break;
    }
    return sol;
}

SaddleSolution cascade_saddle_minimize(int m, double R, double L, const Nonlinearity& nl,
                                       const SolveConfig& cfg, const std::vector<double>& spacings) {
    if (spacings.empty()) throw std::invalid_argument("cascade: no spacings given");
    SaddleSolution sad;
    bool have_prev = false;
    for (std::size_t level = 0; level < spacings.size(); ++level) {
        const WedgeDomain wedge = make_wedge(m, R, L, spacings[level]);
        SolveConfig lc = cfg;
        if (have_prev) {
            lc.init = InitPolicy::Field;
            lc.init_field = interpolate_to(sad.core.v, wedge.grid);
        }
        sad = saddle_minimize(wedge, nl, lc);
        have_prev = true;
        if (sad.core.status == SolveStatus::LineSearchFailure ||
            sad.core.status == SolveStatus::NanEnergy)
            break;
    }
    return sad;
}

} // namespace halflap
