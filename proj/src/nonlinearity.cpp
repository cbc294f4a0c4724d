#include "halflap/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace halflap {

namespace {

double poly_eval(const std::vector<double>& c, double u) {
    double r = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) r = r * u + c[k];
    return r;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t k = 1; k < c.size(); ++k) d.push_back(static_cast<double>(k) * c[k]);
    if (d.empty()) d.push_back(0.0);
    return d;
}

// Antiderivative of -f with the constant chosen so that G(1) = 0.
std::vector<double> poly_potential(const std::vector<double>& f_coeffs) {
    std::vector<double> g(f_coeffs.size() + 1, 0.0);
    for (std::size_t k = 0; k < f_coeffs.size(); ++k)
        g[k + 1] = -f_coeffs[k] / static_cast<double>(k + 1);
    g[0] = -poly_eval(g, 1.0);
    return g;
}

// Parses "name(a,b,...)"; returns true and fills args on match.
bool parse_call(const std::string& s, const std::string& fn, std::vector<double>& args) {
    if (s.size() < fn.size() + 2 || s.compare(0, fn.size(), fn) != 0) return false;
    if (s[fn.size()] != '(' || s.back() != ')') return false;
    std::string body = s.substr(fn.size() + 1, s.size() - fn.size() - 2);
    std::size_t pos = 0;
    while (pos <= body.size()) {
        std::size_t comma = body.find(',', pos);
        const std::string tok = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            args.push_back(std::stod(tok));
        } catch (...) {
            return false;
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return true;
}

} // namespace

Nonlinearity builtin(const std::string& name) {
    using std::numbers::pi;
    if (name == "allen-cahn") {
        return Nonlinearity{
            "allen-cahn",
            [](double u) { return u - u * u * u; },
            [](double u) { return 1.0 - 3.0 * u * u; },
            [](double u) { const double q = 1.0 - u * u; return 0.25 * q * q; },
            "C^inf"};
    }
    if (name == "sine") {
        return Nonlinearity{
            "sine",
            [](double u) { return std::sin(pi * u); },
            [](double u) { return pi * std::cos(pi * u); },
            [](double u) { return (1.0 + std::cos(pi * u)) / pi; },
            "C^inf"};
    }
    std::vector<double> args;
    if (parse_call(name, "cubic-custom", args)) {
        if (args.size() != 2) throw std::invalid_argument("cubic-custom needs two parameters");
        return polynomial_nonlinearity({0.0, args[0], 0.0, -args[1]}, name);
    }
    throw std::invalid_argument("unknown nonlinearity: " + name);
}

Nonlinearity polynomial_nonlinearity(const std::vector<double>& f_coeffs, const std::string& name) {
    if (f_coeffs.empty()) throw std::invalid_argument("polynomial_nonlinearity: empty coefficients");
    const auto fp = poly_derivative(f_coeffs);
    const auto g = poly_potential(f_coeffs);
    return Nonlinearity{
        name,
        [f_coeffs](double u) { return poly_eval(f_coeffs, u); },
        [fp](double u) { return poly_eval(fp, u); },
        [g](double u) { return poly_eval(g, u); },
        "polynomial"};
}

RangeMinimum c_u_of(const Nonlinearity& nl, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("c_u_of: lo > hi");
    if (lo == hi) return {nl.G(lo), lo};
    constexpr int kScan = 4096;
    double best = nl.G(lo);
    double arg = lo;
    for (int k = 0; k <= kScan; ++k) {
        const double s = lo + (hi - lo) * static_cast<double>(k) / kScan;
        const double v = nl.G(s);
        if (v < best) { best = v; arg = s; }
    }
    // One Newton step for G' = 0 at the best cell, kept only if it improves.
    // G' = -f, G'' = -f', so the step is s - f(s)/f'(s).
    const double fp = nl.fprime(arg);
    if (fp != 0.0) {
        const double newton = std::clamp(arg - nl.f(arg) / fp, lo, hi);
        const double v = nl.G(newton);
        if (v < best) { best = v; arg = newton; }
    }
    return {best, arg};
}

HypothesisReport check_hypotheses(const Nonlinearity& nl) {
    HypothesisReport rep;
    constexpr int kProbe = 2048;

    // (h1) odd on [-2, 2]
    double odd_defect = 0.0;
    for (int k = 0; k <= kProbe; ++k) {
        const double u = -2.0 + 4.0 * static_cast<double>(k) / kProbe;
        odd_defect = std::max(odd_defect, std::abs(nl.f(u) + nl.f(-u)));
    }
    rep.odd = odd_defect <= rep.tol_odd;

    // (h2) G >= 0 = G(+-1), G > 0 on (-1, 1)
    bool well = std::abs(nl.G(1.0)) <= rep.tol_well && std::abs(nl.G(-1.0)) <= rep.tol_well;
    for (int k = 0; k <= kProbe && well; ++k) {
        const double u = -2.0 + 4.0 * static_cast<double>(k) / kProbe;
        if (nl.G(u) < -rep.tol_well) well = false;
    }
    for (int k = 0; k <= kProbe && well; ++k) {
        const double u = -0.98 + 1.96 * static_cast<double>(k) / kProbe;
        if (nl.G(u) <= rep.tol_well) well = false;
    }
    rep.double_well = well;

    // (h3) f' decreasing on (0, 1)
    bool dec = true;
    double prev = nl.fprime(1.0 / kProbe);
    for (int k = 2; k < kProbe && dec; ++k) {
        const double u = static_cast<double>(k) / kProbe;
        const double cur = nl.fprime(u);
        if (cur > prev + rep.tol_decreasing) dec = false;
        prev = cur;
    }
    rep.fprime_decreasing = dec;
    return rep;
}

ConsistencyReport consistency_report(const Nonlinearity& nl) {
    ConsistencyReport rep;
    constexpr int kProbe = 800;
    constexpr double step = 1e-4;
    for (int k = 0; k <= kProbe; ++k) {
        const double u = -2.0 + 4.0 * static_cast<double>(k) / kProbe;
        const double gp = (nl.G(u + step) - nl.G(u - step)) / (2.0 * step);
        rep.max_G_defect = std::max(rep.max_G_defect, std::abs(gp + nl.f(u)));
        const double fd = (nl.f(u + step) - nl.f(u - step)) / (2.0 * step);
        rep.max_fprime_defect = std::max(rep.max_fprime_defect, std::abs(fd - nl.fprime(u)));
    }
    return rep;
}

} // namespace halflap
