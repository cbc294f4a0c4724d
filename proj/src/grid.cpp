#include "halflap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "halflap/parallel.hpp"

namespace halflap {

UniformGrid::UniformGrid(std::vector<AxisSpec> axes) : axes_(std::move(axes)) {
    const int d = static_cast<int>(axes_.size());
    if (d < 2 || d > kMaxDim)
        throw std::invalid_argument("UniformGrid: dimension must be in [2, 4]");
    for (const AxisSpec& ax : axes_) {
        if (!(ax.spacing > 0.0)) throw std::invalid_argument("UniformGrid: spacing must be > 0");
        if (ax.count < 2) throw std::invalid_argument("UniformGrid: axis needs at least 2 points");
    }
    size_ = 1;
    for (int a = d - 1; a >= 0; --a) {
        strides_[static_cast<std::size_t>(a)] = size_;
        size_ *= static_cast<std::size_t>(axes_[static_cast<std::size_t>(a)].count);
    }
}

std::size_t UniformGrid::flat(std::array<int, kMaxDim> idx) const {
    std::size_t p = 0;
    for (int a = 0; a < dim(); ++a) p += static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]) * strides_[static_cast<std::size_t>(a)];
    return p;
}

std::array<int, kMaxDim> UniformGrid::unflat(std::size_t p) const {
    std::array<int, kMaxDim> idx{};
    for (int a = 0; a < dim(); ++a) {
        const auto ua = static_cast<std::size_t>(a);
        idx[ua] = static_cast<int>(p / strides_[ua]);
        p %= strides_[ua];
    }
    return idx;
}

std::array<double, kMaxDim> UniformGrid::point(std::size_t p) const {
    const auto idx = unflat(p);
    std::array<double, kMaxDim> x{};
    for (int a = 0; a < dim(); ++a) x[static_cast<std::size_t>(a)] = coord(a, idx[static_cast<std::size_t>(a)]);
    return x;
}

bool UniformGrid::operator==(const UniformGrid& o) const {
    if (axes_.size() != o.axes_.size()) return false;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        if (axes_[a].origin != o.axes_[a].origin) return false;
        if (axes_[a].spacing != o.axes_[a].spacing) return false;
        if (axes_[a].count != o.axes_[a].count) return false;
    }
    return true;
}

std::size_t mask_count(const Mask& m) {
    std::size_t c = 0;
    for (auto b : m) c += b != 0;
    return c;
}

bool mask_subset(const Mask& inner, const Mask& outer) {
    if (inner.size() != outer.size()) return false;
    for (std::size_t p = 0; p < inner.size(); ++p)
        if (inner[p] && !outer[p]) return false;
    return true;
}

Mask mask_and(const Mask& a, const Mask& b) {
    if (a.size() != b.size()) throw std::invalid_argument("mask_and: size mismatch");
    Mask r(a.size(), 0);
    for (std::size_t p = 0; p < a.size(); ++p) r[p] = a[p] && b[p];
    return r;
}

ScalarField::ScalarField(UniformGrid grid, double fill)
    : grid_(std::move(grid)), values_(grid_.size(), fill), mask_(grid_.size(), 1) {}

ScalarField::ScalarField(UniformGrid grid, std::vector<double> values, Mask mask)
    : grid_(std::move(grid)), values_(std::move(values)), mask_(std::move(mask)) {
    if (values_.size() != grid_.size() || mask_.size() != grid_.size())
        throw std::invalid_argument("ScalarField: values/mask size does not match grid");
}

double ScalarField::min_masked() const {
    double m = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t p = 0; p < values_.size(); ++p)
        if (mask_[p]) { m = std::min(m, values_[p]); any = true; }
    if (!any) throw std::runtime_error("ScalarField: empty mask");
    return m;
}

double ScalarField::max_masked() const {
    double m = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t p = 0; p < values_.size(); ++p)
        if (mask_[p]) { m = std::max(m, values_[p]); any = true; }
    if (!any) throw std::runtime_error("ScalarField: empty mask");
    return m;
}

bool ScalarField::finite_masked() const {
    for (std::size_t p = 0; p < values_.size(); ++p)
        if (mask_[p] && !std::isfinite(values_[p])) return false;
    return true;
}

void ScalarField::check_same_grid(const ScalarField& o) const {
    if (grid_ != o.grid_) throw std::invalid_argument("ScalarField: grid mismatch");
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    check_same_grid(o);
    for (std::size_t p = 0; p < values_.size(); ++p) values_[p] += o.values_[p];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    check_same_grid(o);
    for (std::size_t p = 0; p < values_.size(); ++p) values_[p] -= o.values_[p];
    return *this;
}

ScalarField& ScalarField::operator*=(double c) {
    for (double& v : values_) v *= c;
    return *this;
}

double axis_weight(const UniformGrid& g, const Mask& region, std::size_t p,
                   const std::array<int, kMaxDim>& idx, int a) {
    const auto ua = static_cast<std::size_t>(a);
    const int i = idx[ua];
    const std::size_t s = g.stride(a);
    const bool lo = i > 0 && region[p - s];
    const bool hi = i + 1 < g.axis(a).count && region[p + s];
    if (lo && hi) return g.axis(a).spacing;
    if (lo || hi) return 0.5 * g.axis(a).spacing;
    return 1.0; // degenerate axis: counting measure
}

double point_weight(const UniformGrid& g, const Mask& region, std::size_t p,
                    const std::array<int, kMaxDim>& idx) {
    double w = 1.0;
    for (int a = 0; a < g.dim(); ++a) w *= axis_weight(g, region, p, idx, a);
    return w;
}

namespace {

// One-dimensional masked derivative along axis a at point p. Central when
// both neighbours are in the mask, one-sided second-order with two
// neighbours on one side, first-order with a single neighbour, 0 otherwise.
double axis_derivative(const UniformGrid& g, const Mask& m, const std::vector<double>& v,
                       std::size_t p, const std::array<int, kMaxDim>& idx, int a) {
    const auto ua = static_cast<std::size_t>(a);
    const int i = idx[ua];
    const int n = g.axis(a).count;
    const std::size_t s = g.stride(a);
    const double h = g.axis(a).spacing;
    const bool lo = i > 0 && m[p - s];
    const bool hi = i + 1 < n && m[p + s];
    if (lo && hi) return (v[p + s] - v[p - s]) / (2.0 * h);
    if (hi) {
        const bool hi2 = i + 2 < n && m[p + 2 * s];
        if (hi2) return (-3.0 * v[p] + 4.0 * v[p + s] - v[p + 2 * s]) / (2.0 * h);
        return (v[p + s] - v[p]) / h;
    }
    if (lo) {
        const bool lo2 = i >= 2 && m[p - 2 * s];
        if (lo2) return (3.0 * v[p] - 4.0 * v[p - s] + v[p - 2 * s]) / (2.0 * h);
        return (v[p] - v[p - s]) / h;
    }
    return 0.0;
}

} // namespace

std::vector<ScalarField> gradient(const ScalarField& f) {
    const UniformGrid& g = f.grid();
    const Mask& m = f.mask();
    const std::vector<double>& v = f.values();
    std::vector<ScalarField> out;
    out.reserve(static_cast<std::size_t>(g.dim()));
    for (int a = 0; a < g.dim(); ++a) out.emplace_back(g, 0.0);
    for (int a = 0; a < g.dim(); ++a) out[static_cast<std::size_t>(a)].mask() = m;

    parallel_ranges(g.size(), [&](std::size_t lo, std::size_t hi) {
        IndexWalker w(g);
        w.seek(g, lo);
        for (std::size_t p = lo; p < hi; ++p, w.advance()) {
            if (!m[p]) continue;
            for (int a = 0; a < g.dim(); ++a)
                out[static_cast<std::size_t>(a)][p] = axis_derivative(g, m, v, p, w.i, a);
        }
    });
    return out;
}

ScalarField gradient_squared(const ScalarField& f) {
    const UniformGrid& g = f.grid();
    const Mask& m = f.mask();
    const std::vector<double>& v = f.values();
    ScalarField out(g, 0.0);
    out.mask() = m;
    parallel_ranges(g.size(), [&](std::size_t lo, std::size_t hi) {
        IndexWalker w(g);
        w.seek(g, lo);
        for (std::size_t p = lo; p < hi; ++p, w.advance()) {
            if (!m[p]) continue;
            double s2 = 0.0;
            for (int a = 0; a < g.dim(); ++a) {
                const double d = axis_derivative(g, m, v, p, w.i, a);
                s2 += d * d;
            }
            out[p] = s2;
        }
    });
    return out;
}

ScalarField laplacian_residual(const ScalarField& f) {
    const UniformGrid& g = f.grid();
    const Mask& m = f.mask();
    const std::vector<double>& v = f.values();
    ScalarField out(g, 0.0);
    out.mask() = m;
    parallel_ranges(g.size(), [&](std::size_t lo, std::size_t hi) {
        IndexWalker w(g);
        w.seek(g, lo);
        for (std::size_t p = lo; p < hi; ++p, w.advance()) {
            if (!m[p]) continue;
            double acc = 0.0;
            bool interior = true;
            for (int a = 0; a < g.dim() && interior; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                const std::size_t s = g.stride(a);
                const double h = g.axis(a).spacing;
                const bool lo_in = w.i[ua] > 0 && m[p - s];
                const bool hi_in = w.i[ua] + 1 < w.n[ua] && m[p + s];
                if (!lo_in || !hi_in) { interior = false; break; }
                acc += (v[p + s] - 2.0 * v[p] + v[p - s]) / (h * h);
            }
            out[p] = interior ? acc : 0.0;
        }
    });
    return out;
}

double integrate(const ScalarField& f, const Mask& region,
                 const ScalarField* weight, bool* empty_warning) {
    const UniformGrid& g = f.grid();
    if (region.size() != g.size()) throw std::invalid_argument("integrate: region size mismatch");
    if (!mask_subset(region, f.mask())) throw std::invalid_argument("integrate: region not inside field mask");
    if (weight && weight->grid() != g) throw std::invalid_argument("integrate: weight grid mismatch");
    if (empty_warning) *empty_warning = false;
    if (mask_count(region) == 0) {
        if (empty_warning) *empty_warning = true;
        return 0.0;
    }
    const std::vector<double>& v = f.values();
    return deterministic_reduce(g.size(), [&](std::size_t lo, std::size_t hi) {
        IndexWalker w(g);
        w.seek(g, lo);
        std::vector<double> cell;
        cell.reserve(hi - lo);
        for (std::size_t p = lo; p < hi; ++p, w.advance()) {
            if (!region[p]) continue;
            double t = v[p] * point_weight(g, region, p, w.i);
            if (weight) t *= (*weight)[p];
            cell.push_back(t);
        }
        return pairwise_sum(0, cell.size(), [&](std::size_t i) { return cell[i]; });
    });
}

namespace {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_header(std::ostream& os, const UniformGrid& g) {
    os << "halflap-field v1; dims=" << g.dim() << "; counts=";
    for (int a = 0; a < g.dim(); ++a) os << (a ? "," : "") << g.axis(a).count;
    os << "; origins=";
    for (int a = 0; a < g.dim(); ++a) os << (a ? "," : "") << format_double(g.axis(a).origin);
    os << "; spacings=";
    for (int a = 0; a < g.dim(); ++a) os << (a ? "," : "") << format_double(g.axis(a).spacing);
    os << "\n";
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) { out.push_back(cur); cur.clear(); }
        else cur.push_back(c);
    }
    out.push_back(cur);
    return out;
}

UniformGrid parse_header(const std::string& line) {
    const auto fields = split(line, ';');
    if (fields.empty() || fields[0] != "halflap-field v1")
        throw std::runtime_error("field dump: bad magic");
    int dims = 0;
    std::vector<int> counts;
    std::vector<double> origins, spacings;
    for (std::size_t k = 1; k < fields.size(); ++k) {
        std::string f = fields[k];
        f.erase(0, f.find_first_not_of(' '));
        const auto eq = f.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = f.substr(0, eq);
        const auto vals = split(f.substr(eq + 1), ',');
        if (key == "dims") dims = std::stoi(vals[0]);
        else if (key == "counts") for (const auto& s : vals) counts.push_back(std::stoi(s));
        else if (key == "origins") for (const auto& s : vals) origins.push_back(std::stod(s));
        else if (key == "spacings") for (const auto& s : vals) spacings.push_back(std::stod(s));
    }
    if (dims <= 0 || static_cast<std::size_t>(dims) != counts.size() ||
        counts.size() != origins.size() || counts.size() != spacings.size())
        throw std::runtime_error("field dump: inconsistent header");
    std::vector<AxisSpec> axes(static_cast<std::size_t>(dims));
    for (int a = 0; a < dims; ++a)
        axes[static_cast<std::size_t>(a)] = {origins[static_cast<std::size_t>(a)], spacings[static_cast<std::size_t>(a)], counts[static_cast<std::size_t>(a)]};
    return UniformGrid(std::move(axes));
}

} // namespace

void write_field(std::ostream& os, const ScalarField& f) {
    write_header(os, f.grid());
    for (double v : f.values()) os << format_double(v) << "\n";
}

void write_mask(std::ostream& os, const ScalarField& f) {
    write_header(os, f.grid());
    for (auto b : f.mask()) os << (b ? 1 : 0) << "\n";
}

ScalarField read_field(std::istream& values, std::istream* mask) {
    std::string line;
    if (!std::getline(values, line)) throw std::runtime_error("field dump: empty stream");
    UniformGrid g = parse_header(line);
    std::vector<double> vals(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) {
        if (!std::getline(values, line)) throw std::runtime_error("field dump: truncated values");
        vals[p] = std::stod(line);
    }
    Mask m(g.size(), 1);
    if (mask) {
        if (!std::getline(*mask, line)) throw std::runtime_error("mask dump: empty stream");
        UniformGrid gm = parse_header(line);
        if (gm != g) throw std::runtime_error("mask dump: grid differs from field");
        for (std::size_t p = 0; p < g.size(); ++p) {
            if (!std::getline(*mask, line)) throw std::runtime_error("mask dump: truncated");
            m[p] = static_cast<std::uint8_t>(std::stoi(line) != 0);
        }
    }
    return ScalarField(std::move(g), std::move(vals), std::move(m));
}

void dump_field(const ScalarField& f, const std::string& path_base) {
    std::ofstream fv(path_base + ".field");
    if (!fv) throw std::runtime_error("cannot open " + path_base + ".field");
    write_field(fv, f);
    std::ofstream fm(path_base + ".mask");
    if (!fm) throw std::runtime_error("cannot open " + path_base + ".mask");
    write_mask(fm, f);
}

ScalarField load_field(const std::string& path_base) {
    std::ifstream fv(path_base + ".field");
    if (!fv) throw std::runtime_error("cannot open " + path_base + ".field");
    std::ifstream fm(path_base + ".mask");
    if (!fm) return read_field(fv, nullptr);
    return read_field(fv, &fm);
}

ScalarField interpolate_to(const ScalarField& coarse, const UniformGrid& fine_grid) {
    const UniformGrid& gc = coarse.grid();
    if (gc.dim() != fine_grid.dim())
        throw std::invalid_argument("interpolate_to: dimension mismatch");
    const int d = gc.dim();
    ScalarField out(fine_grid, 0.0);
    parallel_ranges(fine_grid.size(), [&](std::size_t lo, std::size_t hi) {
        IndexWalker w(fine_grid);
        w.seek(fine_grid, lo);
        for (std::size_t p = lo; p < hi; ++p, w.advance()) {
            std::array<int, kMaxDim> base{};
            std::array<double, kMaxDim> frac{};
            for (int a = 0; a < d; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                const double x = fine_grid.coord(a, w.i[ua]);
                double t = (x - gc.axis(a).origin) / gc.axis(a).spacing;
                t = std::clamp(t, 0.0, static_cast<double>(gc.axis(a).count - 1));
                int i0 = static_cast<int>(std::floor(t));
                i0 = std::min(i0, gc.axis(a).count - 2);
                base[ua] = i0;
                frac[ua] = t - i0;
            }
            double acc = 0.0;
            for (int corner = 0; corner < (1 << d); ++corner) {
                double wgt = 1.0;
                std::array<int, kMaxDim> idx = base;
                for (int a = 0; a < d; ++a) {
                    const auto ua = static_cast<std::size_t>(a);
                    if (corner & (1 << a)) { wgt *= frac[ua]; idx[ua] += 1; }
                    else wgt *= 1.0 - frac[ua];
                }
                acc += wgt * coarse[gc.flat(idx)];
            }
            out[p] = acc;
        }
    });
    return out;
}

} // namespace halflap
