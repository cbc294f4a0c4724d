#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace halflap {

inline constexpr int kMaxDim = 4;

/// One axis of a uniform tensor grid: points origin + i*spacing, i = 0..count-1.
struct AxisSpec {
    double origin = 0.0;
    double spacing = 1.0;
    int count = 2;
};

/// Uniform tensor grid in 2..4 dimensions. Values are stored row-major with
/// the LAST axis fastest. By convention the extension coordinate lambda, when
/// present, is the last axis.
class UniformGrid {
public:
    UniformGrid() : UniformGrid(std::vector<AxisSpec>{{0.0, 1.0, 2}, {0.0, 1.0, 2}}) {}
    explicit UniformGrid(std::vector<AxisSpec> axes);

    int dim() const { return static_cast<int>(axes_.size()); }
    std::size_t size() const { return size_; }
    const AxisSpec& axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }
    std::size_t stride(int a) const { return strides_[static_cast<std::size_t>(a)]; }
    double coord(int a, int i) const { return axes_[static_cast<std::size_t>(a)].origin + i * axes_[static_cast<std::size_t>(a)].spacing; }

    std::size_t flat(std::array<int, kMaxDim> idx) const;
    std::array<int, kMaxDim> unflat(std::size_t p) const;
    std::array<double, kMaxDim> point(std::size_t p) const;

    bool operator==(const UniformGrid& o) const;
    bool operator!=(const UniformGrid& o) const { return !(*this == o); }

private:
    std::vector<AxisSpec> axes_;
    std::array<std::size_t, kMaxDim> strides_{};
    std::size_t size_ = 0;
};

/// Walks multi-indices in row-major order (last axis fastest) without
/// divisions; used by the hot grid sweeps.
struct IndexWalker {
    std::array<int, kMaxDim> i{};
    std::array<int, kMaxDim> n{};
    int dim = 0;

    explicit IndexWalker(const UniformGrid& g) {
        dim = g.dim();
        for (int a = 0; a < dim; ++a) n[static_cast<std::size_t>(a)] = g.axis(a).count;
    }
    void seek(const UniformGrid& g, std::size_t p) { i = g.unflat(p); }
    void advance() {
        for (int a = dim - 1; a >= 0; --a) {
            auto ua = static_cast<std::size_t>(a);
            if (++i[ua] < n[ua]) return;
            i[ua] = 0;
        }
    }
};

using Mask = std::vector<std::uint8_t>;

std::size_t mask_count(const Mask& m);
bool mask_subset(const Mask& inner, const Mask& outer);
Mask mask_and(const Mask& a, const Mask& b);

/// Scalar values on a masked uniform grid. Arithmetic requires identical grids.
class ScalarField {
public:
    ScalarField() : ScalarField(UniformGrid()) {}
    ScalarField(UniformGrid grid, double fill = 0.0);
    ScalarField(UniformGrid grid, std::vector<double> values, Mask mask);

    const UniformGrid& grid() const { return grid_; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    Mask& mask() { return mask_; }
    const Mask& mask() const { return mask_; }

    double& operator[](std::size_t p) { return values_[p]; }
    double operator[](std::size_t p) const { return values_[p]; }
    bool in(std::size_t p) const { return mask_[p] != 0; }

    /// Min/max of values over the mask; throws if the mask is empty.
    double min_masked() const;
    double max_masked() const;
    /// True if every masked-in value is finite.
    bool finite_masked() const;

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double c);
    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(ScalarField a, double c) { return a *= c; }

private:
    void check_same_grid(const ScalarField& o) const;

    UniformGrid grid_;
    std::vector<double> values_;
    Mask mask_;
};

/// Per-axis trapezoid weight of point p within `region`:
/// spacing if both axis neighbours are in the region, spacing/2 if exactly
/// one is, and 1 if neither (degenerate axis: the region is a lower-
/// dimensional slab there and the axis contributes counting measure).
double axis_weight(const UniformGrid& g, const Mask& region, std::size_t p,
                   const std::array<int, kMaxDim>& idx, int a);

/// Product of axis_weight over all axes: the dual (quadrature) volume of p.
double point_weight(const UniformGrid& g, const Mask& region, std::size_t p,
                    const std::array<int, kMaxDim>& idx);

/// Discrete gradient: central differences where both neighbours are masked
/// in, one-sided second-order at mask edges, first-order when only a single
/// neighbour exists. Output fields share the input grid and mask.
std::vector<ScalarField> gradient(const ScalarField& f);

/// |gradient|^2 as a field (avoids materialising all components at once).
ScalarField gradient_squared(const ScalarField& f);

/// Residual of the (2d+1)-point Laplacian stencil on interior points (all 2d
/// neighbours masked in); zero elsewhere.
ScalarField laplacian_residual(const ScalarField& f);

/// Trapezoid-type quadrature of f over `region` (which must be a subset of
/// f's mask), optionally with a pointwise weight field. Degenerate axes
/// contribute counting measure, so a one-layer slab integrates as a lower-
/// dimensional region. Deterministic fixed-order summation.
double integrate(const ScalarField& f, const Mask& region,
                 const ScalarField* weight = nullptr, bool* empty_warning = nullptr);

/// Field dump format: header
///   halflap-field v1; dims=d; counts=c1,..; origins=o1,..; spacings=h1,..
/// followed by one value per line (%.17g), row-major; the mask is written as
/// a parallel file of 0/1 lines with the same header.
void write_field(std::ostream& os, const ScalarField& f);
void write_mask(std::ostream& os, const ScalarField& f);
ScalarField read_field(std::istream& values, std::istream* mask = nullptr);
void dump_field(const ScalarField& f, const std::string& path_base);
ScalarField load_field(const std::string& path_base);

/// Multilinear interpolation of `coarse` onto `fine_grid` (clamped at the
/// domain edge). Intended for warm starts on full box grids.
ScalarField interpolate_to(const ScalarField& coarse, const UniformGrid& fine_grid);

} // namespace halflap
