#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace halflap {

// Global worker-thread count for data-parallel kernels.
// 0 = auto (hardware concurrency). Results never depend on this value:
// all reductions combine fixed-size slab partials in index order.
void set_thread_count(unsigned n);
unsigned thread_count();

// Slab size used to split index ranges. Fixed so that the reduction tree
// is identical for every thread count.
inline constexpr std::size_t kReduceSlab = 1 << 16;

// Pairwise summation of f(i) over [lo, hi). Deterministic. Header template
// so the functor inlines in hot loops.
template <class F>
double pairwise_sum_t(std::size_t lo, std::size_t hi, F&& f) {
    const std::size_t n = hi - lo;
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        return s;
    }
    const std::size_t mid = lo + n / 2;
    return pairwise_sum_t(lo, mid, f) + pairwise_sum_t(mid, hi, f);
}

double pairwise_sum(std::size_t lo, std::size_t hi,
                    const std::function<double(std::size_t)>& f);

// Deterministic parallel reduction: splits [0, n) into kReduceSlab slabs,
// evaluates slab_sum(lo, hi) for each (possibly concurrently), then combines
// the partials pairwise in slab order.
double deterministic_reduce(std::size_t n,
                            const std::function<double(std::size_t, std::size_t)>& slab_sum);

// Parallel map over [0, n): body(lo, hi) on disjoint ranges. No reduction,
// so ordering is irrelevant; body must only write to its own range.
void parallel_ranges(std::size_t n,
                     const std::function<void(std::size_t, std::size_t)>& body);

} // namespace halflap
