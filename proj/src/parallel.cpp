#include "halflap/parallel.hpp"

#include <atomic>
#include <thread>

namespace halflap {

namespace {
unsigned g_threads = 0;

unsigned effective_threads() {
    if (g_threads != 0) return g_threads;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}
} // namespace

void set_thread_count(unsigned n) { g_threads = n; }
unsigned thread_count() { return effective_threads(); }

double pairwise_sum(std::size_t lo, std::size_t hi,
                    const std::function<double(std::size_t)>& f) {
    return pairwise_sum_t(lo, hi, [&](std::size_t i) { return f(i); });
}

namespace {

// Combine slab partials pairwise in slab order.
double combine_pairwise(const std::vector<double>& parts, std::size_t lo, std::size_t hi) {
    const std::size_t n = hi - lo;
    if (n == 0) return 0.0;
    if (n == 1) return parts[lo];
    const std::size_t mid = lo + n / 2;
    return combine_pairwise(parts, lo, mid) + combine_pairwise(parts, mid, hi);
}

template <class Job>
void run_on_pool(std::size_t n_jobs, const Job& job) {
    const unsigned want = effective_threads();
    if (want <= 1 || n_jobs <= 1) {
        for (std::size_t j = 0; j < n_jobs; ++j) job(j);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= n_jobs) return;
            job(j);
        }
    };
    const unsigned nt = static_cast<unsigned>(std::min<std::size_t>(want, n_jobs));
    std::vector<std::thread> pool;
    pool.reserve(nt - 1);
    for (unsigned t = 0; t + 1 < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

} // namespace

double deterministic_reduce(std::size_t n,
                            const std::function<double(std::size_t, std::size_t)>& slab_sum) {
    if (n == 0) return 0.0;
    const std::size_t n_slabs = (n + kReduceSlab - 1) / kReduceSlab;
    std::vector<double> parts(n_slabs, 0.0);
    run_on_pool(n_slabs, [&](std::size_t j) {
        const std::size_t lo = j * kReduceSlab;
        const std::size_t hi = std::min(n, lo + kReduceSlab);
        parts[j] = slab_sum(lo, hi);
    });
    return combine_pairwise(parts, 0, n_slabs);
}

void parallel_ranges(std::size_t n,
                     const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    const std::size_t n_slabs = (n + kReduceSlab - 1) / kReduceSlab;
    run_on_pool(n_slabs, [&](std::size_t j) {
        const std::size_t lo = j * kReduceSlab;
        const std::size_t hi = std::min(n, lo + kReduceSlab);
        body(lo, hi);
    });
}

} // namespace halflap
