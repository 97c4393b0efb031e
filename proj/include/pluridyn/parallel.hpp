#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace pluridyn {

// Thread count policy: PLURIDYN_THREADS env var overrides the configured
// value; 0 means hardware concurrency.
int thread_count();
void set_thread_count(int n);

// Runs f(i) for i in [0,n). Work is handed out in fixed-size blocks through an
// atomic counter; f must only write to per-index slots, so the result is
// independent of the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f,
                  std::size_t block = 256);

// Deterministic reduction: per-block partial sums are accumulated in ascending
// index order within each block, then combined in block order. Bitwise
// identical output for any thread count.
template <class F>
double parallel_sum(std::size_t n, F&& term, std::size_t block = 1024) {
    if (n == 0) return 0.0;
    const std::size_t nblocks = (n + block - 1) / block;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for(
        nblocks,
        [&](std::size_t b) {
            const std::size_t lo = b * block;
            const std::size_t hi = lo + block < n ? lo + block : n;
            double acc = 0.0;
            for (std::size_t i = lo; i < hi; ++i) acc += term(i);
            partial[b] = acc;
        },
        1);
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

} // namespace pluridyn
