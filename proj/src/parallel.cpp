#include "pluridyn/parallel.hpp"

#include <cstdlib>

namespace pluridyn {

namespace {
int g_threads = 0; // 0 = hardware
}

int thread_count() {
    if (const char* env = std::getenv("PLURIDYN_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    if (g_threads > 0) return g_threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

void set_thread_count(int n) { g_threads = n; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f,
                  std::size_t block) {
    if (n == 0) return;
    const int nthreads = thread_count();
    if (nthreads <= 1 || n <= block) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t lo = next.fetch_add(block);
            if (lo >= n) return;
            const std::size_t hi = lo + block < n ? lo + block : n;
            for (std::size_t i = lo; i < hi; ++i) f(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nthreads - 1);
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

} // namespace pluridyn
