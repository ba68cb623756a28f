#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

// Deterministic data-parallel loops.  Work items write to preassigned slots,
// so the reduction order never depends on scheduling.  SEMIGROUP_LAB_THREADS
// caps the worker count (default: hardware concurrency, at most 8).

namespace sglab {

inline int thread_cap() {
    static const int cap = [] {
        if (const char* env = std::getenv("SEMIGROUP_LAB_THREADS")) {
            const int v = std::atoi(env);
            if (v >= 1) return std::min(v, 64);
        }
        const unsigned hc = std::thread::hardware_concurrency();
        return hc ? int(std::min(hc, 8u)) : 4;
    }();
    return cap;
}

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const int workers = std::min<std::size_t>(std::size_t(thread_cap()), n ? n : 1);
    if (workers <= 1 || n < 16) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = std::size_t(t); i < n; i += std::size_t(workers)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace sglab
