#pragma once

// Deterministic fan-out for independent per-leaf work. ROBUST_FTAP_THREADS
// caps the worker count; results are written into caller-indexed slots, so
// the merge order never depends on scheduling.

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace rftap {

inline int thread_count() {
    if (const char* env = std::getenv("ROBUST_FTAP_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n > 64 ? 64 : n;
        } catch (...) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

template <class Fn>
void parallel_for(size_t n, Fn&& fn) {
    const size_t workers = static_cast<size_t>(thread_count());
    if (workers <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers && w < n; ++w)
        pool.emplace_back([&, w] {
            for (size_t i = w; i < n; i += workers) fn(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace rftap
