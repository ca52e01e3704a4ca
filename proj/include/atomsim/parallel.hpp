#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace atomsim {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work is assigned by
/// a fixed stride, and callers store results by index, so the output never
/// depends on scheduling. jobs <= 1 runs sequentially on this thread.
inline void parallel_for(std::size_t n, unsigned jobs,
                         const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(jobs, n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&fn, n, w, workers] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace atomsim
