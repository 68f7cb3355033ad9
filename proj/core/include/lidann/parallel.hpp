#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace lidann {

/// Runs fn over [0, n) split into contiguous blocks, one per worker.
/// Workers write only to their own index slots, so results are identical
/// for any thread count. nthreads == 0 picks the hardware concurrency.
inline void parallel_for(std::size_t n, std::size_t nthreads,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    if (nthreads == 0) nthreads = std::max<unsigned>(1, std::thread::hardware_concurrency());
    nthreads = std::min(nthreads, n);
    if (nthreads <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(nthreads);
    const std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back(fn, begin, end);
    }
    for (auto& w : workers) w.join();
}

}  // namespace lidann
