#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace hby {

/// Runs body(0..count-1) on a strided thread pool. The body owns any
/// per-index state; results must be written to disjoint slots so the order
/// of execution cannot matter. HBY_THREADS caps the pool (useful to check
/// that results do not depend on the worker count).
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    unsigned hw = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("HBY_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) hw = static_cast<unsigned>(v);
    }
    unsigned threads = std::min<unsigned>(hw, static_cast<unsigned>(count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += threads) body(i);
        });
    for (std::thread& th : pool) th.join();
}

} // namespace hby
