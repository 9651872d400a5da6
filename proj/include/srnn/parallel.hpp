#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "srnn/linalg.hpp"

namespace srnn {

// Worker cap from SRNNKIT_THREADS (0 or unset = hardware concurrency).
inline int max_threads() {
    if (const char* env = std::getenv("SRNNKIT_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs f(i) for i in [0, n). Callers guarantee iterations write to disjoint
// locations, so results are bitwise independent of the schedule. Falls back
// to serial when a MAC-counting scope is active (the counter is
// thread-local) or when only one worker is available.
template <typename F>
void parallel_for(int n, F&& f) {
    const int workers = std::min(max_threads(), n);
    if (workers <= 1 || maccount::g_enabled) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += workers) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace srnn
