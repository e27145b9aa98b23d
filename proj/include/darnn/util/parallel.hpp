#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace darnn {

/// Index-sharded parallel loop for read-only model evaluation. Results must
/// be written by index, which keeps any reduction order deterministic.
template <class F>
inline void parallel_for(std::size_t n, int threads, F&& body) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t w = 0; w < nt; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += nt) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// Default worker count: DARNN_THREADS env var, else 1 (the determinism
/// contract's safe default).
inline int default_thread_count() {
    const char* env = std::getenv("DARNN_THREADS");
    if (env == nullptr) return 1;
    const int v = std::atoi(env);
    return v >= 1 ? v : 1;
}

}  // namespace darnn
