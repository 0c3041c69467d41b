#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <utility>
#include <vector>

namespace gvcrank {

/// Number of worker threads to use, capped by the GVC_RANK_THREADS env var.
inline unsigned thread_cap() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("GVC_RANK_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0 && static_cast<unsigned long>(v) < hw) {
            return static_cast<unsigned>(v);
        }
    }
    return hw;
}

/// Runs fn(i) for every i in [0, n). fn must write only to slots owned by i,
/// so the result is identical regardless of scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    std::size_t workers = std::min<std::size_t>(thread_cap(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n) break;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace gvcrank
