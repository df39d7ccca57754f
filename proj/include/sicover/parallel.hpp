#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace sicover {

/// Run fn(i) for i in [0, n) across hardware threads. Work items must be
/// independent; results should be written to pre-assigned slots so the
/// aggregation is order-free.
inline void parallel_for(long n, const std::function<void(long)>& fn, int max_threads = 0) {
    int threads = max_threads > 0 ? max_threads : int(std::thread::hardware_concurrency());
    if (threads <= 1 || n < 4) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    threads = int(std::min<long>(threads, n));
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(size_t(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            while (true) {
                long i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

}  // namespace sicover
