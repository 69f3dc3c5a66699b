#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace isnn {

// Worker count for multi-seed studies: ISNN_JOBS env var, else hardware.
inline int default_jobs() {
    if (const char* env = std::getenv("ISNN_JOBS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(0..ntasks-1) on up to `jobs` threads. Tasks must be independent
// and write only to their own output slots; scheduling order then cannot
// affect results.
inline void run_parallel(int jobs, int ntasks, const std::function<void(int)>& fn) {
    if (jobs <= 1 || ntasks <= 1) {
        for (int i = 0; i < ntasks; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= ntasks) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(jobs, ntasks);
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
}

} // namespace isnn
