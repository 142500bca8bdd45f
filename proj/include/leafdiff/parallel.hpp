#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace leafdiff {

// Static index partition; callers write results into per-index slots, so the
// outcome is identical for any worker count.
inline void parallel_for(int n_tasks, int n_workers, const std::function<void(int)>& fn) {
    if (n_workers <= 1 || n_tasks <= 1) {
        for (int i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    if (n_workers > n_tasks) n_workers = n_tasks;
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) {
        pool.emplace_back([&, t]() {
            for (int i = t; i < n_tasks; i += n_workers) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

} // namespace leafdiff
