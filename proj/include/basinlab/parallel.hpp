#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace basinlab {

/// Worker count: BASINLAB_THREADS if set (>= 1), else hardware concurrency.
inline int default_thread_count() {
    if (const char* env = std::getenv("BASINLAB_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Split [0, n) into `workers` static contiguous slices and run
/// body(worker_index, begin, end) on each. Slices depend only on (n,
/// workers), so per-trial results are identical under any worker count as
/// long as trial i's work is a pure function of i.
template <typename Body>
void parallel_slices(long n, int workers, Body&& body) {
    workers = static_cast<int>(std::clamp<long>(workers, 1, std::max(1L, n)));
    if (workers == 1) {
        body(0, 0L, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        long begin = n * w / workers;
        long end = n * (w + 1) / workers;
        pool.emplace_back([&body, w, begin, end] { body(w, begin, end); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace basinlab
