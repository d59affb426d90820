#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace crowdflow {

// Worker-thread cap, read from CROWDFLOW_THREADS (default 1).
inline int thread_count() {
    const char* env = std::getenv("CROWDFLOW_THREADS");
    if (!env) return 1;
    int n = std::atoi(env);
    if (n < 1) return 1;
    return std::min(n, 64);
}

// Chunked parallel loop over [0, n). Each worker owns a contiguous index
// range and must write only to its own indices, so the result is bitwise
// identical to the sequential loop for any thread count.
template <class Fn>
void parallel_for(int n, Fn&& fn) {
    int workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    int chunk = (n + workers - 1) / workers;
    auto run = [&fn](int lo, int hi) {
        for (int i = lo; i < hi; ++i) fn(i);
    };
    for (int w = 1; w < workers; ++w) {
        int lo = w * chunk;
        int hi = std::min(n, lo + chunk);
        if (lo < hi) pool.emplace_back(run, lo, hi);
    }
    run(0, std::min(n, chunk));
    for (auto& t : pool) t.join();
}

}  // namespace crowdflow
