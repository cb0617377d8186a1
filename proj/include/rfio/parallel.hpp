#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace rfio {

// Global worker count for parallel loops (settable from the CLI --threads).
int thread_count();
void set_thread_count(int n);

// Chunked parallel loop over [0, n). Each index is processed exactly once by
// one thread; results written per-index are deterministic regardless of the
// thread count.
template <typename F>
void parallel_for(std::size_t n, F&& body) {
    int nt = std::min<std::size_t>(thread_count(), n);
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::size_t chunk = (n + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Pairwise (cascade) summation: fixed association order so reductions are
// reproducible and accurate independent of data size.
template <typename T>
T pairwise_sum(const T* data, std::size_t n) {
    if (n == 0) return T{};
    if (n <= 8) {
        T s = data[0];
        for (std::size_t i = 1; i < n; ++i) s += data[i];
        return s;
    }
    std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

template <typename T>
T pairwise_sum(const std::vector<T>& v) {
    return pairwise_sum(v.data(), v.size());
}

} // namespace rfio
