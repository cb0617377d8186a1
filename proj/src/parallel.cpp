#include "rfio/parallel.hpp"

#include <atomic>

namespace rfio {

namespace {
std::atomic<int> g_threads{0};
}

int thread_count() {
    int n = g_threads.load(std::memory_order_relaxed);
    if (n > 0) return n;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

void set_thread_count(int n) {
    g_threads.store(n, std::memory_order_relaxed);
}

} // namespace rfio
