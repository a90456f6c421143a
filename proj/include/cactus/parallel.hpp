#pragma once

#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace cactus {

/// Worker cap: CACTUS_THREADS if set (>=1), else hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("CACTUS_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// Runs f(i) for i in [0, n). Each i must write only its own output slot so
/// results are identical for any worker count or schedule.
inline void parallel_for(size_t n, const std::function<void(size_t)>& f) {
    unsigned workers = worker_count();
    if (workers <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) f(i);
        return;
    }
    if (workers > n) workers = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        size_t lo = n * w / workers;
        size_t hi = n * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            try {
                for (size_t i = lo; i < hi; ++i) f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace cactus
