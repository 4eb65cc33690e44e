#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sidalign {

// Runs fn(0..n) across up to `workers` threads. Callers write results into
// preallocated per-index slots, so the outcome is identical for any worker
// count. The first exception is rethrown after all threads join.
inline void parallel_for_indexed(std::size_t n, int workers,
                                 const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t thread_count =
        std::min<std::size_t>(std::max(workers, 1), n);
    if (thread_count == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace sidalign
