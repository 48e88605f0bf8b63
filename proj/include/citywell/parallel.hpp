#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace citywell {

// Runs body(i) for i in [0, n) on up to `jobs` threads. Work items must be
// independent; the first exception wins and is rethrown on the caller.
inline void parallel_for(size_t n, int jobs, const std::function<void(size_t)>& body) {
    if (n == 0) return;
    if (jobs < 1) jobs = 1;
    size_t workers = std::min(static_cast<size_t>(jobs), n);
    if (workers == 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (size_t t = 0; t < workers; ++t) threads.emplace_back(run);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace citywell
