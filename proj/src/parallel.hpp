#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mobilegen::detail {

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
// stops further work and is rethrown once all threads have joined.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn)
{
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        while (!abort.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                abort = true;
            }
        }
    };

    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)),
                                                      std::max<std::size_t>(1, n));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace mobilegen::detail
