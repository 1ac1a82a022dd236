#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace oshe {

// Runs body(i) for i in [0, n) on `workers` threads. Work items are claimed
// from an atomic counter, so results must be written to slots indexed by i;
// with that discipline output is identical for any worker count.
inline void parallel_for_index(std::size_t n, int workers,
                               const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto run = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load())
                return;
            try {
                body(i);
            } catch (...) {
                if (!failed.exchange(true))
                    error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    int count = std::min<int>(workers, static_cast<int>(n));
    pool.reserve(count);
    for (int w = 0; w < count; ++w)
        pool.emplace_back(run);
    for (auto& t : pool)
        t.join();
    if (failed.load())
        std::rethrow_exception(error);
}

} // namespace oshe
