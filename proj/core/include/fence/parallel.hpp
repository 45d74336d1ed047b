#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fence {

// Runs fn(i) for i in [0, count) on a bounded pool. Results are the caller's
// business (write into a pre-sized vector by index to keep output order fixed
// by input order). The first exception wins and is rethrown after join.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    if (count == 0) return;
    std::size_t pool = static_cast<std::size_t>(workers < 1 ? 1 : workers);
    pool = std::min(pool, count);
    if (pool == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (std::size_t t = 0; t < pool; ++t) {
        threads.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& thread : threads) thread.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace fence
