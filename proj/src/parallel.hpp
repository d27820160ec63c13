#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace mrep::detail {

/// Runs body(i) for i in [0, count) on up to `workers` threads, index i going to thread i % workers.
/// The first exception raised by any thread is rethrown after all have joined.
template <typename F>
void parallel_for(int count, int workers, F&& body) {
    const int threads = std::clamp(workers, 1, std::max(1, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k)
        pool.emplace_back([&, k] {
            try {
                for (int i = k; i < count; i += threads) body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(k)] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace mrep::detail
