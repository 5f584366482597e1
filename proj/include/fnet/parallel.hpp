#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fnet {

/// Splits [0, n) into at most `workers` contiguous chunks and runs
/// body(begin, end) on each, joining before return. Work items must be
/// independent; callers write results by index so the outcome does not
/// depend on the worker count. The first exception thrown by any chunk is
/// rethrown on the calling thread.
template <typename Body>
void parallel_chunks(std::size_t n, int workers, const Body& body) {
    if (n == 0) return;
    if (workers < 2 || n < 2) {
        body(std::size_t{0}, n);
        return;
    }
    const std::size_t n_threads = std::min<std::size_t>(workers, n);
    const std::size_t chunk = (n + n_threads - 1) / n_threads;

    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(n_threads);
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&body, &errors, t, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

} // namespace fnet
