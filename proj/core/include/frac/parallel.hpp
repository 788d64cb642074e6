#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace frac {

/// Worker count: hardware concurrency, capped by FRAC_NUM_THREADS when set.
std::size_t num_threads();

/// True on threads currently executing a parallel_for body; nested loops run
/// serially there.
inline bool& in_parallel_region() {
    thread_local bool flag = false;
    return flag;
}

/// Runs fn(i) for i in [begin, end) on up to num_threads() threads.
/// Indices are handed out in chunks of `grain`; results must be written to
/// per-index slots so output does not depend on scheduling. The first
/// exception thrown by any worker is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, Fn&& fn, std::size_t grain = 16) {
    if (end <= begin) return;
    const std::size_t count = end - begin;
    const std::size_t workers = std::min(num_threads(), (count + grain - 1) / grain);
    if (workers <= 1 || in_parallel_region()) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{begin};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        const bool outer = in_parallel_region();
        in_parallel_region() = true;
        struct Restore {
            bool value;
            ~Restore() { in_parallel_region() = value; }
        } restore{outer};
        for (;;) {
            const std::size_t lo = next.fetch_add(grain);
            if (lo >= end) return;
            const std::size_t hi = std::min(end, lo + grain);
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(end);
                return;
            }
        }
    };

    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    pool.clear();
    if (error) std::rethrow_exception(error);
}

}  // namespace frac
