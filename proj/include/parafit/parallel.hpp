///
/// \file parallel.hpp
///
/// Order-preserving parallel map. Each task writes only its own slot, so the
/// result never depends on scheduling.
///
#ifndef PARAFIT_PARALLEL_HPP
#define PARAFIT_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace parafit
{

/// Worker count from PARAFIT_THREADS (positive integer), else hardware concurrency.
unsigned thread_count();

namespace detail
{

template <typename Task>
void run_pool(std::size_t n, unsigned workers, Task&& task)
{
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::size_t first_error_index = n;
    std::mutex error_mutex;
    auto work = [&]() {
        for (;;)
        {
            const std::size_t i = next.fetch_add(1);
            if (i >= n)
            {
                return;
            }
            try
            {
                task(i);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                // lowest failing index wins so the reported error is deterministic
                if (i < first_error_index)
                {
                    first_error_index = i;
                    first_error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t)
    {
        pool.emplace_back(work);
    }
    for (auto& th : pool)
    {
        th.join();
    }
    if (first_error)
    {
        std::rethrow_exception(first_error);
    }
}

} // namespace detail

template <typename Fn>
auto parallel_map(std::size_t n, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))>
{
    using R = decltype(fn(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            slots[i].emplace(fn(i));
        }
    }
    else
    {
        detail::run_pool(n, workers, [&](std::size_t i) { slots[i].emplace(fn(i)); });
    }
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots)
    {
        out.push_back(std::move(*s));
    }
    return out;
}

} // namespace parafit

#endif /* PARAFIT_PARALLEL_HPP */
