#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rwre
{

//---------------------------------------------------------------------------//
/*!
 * Run fn(i) for i in [0, n) on up to `workers` threads.
 *
 * Tasks must write only to their own slot of a preallocated result array;
 * callers reduce the slots in index order, so totals do not depend on the
 * worker count or on scheduling. The first exception thrown by a task is
 * rethrown after all threads join.
 */
template<class Fn>
void parallel_for(std::int64_t n, int workers, Fn&& fn)
{
    workers = std::max(1, workers);
    if (workers == 1 || n <= 1)
    {
        for (std::int64_t i = 0; i < n; ++i)
        {
            fn(i);
        }
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        while (true)
        {
            std::int64_t const i = next.fetch_add(1);
            if (i >= n)
            {
                return;
            }
            try
            {
                fn(i);
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error)
                {
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    auto const count = static_cast<int>(std::min<std::int64_t>(workers, n));
    pool.reserve(count);
    for (int t = 0; t < count; ++t)
    {
        pool.emplace_back(body);
    }
    for (auto& th : pool)
    {
        th.join();
    }
    if (error)
    {
        std::rethrow_exception(error);
    }
}

}  // namespace rwre
