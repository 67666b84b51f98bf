#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace sbx
{
//! Worker threads for replica loops: SBX_WORKERS if set, else the core count.
unsigned worker_count();

/*!
 * Evaluate f(i) for i in [0, n) on the worker pool. Results are stored by
 * index, so the output does not depend on scheduling. The exception of the
 * lowest failing index is rethrown.
 */
template <class R, class F>
std::vector<R> run_replicas(std::size_t n, F&& f)
{
    std::vector<R> out(n);
    unsigned workers = std::min<std::size_t>(worker_count(), n == 0 ? 1 : n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        while (true)
        {
            std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try
            {
                out[i] = f(i);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1)
        body();
    else
    {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(body);
        for (auto& th : pool)
            th.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

}  // namespace sbx
