#pragma once

#include <algorithm>
#include <thread>
#include <vector>

#include "dbnmf/matrix.hpp"

namespace dbnmf {

/// Number of worker threads used by the row-separable kernels. 1 means the
/// plain sequential loop. Every kernel dispatched through parallel_rows writes
/// disjoint rows and performs no cross-row reduction, so results are bitwise
/// identical for any thread count.
int thread_count() noexcept;
void set_thread_count(int n) noexcept;

/// Reads DBNMF_THREADS; unset or unparsable leaves the count at 1.
void configure_threads_from_env();

template <class Body>
void parallel_rows(Index rows, Body&& body)
{
    const int threads = static_cast<int>(std::min<Index>(thread_count(), rows));
    if (threads <= 1) {
        for (Index i = 0; i < rows; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const Index chunk = (rows + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const Index begin = t * chunk;
        const Index end = std::min(rows, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &body] {
            for (Index i = begin; i < end; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace dbnmf
