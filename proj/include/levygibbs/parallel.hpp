#pragma once

#include <cstddef>
#include <functional>

namespace levygibbs {

// Worker count used by every parallel loop in the library. 0 means hardware
// concurrency. Results never depend on this value: work is split into fixed
// chunks and reductions are done by the caller in index order.
void set_worker_count(unsigned n);
unsigned worker_count();

// Calls body(begin, end) on contiguous chunks covering [0, n).
void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                     std::size_t min_chunk = 1);

template <class F>
void parallel_for(std::size_t n, F&& f, std::size_t min_chunk = 1)
{
    parallel_chunks(
        n,
        [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i)
                f(i);
        },
        min_chunk);
}

} // namespace levygibbs
