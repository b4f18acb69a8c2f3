#pragma once

#include <cstddef>
#include <functional>

namespace ballwave {

// Resolves a requested thread count; 0 means one thread per hardware core.
int resolve_threads(int requested);

// Runs fn(i) for every i in [0, n). Indices are split into contiguous
// blocks, one block per worker. Callers must only write to slots owned by
// index i; with that discipline results are independent of the thread
// count and of scheduling. The first exception thrown by any worker is
// rethrown after all workers join.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace ballwave
