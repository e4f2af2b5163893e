#pragma once

#include <cstddef>
#include <functional>

namespace clothtrack {

// Worker-pool size: $CLOTHTRACK_WORKERS if set to a positive integer, else the
// hardware concurrency (at least 1).
std::size_t worker_count();

// Runs fn(0) .. fn(n - 1) on up to `workers` threads. The first exception
// thrown by any task is rethrown after all workers have joined. Calls made
// from inside a worker run inline.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t workers = worker_count());

}  // namespace clothtrack
