#pragma once

#include <cstddef>
#include <functional>

namespace shapelab {

// Worker count from SHAPELAB_THREADS, else the hardware concurrency (at least 1).
int thread_count();

// Runs fn(i) for i in [0, n) on up to thread_count() threads; indices are handed out in order and
// the first exception is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace shapelab
