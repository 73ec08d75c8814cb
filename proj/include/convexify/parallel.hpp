#pragma once

#include <cstddef>
#include <functional>

namespace convexify {

/// Worker count: CONVEXIFY_THREADS if set and positive, otherwise hardware concurrency.
int thread_count();

/// Runs fn(i) for i in [0, n). Each index is handled by exactly one worker, so
/// results written to per-index slots are independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace convexify
