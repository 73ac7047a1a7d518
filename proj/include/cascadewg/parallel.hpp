// parallel.hpp - worker count resolution and a batched parallel loop.

#pragma once

#include <cstddef>
#include <functional>

namespace cascadewg {

/// Worker count from CASCADEWG_THREADS (0 or unset = hardware concurrency).
unsigned worker_count();

/// Calls fn(i) for i in [begin, end) on up to `workers` threads and returns
/// once every call has finished. The first exception thrown by any call is
/// rethrown (lowest index wins, so the outcome does not depend on timing).
void parallel_for(std::size_t begin, std::size_t end, unsigned workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace cascadewg
