#pragma once

#include <cstddef>
#include <functional>

namespace rfsl {

// Number of worker threads used when a caller passes threads = 0.
std::size_t default_thread_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries do
// not depend on the thread count, so callers that write disjoint outputs get
// identical results for any threads >= 1. Exceptions from workers are rethrown
// (the first one by chunk order).
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t chunk = 64);

}  // namespace rfsl
