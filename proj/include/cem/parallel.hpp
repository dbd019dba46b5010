#pragma once

#include <cstddef>
#include <functional>

namespace cem {

// Runs fn(0..n-1) on up to `threads` workers (0 = hardware concurrency).
// Work items must write results into caller-owned slots indexed by i so the
// reduction is deterministic regardless of completion order. The first
// exception thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

std::size_t default_thread_count();

}  // namespace cem
