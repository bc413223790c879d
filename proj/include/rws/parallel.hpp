#pragma once

#include <cstddef>
#include <functional>

namespace rws {

/// Worker count: RWS_LAB_THREADS when set and positive, otherwise the
/// hardware concurrency. Results never depend on this value.
std::size_t worker_count();

/// Overrides the worker count for the current process (0 restores the
/// environment/hardware default).
void set_worker_count(std::size_t n);

/// Splits [0, n) into contiguous chunks and runs fn(begin, end) on each,
/// possibly concurrently. Chunks never share output indices, so callers that
/// write only inside their chunk get thread-count-independent results.
/// Below min_parallel items everything runs on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                  std::size_t min_parallel = 4096);

}  // namespace rws
