#pragma once

#include <cstddef>
#include <functional>

namespace featloc {

/// Runs body(i) for i in [0, count). Work is split into contiguous blocks
/// across at most `max_threads` threads (0 = hardware concurrency). Each
/// index is visited exactly once, so writes to per-index slots are
/// deterministic regardless of the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned max_threads = 0);

}  // namespace featloc
