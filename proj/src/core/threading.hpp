#pragma once

#include <cstddef>
#include <functional>

namespace homove {

// Worker count resolution: HOMOVE_THREADS if set (0/1 mean serial),
// otherwise hardware concurrency.
int max_threads();

// Runs fn(i) for i in [0, n). Parallelized across up to max_threads()
// workers; each index runs exactly once, so writes to disjoint slots are
// race-free and results are order-independent. Exceptions propagate.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace homove
