#pragma once

#include <cstddef>
#include <functional>

namespace stopgame {

// Number of worker threads used by parallel_for. Reads STOPGAME_THREADS once;
// unset or invalid values fall back to the hardware concurrency.
int max_threads();

// Runs fn(i) for i in [begin, end). Splits the range into contiguous chunks,
// one per worker. fn must only write state owned by index i; result ordering
// is up to the caller (indexed writes keep everything deterministic).
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn);

}  // namespace stopgame
