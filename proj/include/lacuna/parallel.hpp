#pragma once

#include <cstddef>
#include <functional>

namespace lacuna {

// Worker count: LACUNA_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t thread_count();

// Runs body(i) for i in [0, n). Each index is handled exactly once; callers
// write results into per-index slots so output does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t threads = 0);

}  // namespace lacuna
