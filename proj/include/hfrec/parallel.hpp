#pragma once

#include <cstdint>
#include <functional>

namespace hfrec {

// Number of worker threads (HFREC_THREADS env override, default hardware_concurrency).
int thread_count();

// Runs fn(begin, end) over disjoint chunks of [0, n). Each index is processed by
// exactly one invocation, so per-element results do not depend on the thread count.
// Falls back to inline execution for small n.
void parallel_for(int64_t n, int64_t grain, const std::function<void(int64_t, int64_t)>& fn);

}  // namespace hfrec
