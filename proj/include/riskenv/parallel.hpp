#pragma once

#include <functional>

namespace riskenv {

// Process-wide cap on worker threads (RISKENV_THREADS); defaults to 1.
void set_thread_cap(int threads);
int thread_cap();

// Runs fn(0..n-1); splits into contiguous chunks across threads when the cap
// allows. Results must be written to disjoint slots so the schedule cannot
// change the outcome.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace riskenv
