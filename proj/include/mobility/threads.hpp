#pragma once

#include <functional>

namespace mobility {

/// Worker pool size: hardware concurrency capped by the MOBILITY_THREADS
/// environment variable. Always >= 1.
int worker_count();

/// Runs fn(i) for i in [0, n) across up to worker_count() threads. Tasks must
/// be independent; falls back to a plain loop when only one worker is allowed.
void parallel_for(long n, const std::function<void(long)>& fn);

}  // namespace mobility
