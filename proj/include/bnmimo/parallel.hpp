#pragma once

#include <cstdint>
#include <functional>

namespace bnmimo {

/// Worker count: hardware concurrency capped by BOTTLENECK_MIMO_THREADS.
int worker_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once;
/// callers write results into per-index slots and merge in index order.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body);

}  // namespace bnmimo
