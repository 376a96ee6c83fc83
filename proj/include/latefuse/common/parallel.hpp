#pragma once

#include <cstddef>
#include <functional>

namespace latefuse {

/// Worker cap: LATEFUSE_THREADS if set and positive, else hardware concurrency.
std::size_t worker_limit();

/// Runs body(i) for i in [0, count) on up to worker_limit() threads.
/// Work items must not share mutable state; results are written by index,
/// so the outcome does not depend on scheduling. The first exception thrown
/// by any item is rethrown after all workers have joined.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace latefuse
