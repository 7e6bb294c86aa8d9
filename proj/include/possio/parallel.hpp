#pragma once

// Index-parallel map over [0, count). Each index is processed exactly once and
// writes only its own output slot, so results do not depend on the schedule.

#include <cstddef>
#include <functional>

namespace possio {

/// Worker count: POSSIO_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t thread_count();

/// Runs body(i) for every i in [0, count). The first exception thrown by any
/// worker is rethrown after all workers have stopped.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace possio
