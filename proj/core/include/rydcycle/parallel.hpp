#pragma once

#include <cstddef>
#include <functional>

namespace rydcycle {

/// Name of the environment variable that caps worker threads.
inline constexpr const char* kThreadsEnv = "RYDCYCLE_THREADS";

/// Worker count: RYDCYCLE_THREADS if set to a positive integer, otherwise the
/// number of logical cores.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to `workers` threads. Units are claimed
/// dynamically; callers store results by index to keep output order fixed.
/// The first exception thrown by any unit is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t workers = worker_count());

}  // namespace rydcycle
