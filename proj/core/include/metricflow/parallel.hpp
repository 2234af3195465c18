#pragma once

#include <cstddef>
#include <functional>

namespace metricflow {

/// Worker count: hardware concurrency, capped by METRICFLOW_THREADS when set.
int worker_count();

/// Runs body(i) for i in [0, n) across worker_count() threads. Each index is
/// visited exactly once; callers write results into pre-sized slots so output
/// order does not depend on scheduling. The first exception thrown by any
/// body is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace metricflow
